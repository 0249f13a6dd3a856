#include "risim/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace risim {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 160;
constexpr int kMarginTop = 44;
constexpr int kMarginBottom = 56;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

/// Nice tick spacing covering [lo, hi] with about n steps.
std::vector<double> ticks(double lo, double hi, int n) {
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / n;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double mult : {1.0, 2.0, 5.0, 10.0}) {
        if (mag * mult >= raw) {
            step = mag * mult;
            break;
        }
    }
    std::vector<double> out;
    for (double v = std::ceil(lo / step) * step; v <= hi + 0.5 * step; v += step)
        out.push_back(v);
    return out;
}

}  // namespace

void write_svg_plot(const std::string& path, const PlotSpec& spec,
                    const std::vector<PlotSeries>& series) {
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double y = s.y[i];
            if (spec.log_y) {
                if (!(y > 0.0)) continue;
                y = std::log10(y);
            }
            if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    if (!std::isfinite(x_lo)) {
        x_lo = 0.0;
        x_hi = 1.0;
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if (x_hi == x_lo) x_hi = x_lo + 1.0;
    if (y_hi == y_lo) y_hi = y_lo + 1.0;
    const double y_pad = 0.05 * (y_hi - y_lo);
    y_lo -= y_pad;
    y_hi += y_pad;

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    const auto sx = [&](double x) {
        return kMarginLeft + (x - x_lo) / (x_hi - x_lo) * plot_w;
    };
    const auto sy = [&](double y) {
        return kMarginTop + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;
    };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << spec.title << "</text>\n";

    // axes box and grid
    out << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (double t : ticks(x_lo, x_hi, 8)) {
        const double px = sx(t);
        out << "<line x1=\"" << px << "\" y1=\"" << kMarginTop << "\" x2=\"" << px
            << "\" y2=\"" << kMarginTop + plot_h << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << px << "\" y=\"" << kMarginTop + plot_h + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(t) << "</text>\n";
    }
    for (double t : ticks(y_lo, y_hi, 8)) {
        const double py = sy(t);
        out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << py << "\" x2=\""
            << kMarginLeft + plot_w << "\" y2=\"" << py << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << py + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << (spec.log_y ? ("1e" + fmt(t)) : fmt(t)) << "</text>\n";
    }
    out << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << spec.x_label << "</text>\n";
    out << "<text x=\"18\" y=\"" << kMarginTop + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << kMarginTop + plot_h / 2 << ")\">" << spec.y_label
        << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        std::string points;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double y = s.y[i];
            if (spec.log_y) {
                if (!(y > 0.0)) continue;
                y = std::log10(y);
            }
            if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
            points += fmt(sx(s.x[i])) + "," + fmt(sy(y)) + " ";
            out << "<circle cx=\"" << fmt(sx(s.x[i])) << "\" cy=\"" << fmt(sy(y))
                << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        }
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.7\" points=\""
            << points << "\"/>\n";
        const double ly = kMarginTop + 16 + 18 * static_cast<double>(si);
        out << "<line x1=\"" << kMarginLeft + plot_w + 12 << "\" y1=\"" << ly - 4 << "\" x2=\""
            << kMarginLeft + plot_w + 36 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << kMarginLeft + plot_w + 42 << "\" y=\"" << ly
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace risim

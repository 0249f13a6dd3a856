#ifndef RISIM_SVG_PLOT_HPP
#define RISIM_SVG_PLOT_HPP

#include <string>
#include <vector>

namespace risim {

/// One polyline of a plot.
struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;  // y values are plotted on a log10 axis (zeros skipped)
};

/// Renders a static SVG line plot. Self-contained text output, no external
/// tooling involved.
void write_svg_plot(const std::string& path, const PlotSpec& spec,
                    const std::vector<PlotSeries>& series);

}  // namespace risim

#endif

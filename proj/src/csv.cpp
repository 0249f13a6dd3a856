#include "risim/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace risim {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_schedule_csv(const std::string& path, const PhaseSchedule& sched) {
    auto out = open_out(path);
    out << "t,n,theta_rad\n";
    for (Eigen::Index t = 0; t < sched.phases.rows(); ++t)
        for (Eigen::Index n = 0; n < sched.phases.cols(); ++n)
            out << (t + 1) << ',' << (n + 1) << ',' << format_double(sched.phases(t, n))
                << '\n';
}

PhaseSchedule read_schedule_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);  // header
    Eigen::Index max_t = 0, max_n = 0;
    std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 3) throw std::runtime_error("malformed schedule row: " + line);
        const Eigen::Index t = std::stoll(f[0]) - 1;
        const Eigen::Index n = std::stoll(f[1]) - 1;
        rows.emplace_back(t, n, std::stod(f[2]));
        max_t = std::max(max_t, t + 1);
        max_n = std::max(max_n, n + 1);
    }
    PhaseSchedule sched;
    sched.phases = Mat::Zero(max_t, max_n);
    for (const auto& [t, n, v] : rows) sched.phases(t, n) = v;
    return sched;
}

void write_loss_trace_csv(const std::string& path, const std::vector<double>& loss,
                          const std::vector<double>& ortho) {
    auto out = open_out(path);
    out << "iter,loss,ortho_metric\n";
    for (std::size_t i = 0; i < loss.size(); ++i)
        out << (i + 1) << ',' << format_double(loss[i]) << ','
            << format_double(i < ortho.size() ? ortho[i] : 0.0) << '\n';
}

void write_frame_csv(const std::string& path, const ReceivedFrame& rx) {
    auto out = open_out(path);
    out << "t,re,im\n";
    for (Eigen::Index t = 0; t < rx.samples.size(); ++t)
        out << (t + 1) << ',' << format_double(rx.samples[t].real()) << ','
            << format_double(rx.samples[t].imag()) << '\n';
}

ReceivedFrame read_frame_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);
    std::vector<Complex> samples;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 3) throw std::runtime_error("malformed frame row: " + line);
        samples.emplace_back(std::stod(f[1]), std::stod(f[2]));
    }
    ReceivedFrame rx;
    rx.samples = Eigen::Map<const CVec>(samples.data(), static_cast<Eigen::Index>(samples.size()));
    return rx;
}

void write_decisions_csv(const std::string& path, const std::vector<int>& decided,
                         const std::vector<Eigen::Vector4d>& probs) {
    auto out = open_out(path);
    out << "t,symbol_index,prob1,prob2,prob3,prob4\n";
    for (std::size_t t = 0; t < decided.size(); ++t) {
        out << (t + 1) << ',' << decided[t];
        for (int i = 0; i < 4; ++i) out << ',' << format_double(probs[t][i]);
        out << '\n';
    }
}

void write_sigma_csv(const std::string& path, const CVec& sigma) {
    auto out = open_out(path);
    out << "m,re,im\n";
    for (Eigen::Index m = 0; m < sigma.size(); ++m)
        out << (m + 1) << ',' << format_double(sigma[m].real()) << ','
            << format_double(sigma[m].imag()) << '\n';
}

void write_scene_csv(const std::string& path, const CVec& sigma, const Vec& gamma) {
    auto out = open_out(path);
    out << "m,re,im,gamma\n";
    for (Eigen::Index m = 0; m < sigma.size(); ++m)
        out << (m + 1) << ',' << format_double(sigma[m].real()) << ','
            << format_double(sigma[m].imag()) << ',' << format_double(gamma[m]) << '\n';
}

void write_scene_grid_csv(const std::string& path, const Mat& grid) {
    auto out = open_out(path);
    for (Eigen::Index r = 0; r < grid.rows(); ++r) {
        for (Eigen::Index c = 0; c < grid.cols(); ++c) {
            if (c > 0) out << ',';
            out << format_double(grid(r, c));
        }
        out << '\n';
    }
}

void write_beam_pattern_csv(const std::string& path, const std::vector<int>& times,
                            const Vec& grid_deg, const std::vector<Vec>& gains) {
    auto out = open_out(path);
    out << "t,theta_deg,gain_db\n";
    for (std::size_t i = 0; i < times.size(); ++i)
        for (Eigen::Index p = 0; p < grid_deg.size(); ++p)
            out << (times[i] + 1) << ',' << format_double(grid_deg[p]) << ','
                << format_double(gains[i][p]) << '\n';
}

}  // namespace risim

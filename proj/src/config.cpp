#include "risim/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "risim/csv.hpp"

namespace risim {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

Vec parse_roi(const std::string& value) {
    const auto colon = value.find(':');
    if (colon != std::string::npos) {
        // lo:hi:count shorthand
        std::stringstream ss(value);
        std::string lo_s, hi_s, count_s;
        std::getline(ss, lo_s, ':');
        std::getline(ss, hi_s, ':');
        std::getline(ss, count_s, ':');
        const int count = std::stoi(count_s);
        return linspace_deg(std::stod(lo_s), std::stod(hi_s), count);
    }
    std::vector<double> vals;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) vals.push_back(std::stod(trim(item)));
    return Eigen::Map<const Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace

Vec linspace_deg(double lo, double hi, int count) {
    if (count < 1) throw std::invalid_argument("linspace count must be >= 1");
    Vec out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    for (int i = 0; i < count; ++i)
        out[i] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
    return out;
}

void apply_config_entry(SceneConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "n_ris") cfg.n_ris = std::stoi(value);
    else if (key == "n_pixels") cfg.n_pixels = std::stoi(value);
    else if (key == "frame_len") cfg.frame_len = std::stoi(value);
    else if (key == "delay") cfg.delay = std::stoi(value);
    else if (key == "theta_bs") cfg.theta_bs = std::stod(value);
    else if (key == "theta_ue") cfg.theta_ue = std::stod(value);
    else if (key == "roi_angles") cfg.roi_angles = parse_roi(value);
    else if (key == "alpha_c") cfg.alpha_c = std::stod(value);
    else if (key == "alpha_i") cfg.alpha_i = std::stod(value);
    else if (key == "noise_var") cfg.noise_var = std::stod(value);
    else if (key == "n_bit") cfg.n_bit = value == "continuous" ? kContinuousPhase : std::stoi(value);
    else if (key == "rho") cfg.rho = std::stod(value);
    else if (key == "ortho_threshold") cfg.ortho_threshold = std::stod(value);
    else if (key == "temp_rate") cfg.temp_rate = std::stod(value);
    else if (key == "learning_rate") cfg.learning_rate = std::stod(value);
    else if (key == "decoder_max_iters") cfg.decoder_max_iters = std::stoi(value);
    else if (key == "decoder_tol") cfg.decoder_tol = std::stod(value);
    else if (key == "gamma_rate") cfg.gamma_rate = std::stod(value);
    else throw std::invalid_argument("unknown config key: " + key);
}

SceneConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    SceneConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("malformed config line: " + line);
        apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

void save_config(const std::string& path, const SceneConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "n_ris = " << cfg.n_ris << '\n';
    out << "n_pixels = " << cfg.n_pixels << '\n';
    out << "frame_len = " << cfg.frame_len << '\n';
    out << "delay = " << cfg.delay << '\n';
    out << "theta_bs = " << format_double(cfg.theta_bs) << '\n';
    out << "theta_ue = " << format_double(cfg.theta_ue) << '\n';
    out << "roi_angles = ";
    for (Eigen::Index m = 0; m < cfg.roi_angles.size(); ++m) {
        if (m > 0) out << ',';
        out << format_double(cfg.roi_angles[m]);
    }
    out << '\n';
    out << "alpha_c = " << format_double(cfg.alpha_c) << '\n';
    out << "alpha_i = " << format_double(cfg.alpha_i) << '\n';
    out << "noise_var = " << format_double(cfg.noise_var) << '\n';
    if (cfg.continuous_phase()) out << "n_bit = continuous\n";
    else out << "n_bit = " << cfg.n_bit << '\n';
    out << "rho = " << format_double(cfg.rho) << '\n';
    out << "ortho_threshold = " << format_double(cfg.ortho_threshold) << '\n';
    out << "temp_rate = " << format_double(cfg.temp_rate) << '\n';
    out << "learning_rate = " << format_double(cfg.learning_rate) << '\n';
    out << "decoder_max_iters = " << cfg.decoder_max_iters << '\n';
    out << "decoder_tol = " << format_double(cfg.decoder_tol) << '\n';
    out << "gamma_rate = " << format_double(cfg.gamma_rate) << '\n';
}

}  // namespace risim

#include "risim/scene.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace risim {

void SceneConfig::validate() const {
    if (n_ris < 1) throw std::invalid_argument("n_ris must be positive");
    if (n_pixels < 1) throw std::invalid_argument("n_pixels must be positive");
    if (frame_len < 1) throw std::invalid_argument("frame_len must be positive");
    if (delay < 0) throw std::invalid_argument("delay must be nonnegative");
    if (delay >= frame_len) throw std::invalid_argument("delay must be smaller than frame_len");
    if (!(theta_bs > -90.0 && theta_bs < 90.0))
        throw std::domain_error("theta_bs outside (-90, 90)");
    if (!(theta_ue > -90.0 && theta_ue < 90.0))
        throw std::domain_error("theta_ue outside (-90, 90)");
    if (roi_angles.size() != n_pixels)
        throw std::invalid_argument("roi_angles size must equal n_pixels");
    for (Eigen::Index m = 0; m < roi_angles.size(); ++m) {
        if (!(roi_angles[m] > -90.0 && roi_angles[m] < 90.0))
            throw std::domain_error("roi angle outside (-90, 90)");
        if (m > 0 && !(roi_angles[m] > roi_angles[m - 1]))
            throw std::invalid_argument("roi_angles must be strictly increasing");
    }
    if (alpha_c < 0.0) throw std::invalid_argument("alpha_c must be nonnegative");
    if (alpha_i < 0.0) throw std::invalid_argument("alpha_i must be nonnegative");
    if (!(noise_var > 0.0)) throw std::invalid_argument("noise_var must be positive");
    if (n_bit != kContinuousPhase && (n_bit < 1 || n_bit > 16))
        throw std::invalid_argument("n_bit must be in {1..16} or continuous");
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must be in [0, 1]");
    if (!(ortho_threshold > 0.0 && ortho_threshold < 1.0))
        throw std::invalid_argument("ortho_threshold must be in (0, 1)");
    if (!(temp_rate > 0.0)) throw std::invalid_argument("temp_rate must be positive");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
    if (decoder_max_iters < 1) throw std::invalid_argument("decoder_max_iters must be positive");
    if (!(decoder_tol > 0.0)) throw std::invalid_argument("decoder_tol must be positive");
    if (!(gamma_rate > 0.0)) throw std::invalid_argument("gamma_rate must be positive");
}

SceneTruth make_scene_truth(CVec sigma) {
    SceneTruth truth;
    truth.sparsity = static_cast<int>((sigma.array().abs() > 0.0).count());
    truth.sigma = std::move(sigma);
    return truth;
}

CVec steering_vector(double theta_deg, int n) {
    if (!(theta_deg > -90.0 && theta_deg < 90.0))
        throw std::domain_error("steering angle outside (-90, 90)");
    if (n < 1) throw std::invalid_argument("element count must be >= 1");
    const double s = std::sin(deg2rad(theta_deg));
    CVec a(n);
    for (int i = 0; i < n; ++i) a[i] = std::polar(1.0, kPi * i * s);
    return a;
}

CVec phase_matrix_apply(const Eigen::Ref<const Vec>& phase_row,
                        const Eigen::Ref<const CVec>& v) {
    if (phase_row.size() != v.size())
        throw std::invalid_argument("phase row and vector lengths differ");
    CVec out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = std::polar(1.0, phase_row[i]) * v[i];
    return out;
}

SceneGeometry::SceneGeometry(const SceneConfig& cfg)
    : g(steering_vector(cfg.theta_bs, cfg.n_ris)),
      h_c(steering_vector(cfg.theta_ue, cfg.n_ris)),
      h_i(cfg.n_ris, cfg.roi_angles.size()) {
    for (Eigen::Index m = 0; m < cfg.roi_angles.size(); ++m)
        h_i.col(m) = steering_vector(cfg.roi_angles[m], cfg.n_ris);
}

CVec reflected_row(const SceneGeometry& geom, const Eigen::Ref<const Vec>& phase_row) {
    return phase_matrix_apply(phase_row, geom.g);
}

ReceivedFrame synth_received(const SceneConfig& cfg, const PhaseSchedule& sched,
                             const SymbolFrame& frame, const SceneTruth& truth,
                             std::uint64_t seed) {
    const int len = cfg.frame_len + cfg.delay;
    if (sched.phases.rows() != len || sched.phases.cols() != cfg.n_ris)
        throw std::invalid_argument("schedule shape must be (frame_len+delay) x n_ris");
    if (frame.symbols.size() != cfg.frame_len)
        throw std::invalid_argument("frame length must equal frame_len");
    if (truth.sigma.size() != cfg.n_pixels)
        throw std::invalid_argument("scene size must equal n_pixels");

    const SceneGeometry geom(cfg);
    const double noise_scale = std::sqrt(cfg.noise_var);
    CounterRng noise(seed, Stream::Noise);

    ReceivedFrame rx;
    rx.noise_seed = seed;
    rx.samples = CVec::Zero(len);
    for (int t = 0; t < len; ++t) {
        const CVec row = reflected_row(geom, sched.phases.row(t));
        Complex y = noise_scale * noise.cnormal();
        if (t < cfg.frame_len)
            y += cfg.alpha_c * (row.array() * geom.h_c.array()).sum() * frame.symbols[t];
        if (t >= cfg.delay)
            y += cfg.alpha_i * (row.transpose() * geom.h_i * truth.sigma)(0) *
                 frame.symbols[t - cfg.delay];
        rx.samples[t] = y;
    }
    return rx;
}

std::pair<double, double> cnr_inr(const SceneConfig& cfg, const PhaseSchedule& sched,
                                  const SymbolFrame& frame, const SceneTruth& truth) {
    if (!(cfg.noise_var > 0.0))
        throw std::domain_error("noise variance is zero; CNR/INR are infinite");
    const SceneGeometry geom(cfg);
    double comm_power = 0.0;
    double img_power = 0.0;
    const int len = cfg.frame_len + cfg.delay;
    for (int t = 0; t < len; ++t) {
        const CVec row = reflected_row(geom, sched.phases.row(t));
        if (t < cfg.frame_len)
            comm_power += std::norm(cfg.alpha_c * (row.array() * geom.h_c.array()).sum() *
                                    frame.symbols[t]);
        if (t >= cfg.delay)
            img_power += std::norm(cfg.alpha_i * (row.transpose() * geom.h_i * truth.sigma)(0) *
                                   frame.symbols[t - cfg.delay]);
    }
    comm_power /= cfg.frame_len;
    img_power /= cfg.frame_len;
    const double cnr = 10.0 * std::log10(comm_power / cfg.noise_var);
    const double inr = img_power > 0.0
                           ? 10.0 * std::log10(img_power / cfg.noise_var)
                           : -std::numeric_limits<double>::infinity();
    return {cnr, inr};
}

SymbolFrame random_qpsk_frame(int n, CounterRng& rng) {
    SymbolFrame frame;
    frame.symbols.resize(n);
    for (int t = 0; t < n; ++t) {
        const int i = 1 + static_cast<int>(rng.next_u64() & 3u);
        frame.symbols[t] = qpsk_point(i);
    }
    return frame;
}

}  // namespace risim

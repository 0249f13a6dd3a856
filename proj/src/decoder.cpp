#include "risim/decoder.hpp"

#include <cmath>
#include <stdexcept>

#include "risim/errors.hpp"

namespace risim {

namespace {

constexpr double kCoeffFloor = 1e-12;  // below this a divisor is treated as absent
constexpr double kVarFloor = 1e-30;

ScalarGaussian damped(const ScalarGaussian& fresh, const ScalarGaussian& old, double lambda) {
    if (lambda >= 1.0) return fresh;
    return {lambda * fresh.mean + (1.0 - lambda) * old.mean,
            lambda * fresh.weight + (1.0 - lambda) * old.weight};
}

}  // namespace

LinkModel make_link_model(const SceneConfig& cfg, const PhaseSchedule& sched) {
    if (sched.phases.rows() != cfg.frame_len + cfg.delay || sched.phases.cols() != cfg.n_ris)
        throw std::invalid_argument("schedule shape must be (frame_len+delay) x n_ris");
    const SceneGeometry geom(cfg);
    LinkModel link;
    link.comm_coeff.resize(cfg.frame_len);
    link.imaging_rows.resize(cfg.frame_len, cfg.n_pixels);
    for (int t = 0; t < cfg.frame_len; ++t) {
        const CVec row = reflected_row(geom, sched.phases.row(t));
        link.comm_coeff[t] = cfg.alpha_c * (row.array() * geom.h_c.array()).sum();
        const CVec row_ahead = reflected_row(geom, sched.phases.row(t + cfg.delay));
        link.imaging_rows.row(t) = row_ahead.transpose() * geom.h_i;
    }
    return link;
}

Complex comm_scalar(const SceneConfig& cfg, const PhaseSchedule& sched, int t) {
    if (t < 0 || t >= cfg.frame_len) throw std::invalid_argument("time index out of range");
    const SceneGeometry geom(cfg);
    const CVec row = reflected_row(geom, sched.phases.row(t));
    return cfg.alpha_c * (row.array() * geom.h_c.array()).sum();
}

ScalarGaussian fwd_msg_pure_comm(Complex comm_coeff, double noise_var, Complex y_t) {
    if (std::abs(comm_coeff) < kCoeffFloor) return {};
    const double var = std::max(noise_var, kVarFloor);
    return {y_t / comm_coeff, std::norm(comm_coeff) / var};
}

ScalarGaussian fwd_msg_overlap(Complex comm_coeff, double noise_var, Complex y_t,
                               Complex m_h_prev, const MomentStats& prev_x_msg) {
    const Complex mean_b = m_h_prev * prev_x_msg.mean;
    const double var_b = std::norm(m_h_prev) * prev_x_msg.var;
    const Complex mean_a = y_t - mean_b;
    const double var_a = std::max(noise_var + var_b, kVarFloor);
    if (std::abs(comm_coeff) < kCoeffFloor) return {};
    return {mean_a / comm_coeff, std::norm(comm_coeff) / var_a};
}

ScalarGaussian bwd_msg_tail(Complex m_h, double noise_var, Complex y_ahead) {
    if (std::abs(m_h) < kCoeffFloor) return {};
    const double var = std::max(noise_var, kVarFloor);
    return {y_ahead / m_h, std::norm(m_h) / var};
}

ScalarGaussian bwd_msg_mid(Complex m_h, double noise_var, Complex y_ahead,
                           Complex comm_coeff_ahead, const MomentStats& next_x_msg) {
    if (std::abs(m_h) < kCoeffFloor) return {};
    const Complex mean_a = comm_coeff_ahead * next_x_msg.mean;
    const double var_a = std::norm(comm_coeff_ahead) * next_x_msg.var;
    const Complex mean_b = y_ahead - mean_a;
    const double var_b = std::max(noise_var + var_a, kVarFloor);
    return {mean_b / m_h, std::norm(m_h) / var_b};
}

DecodeResult run_decoder(const SceneConfig& cfg, const LinkModel& link,
                         const ReceivedFrame& rx, const Imager& imager,
                         const DecoderOptions& opts) {
    const int len = cfg.frame_len;
    const int k = cfg.delay;
    if (rx.samples.size() != len + k)
        throw std::invalid_argument("received frame length must be frame_len+delay");
    if (!(opts.damping > 0.0 && opts.damping <= 1.0))
        throw std::invalid_argument("damping must be in (0, 1]");

    DecodeResult result;
    result.beliefs.resize(len);
    result.scene.sigma = opts.initial_scene.size() > 0 ? opts.initial_scene
                                                       : CVec::Zero(cfg.n_pixels);
    result.scene.gamma = Vec::Ones(cfg.n_pixels);
    if (result.scene.sigma.size() != cfg.n_pixels)
        throw std::invalid_argument("initial scene size must equal n_pixels");

    CVec m_h = cfg.alpha_i * (link.imaging_rows * result.scene.sigma);
    std::vector<ScalarGaussian> fwd(len), bwd(len);
    CVec x_prev = CVec::Zero(len);
    CVec sigma_prev = result.scene.sigma;
    SymbolFrame decided;
    decided.symbols.resize(len);

    for (int p = 1; p <= cfg.decoder_max_iters; ++p) {
        // Forward sweep: observation y_t explains x_t once the already
        // moment-matched neighbour x_{t-k} cancels the imaging part.
        for (int t = 0; t < len; ++t) {
            ScalarGaussian msg;
            if (t < k) {
                msg = fwd_msg_pure_comm(link.comm_coeff[t], cfg.noise_var, rx.samples[t]);
            } else {
                const MomentStats prev = moment_match(fwd[t - k]);
                msg = fwd_msg_overlap(link.comm_coeff[t], cfg.noise_var, rx.samples[t],
                                      m_h[t - k], prev);
            }
            fwd[t] = p == 1 ? msg : damped(msg, fwd[t], opts.damping);
        }

        // Backward sweep over the echo path, in reverse time order.
        for (int t = len - 1; t >= 0; --t) {
            ScalarGaussian msg;
            if (t + k >= len) {
                msg = bwd_msg_tail(m_h[t], cfg.noise_var, rx.samples[t + k]);
            } else {
                const MomentStats next = moment_match(bwd[t + k]);
                msg = bwd_msg_mid(m_h[t], cfg.noise_var, rx.samples[t + k],
                                  link.comm_coeff[t + k], next);
            }
            bwd[t] = p == 1 ? msg : damped(msg, bwd[t], opts.damping);
        }

        for (int t = 0; t < len; ++t) {
            if (!std::isfinite(fwd[t].weight) || !std::isfinite(bwd[t].weight) ||
                !std::isfinite(std::abs(fwd[t].mean)) || !std::isfinite(std::abs(bwd[t].mean)))
                throw DecodeFailure("non-finite message", p);
            result.beliefs[t] = belief_and_decide(fwd[t], bwd[t]);
            decided.symbols[t] = qpsk_point(result.beliefs[t].decided);
        }

        result.scene = imager(decided);
        if (!result.scene.sigma.allFinite()) throw DecodeFailure("non-finite scene", p);
        m_h = cfg.alpha_i * (link.imaging_rows * result.scene.sigma);

        const double delta = (decided.symbols - x_prev).norm() +
                             (result.scene.sigma - sigma_prev).norm();
        result.delta_trace.push_back(delta);
        x_prev = decided.symbols;
        sigma_prev = result.scene.sigma;
        result.iterations = p;
        if (delta <= cfg.decoder_tol) {
            result.converged = true;
            break;
        }
    }

    result.symbols = std::move(decided);
    return result;
}

DecodeResult run_decoder(const SceneConfig& cfg, const PhaseSchedule& sched,
                         const ReceivedFrame& rx, const Imager& imager,
                         const DecoderOptions& opts) {
    return run_decoder(cfg, make_link_model(cfg, sched), rx, imager, opts);
}

}  // namespace risim

#include "risim/phase_opt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "risim/errors.hpp"

namespace risim {

namespace {

constexpr double kDenomFloor = 1e-30;

Complex imag_unit() { return Complex(0.0, 1.0); }

/// Element responses U(t, n) = g_n * exp(j*theta_{t,n}) for all rows.
CMat element_responses(const SceneGeometry& geom, const Mat& phases) {
    CMat u(phases.rows(), phases.cols());
    for (Eigen::Index t = 0; t < phases.rows(); ++t)
        for (Eigen::Index n = 0; n < phases.cols(); ++n)
            u(t, n) = geom.g[n] * std::polar(1.0, phases(t, n));
    return u;
}

double wrap_two_pi(double x) {
    double y = std::fmod(x, kTwoPi);
    if (y < 0.0) y += kTwoPi;
    return y;
}

double rms(const Mat& m) {
    if (m.size() == 0) return 0.0;
    return std::sqrt(m.squaredNorm() / static_cast<double>(m.size()));
}

}  // namespace

Vec phase_grid(int n_bit) {
    if (n_bit < 1 || n_bit > 16) throw std::invalid_argument("n_bit must be in {1..16}");
    const int levels = 1 << n_bit;
    Vec grid(levels);
    for (int s = 0; s < levels; ++s) grid[s] = kTwoPi * s / levels;
    return grid;
}

CMat sensing_matrix_from_phases(const SceneGeometry& geom, const Mat& phases, int delay) {
    const Eigen::Index rows = phases.rows() - delay;
    const CMat u = element_responses(geom, phases.bottomRows(rows));
    CMat g_mat(rows, geom.h_i.cols());
    g_mat.noalias() = u * geom.h_i;
    return g_mat;
}

SensingMatrix sensing_matrix(const SceneConfig& cfg, const PhaseSchedule& sched) {
    if (sched.phases.rows() != cfg.frame_len + cfg.delay || sched.phases.cols() != cfg.n_ris)
        throw std::invalid_argument("schedule shape must be (frame_len+delay) x n_ris");
    const SceneGeometry geom(cfg);
    return {sensing_matrix_from_phases(geom, sched.phases, cfg.delay)};
}

double ortho_metric(const CMat& g_mat) {
    const Eigen::Index m = g_mat.cols();
    if (m < 2) throw std::invalid_argument("ortho metric needs at least two columns");
    Vec norms(m);
    for (Eigen::Index c = 0; c < m; ++c) {
        norms[c] = g_mat.col(c).norm();
        if (!(norms[c] > 0.0)) throw std::domain_error("sensing matrix has a zero column");
    }
    const CMat gram = g_mat.adjoint() * g_mat;
    double acc = 0.0;
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b) {
            if (a == b) continue;
            const double corr = std::abs(gram(a, b)) / (norms[a] * norms[b]);
            acc += corr * corr;
        }
    return std::sqrt(acc) / (static_cast<double>(m) * static_cast<double>(m) - m);
}

double temperature(int l, double r) {
    if (l < 0) throw std::invalid_argument("iteration index must be nonnegative");
    if (!(r > 0.0)) throw std::invalid_argument("temperature rate must be positive");
    const double rl = r * static_cast<double>(l);
    return 1.0 + rl * rl;
}

std::pair<double, Vec> softmax_select(const Eigen::Ref<const Vec>& w_row, double alpha,
                                      const Eigen::Ref<const Vec>& grid) {
    if (w_row.size() != grid.size())
        throw std::invalid_argument("logit row and grid lengths differ");
    const Vec u = alpha * w_row.cwiseAbs();
    const double peak = u.maxCoeff();
    Vec weights = (u.array() - peak).exp();
    weights /= weights.sum();
    return {weights.dot(grid), weights};
}

Mat soft_phases(const SoftWeights& sw, double alpha) {
    const int levels = sw.levels;
    Mat phases(sw.w.rows(), sw.w.cols() / levels);
    for (Eigen::Index t = 0; t < phases.rows(); ++t)
        for (Eigen::Index n = 0; n < phases.cols(); ++n)
            phases(t, n) = softmax_select(sw.w.row(t).segment(n * levels, levels),
                                          alpha, sw.grid).first;
    return phases;
}

Mat hard_phases(const SoftWeights& sw) {
    const int levels = sw.levels;
    Mat phases(sw.w.rows(), sw.w.cols() / levels);
    for (Eigen::Index t = 0; t < phases.rows(); ++t)
        for (Eigen::Index n = 0; n < phases.cols(); ++n) {
            Eigen::Index best = 0;
            sw.w.row(t).segment(n * levels, levels).cwiseAbs().maxCoeff(&best);
            phases(t, n) = sw.grid[best];
        }
    return phases;
}

double init_loss_eval(const SceneGeometry& geom, const CMat& target, const Mat& phases,
                      int delay, Mat* d_theta) {
    const Eigen::Index rows = phases.rows() - delay;
    if (target.rows() != rows || target.cols() != geom.h_i.cols())
        throw std::invalid_argument("target shape must match the sensing matrix");
    const CMat u = element_responses(geom, phases.bottomRows(rows));
    CMat err(rows, target.cols());
    err.noalias() = u * geom.h_i;
    err -= target;
    const double loss = err.norm();
    if (d_theta != nullptr) {
        d_theta->setZero(phases.rows(), phases.cols());
        if (loss > 0.0) {
            CMat back(rows, phases.cols());
            back.noalias() = err.conjugate() * geom.h_i.transpose();
            for (Eigen::Index r = 0; r < rows; ++r)
                for (Eigen::Index n = 0; n < phases.cols(); ++n)
                    (*d_theta)(delay + r, n) =
                        (imag_unit() * u(r, n) * back(r, n)).real() / loss;
        }
    }
    return loss;
}

double refine_loss_eval(const SceneGeometry& geom, const Mat& phases, double rho,
                        Mat* d_theta, bool* clamped) {
    if (clamped != nullptr) *clamped = false;
    if (d_theta != nullptr) d_theta->setZero(phases.rows(), phases.cols());
    double loss = 0.0;
    for (Eigen::Index t = 0; t < phases.rows(); ++t) {
        CVec u(phases.cols());
        for (Eigen::Index n = 0; n < phases.cols(); ++n)
            u[n] = geom.g[n] * std::polar(1.0, phases(t, n));
        const Complex c = (u.array() * geom.h_c.array()).sum();
        const CVec r = geom.h_i.transpose() * u;
        double denom = rho * std::norm(c) + (1.0 - rho) * r.squaredNorm();
        if (denom < kDenomFloor) {
            denom = kDenomFloor;
            if (clamped != nullptr) *clamped = true;
        }
        loss += 1.0 / denom;
        if (d_theta != nullptr) {
            const CVec q = geom.h_i * r.conjugate();
            for (Eigen::Index n = 0; n < phases.cols(); ++n) {
                const double d_comm =
                    2.0 * rho * (std::conj(c) * imag_unit() * u[n] * geom.h_c[n]).real();
                const double d_img =
                    2.0 * (1.0 - rho) * (imag_unit() * u[n] * q[n]).real();
                (*d_theta)(t, n) = -(d_comm + d_img) / (denom * denom);
            }
        }
    }
    return loss;
}

double log_gain_loss_eval(const SceneGeometry& geom, const Mat& phases, double rho,
                          Mat* d_theta) {
    if (d_theta != nullptr) d_theta->setZero(phases.rows(), phases.cols());
    double loss = 0.0;
    for (Eigen::Index t = 0; t < phases.rows(); ++t) {
        CVec u(phases.cols());
        for (Eigen::Index n = 0; n < phases.cols(); ++n)
            u[n] = geom.g[n] * std::polar(1.0, phases(t, n));
        const Complex c = (u.array() * geom.h_c.array()).sum();
        const CVec r = geom.h_i.transpose() * u;
        const double c2 = std::max(std::norm(c), kDenomFloor);
        const double r2 = std::max(r.squaredNorm(), kDenomFloor);
        loss -= rho * std::log(c2) + (1.0 - rho) * std::log(r2);
        if (d_theta != nullptr) {
            const CVec q = geom.h_i * r.conjugate();
            for (Eigen::Index n = 0; n < phases.cols(); ++n) {
                const double d_comm =
                    2.0 * (std::conj(c) * imag_unit() * u[n] * geom.h_c[n]).real();
                const double d_img = 2.0 * (imag_unit() * u[n] * q[n]).real();
                (*d_theta)(t, n) = -(rho * d_comm / c2 + (1.0 - rho) * d_img / r2);
            }
        }
    }
    return loss;
}

Mat chain_softmax_grad(const SoftWeights& sw, double alpha, const Mat& d_theta) {
    const int levels = sw.levels;
    Mat d_w = Mat::Zero(sw.w.rows(), sw.w.cols());
    for (Eigen::Index t = 0; t < d_theta.rows(); ++t)
        for (Eigen::Index n = 0; n < d_theta.cols(); ++n) {
            const auto w_row = sw.w.row(t).segment(n * levels, levels);
            const auto [theta, weights] = softmax_select(w_row, alpha, sw.grid);
            for (int s = 0; s < levels; ++s) {
                const double sign = w_row[s] > 0.0 ? 1.0 : (w_row[s] < 0.0 ? -1.0 : 0.0);
                d_w(t, n * levels + s) =
                    d_theta(t, n) * alpha * sign * weights[s] * (sw.grid[s] - theta);
            }
        }
    return d_w;
}

double init_loss(const SceneConfig& cfg, const SoftWeights& sw, double alpha,
                 const CMat& target) {
    const SceneGeometry geom(cfg);
    return init_loss_eval(geom, target, soft_phases(sw, alpha), cfg.delay, nullptr);
}

double refine_loss(const SceneConfig& cfg, const SoftWeights& sw, double alpha) {
    const SceneGeometry geom(cfg);
    return refine_loss_eval(geom, soft_phases(sw, alpha), cfg.rho, nullptr);
}

CMat sample_init_target(const SceneConfig& cfg, std::uint64_t seed) {
    CounterRng rng(seed, Stream::Target);
    const double scale = std::sqrt(static_cast<double>(cfg.n_ris));
    CMat target(cfg.frame_len, cfg.n_pixels);
    for (Eigen::Index t = 0; t < target.rows(); ++t)
        for (Eigen::Index m = 0; m < target.cols(); ++m) target(t, m) = scale * rng.cnormal();
    return target;
}

namespace {

/// Shared two-stage driver. The discrete path optimizes softmax logits, the
/// continuous path raw phases.
struct TwoStageDriver {
    const SceneConfig& cfg;
    const SceneGeometry geom;
    const OptimizerOptions& opts;
    bool discrete;
    SoftWeights sw;  // discrete parameters
    Mat phases;      // continuous parameters
    double alpha = 1.0;

    TwoStageDriver(const SceneConfig& c, std::uint64_t seed, const OptimizerOptions& o)
        : cfg(c), geom(c), opts(o), discrete(!c.continuous_phase()) {
        const int rows = cfg.frame_len + cfg.delay;
        CounterRng rng(seed, Stream::Weights);
        if (discrete) {
            sw.levels = cfg.phase_levels();
            sw.grid = phase_grid(cfg.n_bit);
            sw.w.resize(rows, static_cast<Eigen::Index>(cfg.n_ris) * sw.levels);
            for (Eigen::Index t = 0; t < sw.w.rows(); ++t)
                for (Eigen::Index j = 0; j < sw.w.cols(); ++j)
                    sw.w(t, j) = 0.1 * rng.uniform();
        } else {
            phases.resize(rows, cfg.n_ris);
            for (Eigen::Index t = 0; t < phases.rows(); ++t)
                for (Eigen::Index n = 0; n < phases.cols(); ++n)
                    phases(t, n) = kTwoPi * rng.uniform();
        }
    }

    Mat relaxed_phases() const { return discrete ? soft_phases(sw, alpha) : phases; }

    Mat emitted_phases() const {
        if (discrete) return hard_phases(sw);
        Mat out = phases;
        for (Eigen::Index t = 0; t < out.rows(); ++t)
            for (Eigen::Index n = 0; n < out.cols(); ++n) out(t, n) = wrap_two_pi(out(t, n));
        return out;
    }

    double emitted_metric() const {
        return ortho_metric(sensing_matrix_from_phases(geom, emitted_phases(), cfg.delay));
    }

    void step(const Mat& d_theta, double scale) {
        if (discrete) {
            sw.w -= cfg.learning_rate * scale * chain_softmax_grad(sw, alpha, d_theta);
        } else {
            phases -= cfg.learning_rate * scale * d_theta;
        }
    }

    double grad_rms(const Mat& d_theta) const {
        return rms(discrete ? chain_softmax_grad(sw, alpha, d_theta) : d_theta);
    }
};

bool plateaued(const std::vector<double>& losses, int window, double rel_tol) {
    const std::size_t n = losses.size();
    if (n < static_cast<std::size_t>(window) + 1) return false;
    const double then = losses[n - 1 - window];
    const double now = losses[n - 1];
    return (then - now) < rel_tol * std::max(std::abs(then), 1e-30);
}

}  // namespace

std::pair<PhaseSchedule, OptimizerReport> optimize_phases(const SceneConfig& cfg,
                                                          std::uint64_t seed,
                                                          const OptimizerOptions& opts) {
    TwoStageDriver drv(cfg, seed, opts);
    OptimizerReport report;

    // Stage 1: shape the sensing matrix toward a Gaussian target.
    const CMat target = sample_init_target(cfg, seed);
    std::vector<double> stage_losses;
    double metric_snapshot = drv.emitted_metric();
    double best_metric = metric_snapshot;
    Mat d_theta;
    double scale = 1.0;
    for (int l = 0; l < opts.stage1_max_iters; ++l) {
        drv.alpha = temperature(l, cfg.temp_rate);
        const double loss =
            init_loss_eval(drv.geom, target, drv.relaxed_phases(), cfg.delay, &d_theta);
        if (l % opts.stage1_metric_every == 0) {
            metric_snapshot = drv.emitted_metric();
            best_metric = std::min(best_metric, metric_snapshot);
        }
        stage_losses.push_back(loss);
        report.loss_trace.push_back(loss);
        report.ortho_trace.push_back(metric_snapshot);
        ++report.stage1_iterations;
        if (plateaued(stage_losses, opts.plateau_window, opts.plateau_rel_tol)) break;
        if (l == 0) scale = 1.0 / std::max(drv.grad_rms(d_theta), 1e-12);
        drv.step(d_theta, scale);
    }

    const double start_metric = drv.emitted_metric();
    best_metric = std::min(best_metric, start_metric);
    if (start_metric > cfg.ortho_threshold)
        throw InfeasibleStartError("stage 1 ended above the orthogonality threshold",
                                   best_metric);

    // Stage 2: refine the gains while the schedule stays feasible; a step
    // that breaks the constraint is reverted and the run stops there.
    SoftWeights snapshot_sw = drv.sw;
    Mat snapshot_phases = drv.phases;
    stage_losses.clear();
    scale = 1.0;
    for (int l = 0; l < opts.stage2_max_iters; ++l) {
        drv.alpha = temperature(l, cfg.temp_rate);
        const double loss = log_gain_loss_eval(drv.geom, drv.relaxed_phases(), cfg.rho, &d_theta);
        const double metric = drv.emitted_metric();
        if (metric > cfg.ortho_threshold) {
            drv.sw = snapshot_sw;
            drv.phases = snapshot_phases;
            break;
        }
        snapshot_sw = drv.sw;
        snapshot_phases = drv.phases;
        stage_losses.push_back(loss);
        report.loss_trace.push_back(loss);
        report.ortho_trace.push_back(metric);
        ++report.iterations;
        if (plateaued(stage_losses, opts.plateau_window, opts.plateau_rel_tol)) break;
        if (l == 0) scale = 1.0 / std::max(drv.grad_rms(d_theta), 1e-12);
        drv.step(d_theta, scale);
    }
    report.iterations += report.stage1_iterations;

    PhaseSchedule sched{drv.emitted_phases()};
    report.final_ortho_metric =
        ortho_metric(sensing_matrix_from_phases(drv.geom, sched.phases, cfg.delay));
    report.accepted = report.final_ortho_metric <= cfg.ortho_threshold;
    return {std::move(sched), std::move(report)};
}

std::pair<PhaseSchedule, OptimizerReport> optimize_discrete(const SceneConfig& cfg,
                                                            std::uint64_t seed,
                                                            const OptimizerOptions& opts) {
    if (cfg.continuous_phase())
        throw std::invalid_argument("optimize_discrete needs a finite n_bit");
    return optimize_phases(cfg, seed, opts);
}

std::pair<PhaseSchedule, OptimizerReport> optimize_continuous(const SceneConfig& cfg,
                                                              std::uint64_t seed,
                                                              const OptimizerOptions& opts) {
    if (!cfg.continuous_phase())
        throw std::invalid_argument("optimize_continuous needs n_bit = continuous");
    return optimize_phases(cfg, seed, opts);
}

double beam_gain_db(const SceneConfig& cfg, const PhaseSchedule& sched, int t,
                    double theta_deg) {
    if (t < 0 || t >= sched.phases.rows()) throw std::invalid_argument("time index out of range");
    const SceneGeometry geom(cfg);
    const CVec u = reflected_row(geom, sched.phases.row(t));
    const CVec a = steering_vector(theta_deg, cfg.n_ris);
    return 20.0 * std::log10(std::abs((u.array() * a.array()).sum()));
}

Vec beam_pattern(const SceneConfig& cfg, const PhaseSchedule& sched, int t,
                 const Vec& grid_deg) {
    if (t < 0 || t >= sched.phases.rows()) throw std::invalid_argument("time index out of range");
    const SceneGeometry geom(cfg);
    const CVec u = reflected_row(geom, sched.phases.row(t));
    Vec gains(grid_deg.size());
    for (Eigen::Index p = 0; p < grid_deg.size(); ++p) {
        const CVec a = steering_vector(grid_deg[p], cfg.n_ris);
        gains[p] = 20.0 * std::log10(std::abs((u.array() * a.array()).sum()));
    }
    gains.array() -= gains.maxCoeff();
    return gains;
}

}  // namespace risim

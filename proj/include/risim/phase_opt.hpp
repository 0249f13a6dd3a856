#ifndef RISIM_PHASE_OPT_HPP
#define RISIM_PHASE_OPT_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "risim/scene.hpp"
#include "risim/types.hpp"

namespace risim {

/// Admissible phase grid {0, 2pi/2^n_bit, ..., 2pi(2^n_bit - 1)/2^n_bit}.
Vec phase_grid(int n_bit);

/// Softmax logits of the discrete relaxation. w(t, n*S + s) is the logit of
/// grid level s for element n at time t, S = 2^n_bit.
struct SoftWeights {
    Mat w;     // (frame_len + delay) x (n_ris * levels)
    Vec grid;  // levels
    int levels = 0;
};

/// Stacked alpha-free rows g^T Theta(t) H_I over the imaging-active time
/// indices t = delay .. frame_len+delay-1 (0-based), one row per index.
struct SensingMatrix {
    CMat g_mat;  // frame_len x n_pixels
};

struct OptimizerReport {
    std::vector<double> loss_trace;
    std::vector<double> ortho_trace;  // parallel to loss_trace
    double final_ortho_metric = 0.0;
    int iterations = 0;
    bool accepted = false;
    int stage1_iterations = 0;
};

struct OptimizerOptions {
    int stage1_max_iters = 5000;
    int stage2_max_iters = 5000;
    int plateau_window = 50;
    double plateau_rel_tol = 1e-4;
    int stage1_metric_every = 25;  // trace cadence for the ortho metric in stage 1
};

SensingMatrix sensing_matrix(const SceneConfig& cfg, const PhaseSchedule& sched);
CMat sensing_matrix_from_phases(const SceneGeometry& geom, const Mat& phases, int delay);

/// ||R(G) - I||_F / (M^2 - M) where R is the column correlation-coefficient
/// matrix. Throws std::domain_error on an all-zero column.
double ortho_metric(const CMat& g_mat);

/// Annealing temperature at iteration l: 1 + (r*l)^2.
double temperature(int l, double r);

/// Softmax selection of one phase from the grid. Returns the selected phase
/// (inner product of the weights with the grid) and the weights themselves.
std::pair<double, Vec> softmax_select(const Eigen::Ref<const Vec>& w_row, double alpha,
                                      const Eigen::Ref<const Vec>& grid);

/// Phases produced by softmax-relaxing every logit row at temperature alpha.
Mat soft_phases(const SoftWeights& sw, double alpha);

/// Grid snap by largest |logit| per (t, n); equals the temperature -> inf
/// limit of soft_phases.
Mat hard_phases(const SoftWeights& sw);

/// Stage-1 surrogate loss ||target - G(phases)||_F. Fills d_theta (same shape
/// as phases) with the gradient when non-null.
double init_loss_eval(const SceneGeometry& geom, const CMat& target, const Mat& phases,
                      int delay, Mat* d_theta);

/// Reciprocal-gain loss: sum over t of 1/(rho*|g^T Theta h_c|^2 +
/// (1-rho)*||g^T Theta H_I||^2), denominators clamped at 1e-30.
double refine_loss_eval(const SceneGeometry& geom, const Mat& phases, double rho,
                        Mat* d_theta, bool* clamped = nullptr);

/// Scale-invariant gain trade-off driven by stage 2: sum over t of
/// -(rho*log|g^T Theta h_c|^2 + (1-rho)*log||g^T Theta H_I||^2). The raw
/// power sum mixes one coherent term with a pixel-count-weighted term, so its
/// optimum ignores the communication link at moderate rho; weighting the
/// log-gains instead makes rho dial the split between the links.
double log_gain_loss_eval(const SceneGeometry& geom, const Mat& phases, double rho,
                          Mat* d_theta);

/// Chain rule from a phase gradient to the logits through softmax_select.
/// Uses the sign(w) subgradient of |w| with sign(0) = 0.
Mat chain_softmax_grad(const SoftWeights& sw, double alpha, const Mat& d_theta);

/// Spec-level wrappers on the softmax-relaxed schedule.
double init_loss(const SceneConfig& cfg, const SoftWeights& sw, double alpha,
                 const CMat& target);
double refine_loss(const SceneConfig& cfg, const SoftWeights& sw, double alpha);

/// Gaussian stage-1 target with entry variance matching E|G(t,m)|^2 = n_ris
/// under uniform random phases.
CMat sample_init_target(const SceneConfig& cfg, std::uint64_t seed);

/// Two-stage annealed-softmax optimization of the discrete phase model.
/// Throws InfeasibleStartError when stage 1 cannot reach the orthogonality
/// threshold.
std::pair<PhaseSchedule, OptimizerReport> optimize_discrete(
    const SceneConfig& cfg, std::uint64_t seed, const OptimizerOptions& opts = {});

/// Same two-stage structure on raw phases (n_bit = continuous).
std::pair<PhaseSchedule, OptimizerReport> optimize_continuous(
    const SceneConfig& cfg, std::uint64_t seed, const OptimizerOptions& opts = {});

std::pair<PhaseSchedule, OptimizerReport> optimize_phases(
    const SceneConfig& cfg, std::uint64_t seed, const OptimizerOptions& opts = {});

/// Unnormalized receive gain 20*log10 |g^T Theta(t) a(theta)| at one angle.
double beam_gain_db(const SceneConfig& cfg, const PhaseSchedule& sched, int t,
                    double theta_deg);

/// Receive pattern over an angle grid (degrees), normalized so the grid
/// maximum sits at 0 dB. t is a 0-based time index.
Vec beam_pattern(const SceneConfig& cfg, const PhaseSchedule& sched, int t,
                 const Vec& grid_deg);

}  // namespace risim

#endif

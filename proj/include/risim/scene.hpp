#ifndef RISIM_SCENE_HPP
#define RISIM_SCENE_HPP

#include <cstdint>
#include <utility>

#include "risim/rng.hpp"
#include "risim/types.hpp"

namespace risim {

/// Marker value of n_bit for the continuous-phase model.
inline constexpr int kContinuousPhase = 0;

/// All physical and algorithmic constants of one experiment.
/// Angles are degrees at this surface; conversion to radians happens once
/// inside the geometry builder.
struct SceneConfig {
    int n_ris = 150;       // RIS element count N
    int n_pixels = 64;     // RoI grid size M
    int frame_len = 1024;  // symbol frame length L
    int delay = 1;         // communication/imaging delay k (samples)
    double theta_bs = -45.0;
    double theta_ue = 70.0;
    Vec roi_angles;  // M angles in degrees, strictly increasing
    double alpha_c = 1.0;
    double alpha_i = 1.0;
    double noise_var = 0.1;       // total complex noise variance
    int n_bit = kContinuousPhase; // phase quantization bits; 0 = continuous
    double rho = 0.5;             // communication/imaging weight
    double ortho_threshold = 0.1; // sensing-matrix orthogonality bound
    double temp_rate = 0.005;     // temperature schedule rate r
    double learning_rate = 0.001; // SGD step
    int decoder_max_iters = 20;
    double decoder_tol = 1e-3;
    double gamma_rate = 1e-6;     // Gamma-prior rate of the sparsity prior

    bool continuous_phase() const { return n_bit == kContinuousPhase; }
    int phase_levels() const { return 1 << n_bit; }

    /// Throws std::invalid_argument / std::domain_error on violated
    /// invariants (positivity, ranges, strictly increasing RoI grid, ...).
    void validate() const;
};

/// Per-time-index RIS phases, shape (frame_len + delay) x n_ris, in [0, 2pi).
struct PhaseSchedule {
    Mat phases;
};

/// QPSK symbols of one frame, unit modulus, drawn from the 4-point grid.
struct SymbolFrame {
    CVec symbols;
};

/// Sampled baseband frame at the BS, length frame_len + delay.
struct ReceivedFrame {
    CVec samples;
    std::uint64_t noise_seed = 0;
};

/// Ground-truth scattering coefficients of the RoI.
struct SceneTruth {
    CVec sigma;
    int sparsity = 0;
};

SceneTruth make_scene_truth(CVec sigma);

/// Half-wavelength ULA response toward theta (degrees): entry i is
/// exp(j*pi*i*sin(theta)). Throws std::domain_error outside (-90, 90).
CVec steering_vector(double theta_deg, int n);

/// Diagonal phase action: entry n of the result is exp(j*phase_row[n])*v[n].
CVec phase_matrix_apply(const Eigen::Ref<const Vec>& phase_row,
                        const Eigen::Ref<const CVec>& v);

/// Cached steering vectors of one scene: g = a(theta_bs), h_c = a(theta_ue),
/// h_i columns = a(theta) over the RoI grid.
struct SceneGeometry {
    CVec g;
    CVec h_c;
    CMat h_i;  // n_ris x n_pixels

    explicit SceneGeometry(const SceneConfig& cfg);
};

/// Row vector g^T * Theta(t) as an element-wise product g .* exp(j*phases).
CVec reflected_row(const SceneGeometry& geom, const Eigen::Ref<const Vec>& phase_row);

/// Synthesizes the three-segment received frame with seeded circular complex
/// Gaussian noise of total variance noise_var. Bit-identical across runs for
/// a fixed seed.
ReceivedFrame synth_received(const SceneConfig& cfg, const PhaseSchedule& sched,
                             const SymbolFrame& frame, const SceneTruth& truth,
                             std::uint64_t seed);

/// Measured (CNR, INR) in dB of the scene. INR is -inf when the imaging link
/// is silent; throws std::domain_error when noise_var is zero.
std::pair<double, double> cnr_inr(const SceneConfig& cfg, const PhaseSchedule& sched,
                                  const SymbolFrame& frame, const SceneTruth& truth);

/// Uniform random QPSK frame of length n.
SymbolFrame random_qpsk_frame(int n, CounterRng& rng);

}  // namespace risim

#endif

#ifndef RISIM_SBL_HPP
#define RISIM_SBL_HPP

#include "risim/scene.hpp"
#include "risim/types.hpp"

namespace risim {

/// Adaptive SBL state: posterior mean, per-pixel precisions, adaptive shape
/// and noise-variance estimate.
struct SparseEstimate {
    CVec sigma;
    Vec gamma;
    double epsilon = 1e-3;
    double noise_est = 1.0;
    bool converged = false;
};

/// Linear imaging model extracted from one received frame: residual = matrix
/// * sigma + noise, rows spanning the imaging-active time indices.
struct ImagingSystem {
    CMat matrix;    // frame_len x n_pixels, symbol-scaled
    CVec residual;  // frame_len
};

/// Which noise-variance update the SBL loop runs. AsWritten divides by
/// L - sum(gamma) and holds the previous estimate when that denominator is
/// not positive; Standard uses L - sum(1 - gamma_m * [W^-1]_mm).
enum class NoiseUpdate { AsWritten, Standard };

struct SblDiagnostics {
    bool xi_held = false;      // noise update skipped by the positivity guard
    bool regularized = false;  // precision matrix needed a diagonal bump
};

/// Subtracts the re-modulated communication echo from the frame and stacks
/// the symbol-scaled imaging rows.
ImagingSystem build_residual(const SceneConfig& cfg, const PhaseSchedule& sched,
                             const ReceivedFrame& rx, const SymbolFrame& x_hat);

/// One pass of the adaptive SBL updates (posterior solve, precision update,
/// adaptive shape, noise estimate).
SparseEstimate sbl_step(const ImagingSystem& sys, const SparseEstimate& est,
                        double gamma_rate, NoiseUpdate noise_update = NoiseUpdate::AsWritten,
                        SblDiagnostics* diag = nullptr);

/// Iterates sbl_step until the relative change of sigma drops below tol or
/// max_iters passes; sets the converged flag accordingly.
SparseEstimate run_sbl(const ImagingSystem& sys, const SparseEstimate& init, int max_iters,
                       double tol, double gamma_rate,
                       NoiseUpdate noise_update = NoiseUpdate::AsWritten);

/// Default initial state: unit precisions, epsilon 1e-3, noise estimate set
/// to the sample variance of the residual.
SparseEstimate default_sbl_init(const ImagingSystem& sys);

}  // namespace risim

#endif

#include "risim/sbl.hpp"

#include <cmath>
#include <stdexcept>

namespace risim {

namespace {

struct GramCache {
    CMat gram;    // G^H G
    CVec g_h_h;   // G^H h
};

GramCache make_gram(const ImagingSystem& sys) {
    GramCache cache;
    cache.gram.noalias() = sys.matrix.adjoint() * sys.matrix;
    cache.g_h_h.noalias() = sys.matrix.adjoint() * sys.residual;
    return cache;
}

/// One SBL pass on a cached Gram. rows = number of residual entries (L).
SparseEstimate step_cached(const GramCache& cache, const ImagingSystem& sys,
                           const SparseEstimate& est, double gamma_rate,
                           NoiseUpdate noise_update, SblDiagnostics* diag) {
    const Eigen::Index m = cache.gram.rows();
    const double rows = static_cast<double>(sys.residual.size());

    SparseEstimate next = est;
    CMat w_sigma = cache.gram / est.noise_est;
    w_sigma.diagonal() += est.gamma.cast<Complex>();

    Eigen::LDLT<CMat> solver(w_sigma);
    CMat w_inv = solver.solve(CMat::Identity(m, m));
    if (!w_inv.allFinite()) {
        w_sigma.diagonal().array() += 1e-12;
        solver.compute(w_sigma);
        w_inv = solver.solve(CMat::Identity(m, m));
        if (diag != nullptr) diag->regularized = true;
    }
    next.sigma = w_inv * cache.g_h_h / est.noise_est;

    for (Eigen::Index i = 0; i < m; ++i) {
        const double w_inv_diag = w_inv(i, i).real();
        next.gamma[i] = (2.0 * est.epsilon + 1.0) /
                        (2.0 * gamma_rate + std::norm(next.sigma[i]) + w_inv_diag);
    }

    const double log_of_mean = std::log(next.gamma.mean());
    const double mean_of_log = next.gamma.array().log().mean();
    next.epsilon = 0.5 * std::sqrt(std::max(0.0, log_of_mean - mean_of_log));

    const double resid = (sys.residual - sys.matrix * next.sigma).squaredNorm();
    double denom;
    if (noise_update == NoiseUpdate::AsWritten) {
        denom = rows - next.gamma.sum();
    } else {
        denom = rows;
        for (Eigen::Index i = 0; i < m; ++i)
            denom -= 1.0 - next.gamma[i] * w_inv(i, i).real();
    }
    if (denom > 0.0 && resid > 0.0) {
        next.noise_est = resid / denom;
    } else {
        if (diag != nullptr) diag->xi_held = true;
    }
    return next;
}

}  // namespace

ImagingSystem build_residual(const SceneConfig& cfg, const PhaseSchedule& sched,
                             const ReceivedFrame& rx, const SymbolFrame& x_hat) {
    const int len = cfg.frame_len + cfg.delay;
    if (rx.samples.size() != len)
        throw std::invalid_argument("received frame length must be frame_len+delay");
    if (x_hat.symbols.size() != cfg.frame_len)
        throw std::invalid_argument("symbol estimate length must equal frame_len");
    if (sched.phases.rows() != len || sched.phases.cols() != cfg.n_ris)
        throw std::invalid_argument("schedule shape must be (frame_len+delay) x n_ris");

    const SceneGeometry geom(cfg);
    ImagingSystem sys;
    sys.matrix.resize(cfg.frame_len, cfg.n_pixels);
    sys.residual.resize(cfg.frame_len);
    for (int r = 0; r < cfg.frame_len; ++r) {
        const int t = r + cfg.delay;
        const CVec row = reflected_row(geom, sched.phases.row(t));
        sys.matrix.row(r) = cfg.alpha_i * x_hat.symbols[r] * (row.transpose() * geom.h_i);
        Complex h = rx.samples[t];
        if (t < cfg.frame_len)
            h -= cfg.alpha_c * (row.array() * geom.h_c.array()).sum() * x_hat.symbols[t];
        sys.residual[r] = h;
    }
    return sys;
}

SparseEstimate sbl_step(const ImagingSystem& sys, const SparseEstimate& est,
                        double gamma_rate, NoiseUpdate noise_update, SblDiagnostics* diag) {
    if (est.sigma.size() != sys.matrix.cols() || est.gamma.size() != sys.matrix.cols())
        throw std::invalid_argument("estimate size must match the imaging matrix");
    if (!(est.noise_est > 0.0)) throw std::invalid_argument("noise estimate must be positive");
    return step_cached(make_gram(sys), sys, est, gamma_rate, noise_update, diag);
}

SparseEstimate run_sbl(const ImagingSystem& sys, const SparseEstimate& init, int max_iters,
                       double tol, double gamma_rate, NoiseUpdate noise_update) {
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    const GramCache cache = make_gram(sys);
    SparseEstimate est = init;
    est.converged = false;
    for (int i = 0; i < max_iters; ++i) {
        SparseEstimate next = step_cached(cache, sys, est, gamma_rate, noise_update, nullptr);
        const double denom = std::max(est.sigma.norm(), 1e-12);
        const double change = (next.sigma - est.sigma).norm() / denom;
        est = std::move(next);
        if (change < tol) {
            est.converged = true;
            break;
        }
    }
    return est;
}

SparseEstimate default_sbl_init(const ImagingSystem& sys) {
    SparseEstimate est;
    const Eigen::Index m = sys.matrix.cols();
    est.sigma = CVec::Zero(m);
    est.gamma = Vec::Ones(m);
    est.epsilon = 1e-3;
    const double var = sys.residual.squaredNorm() / std::max<Eigen::Index>(1, sys.residual.size());
    est.noise_est = std::max(var, 1e-12);
    return est;
}

}  // namespace risim

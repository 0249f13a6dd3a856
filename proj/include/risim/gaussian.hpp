#ifndef RISIM_GAUSSIAN_HPP
#define RISIM_GAUSSIAN_HPP

#include <Eigen/Dense>

#include "risim/types.hpp"

namespace risim {

/// Complex scalar Gaussian message in mean/weight form (weight = 1/variance).
/// weight = 0 encodes the uninformative message.
struct ScalarGaussian {
    Complex mean{0.0, 0.0};
    double weight = 0.0;
};

/// Product of two Gaussian densities: weights add, means combine
/// precision-weighted.
inline ScalarGaussian gaussian_product(const ScalarGaussian& a, const ScalarGaussian& b) {
    const double w = a.weight + b.weight;
    if (w <= 0.0) return {};
    return {(a.weight * a.mean + b.weight * b.mean) / w, w};
}

/// Discrete posterior over the four QPSK points under a Gaussian observation
/// message, with its first two moments.
struct MomentStats {
    Complex mean{0.0, 0.0};
    double var = 1.0;
    Eigen::Vector4d probs = Eigen::Vector4d::Constant(0.25);
};

/// Projects (QPSK prior) x (Gaussian message) onto a Gaussian by matching the
/// first two moments of the tilted four-point distribution.
MomentStats moment_match(const ScalarGaussian& msg);

/// Posterior over constellation indices and the hard decision.
struct SymbolBelief {
    Eigen::Vector4d probs = Eigen::Vector4d::Constant(0.25);
    int decided = 1;  // index in {1..4}; ties resolve to the smaller index
};

/// Combines the forward and backward messages into the symbol belief.
SymbolBelief belief_and_decide(const ScalarGaussian& fwd, const ScalarGaussian& bwd);

}  // namespace risim

#endif

#include "risim/gaussian.hpp"

#include <cmath>

namespace risim {

namespace {

/// Normalized exp(-|s_i - mean|^2 * weight) over the constellation, with the
/// peak exponent subtracted before exponentiation.
Eigen::Vector4d tilted_probs(Complex mean, double weight) {
    Eigen::Vector4d expo;
    for (int i = 0; i < 4; ++i) expo[i] = -std::norm(qpsk_point(i + 1) - mean) * weight;
    const double peak = expo.maxCoeff();
    Eigen::Vector4d probs = (expo.array() - peak).exp();
    probs /= probs.sum();
    return probs;
}

}  // namespace

MomentStats moment_match(const ScalarGaussian& msg) {
    if (msg.weight <= 0.0) return {};  // uniform: zero mean, unit energy
    MomentStats out;
    out.probs = tilted_probs(msg.mean, msg.weight);
    out.mean = Complex(0.0, 0.0);
    for (int i = 0; i < 4; ++i)
        out.mean += out.probs[i] * qpsk_point(i + 1);
    out.var = 0.0;
    for (int i = 0; i < 4; ++i)
        out.var += out.probs[i] * std::norm(qpsk_point(i + 1) - out.mean);
    return out;
}

SymbolBelief belief_and_decide(const ScalarGaussian& fwd, const ScalarGaussian& bwd) {
    SymbolBelief belief;
    if (fwd.weight <= 0.0 && bwd.weight <= 0.0) return belief;
    Eigen::Vector4d expo;
    for (int i = 0; i < 4; ++i) {
        const Complex s = qpsk_point(i + 1);
        expo[i] = -std::norm(s - fwd.mean) * fwd.weight - std::norm(s - bwd.mean) * bwd.weight;
    }
    const double peak = expo.maxCoeff();
    belief.probs = (expo.array() - peak).exp();
    belief.probs /= belief.probs.sum();
    Eigen::Index best = 0;
    belief.probs.maxCoeff(&best);
    belief.decided = static_cast<int>(best) + 1;
    return belief;
}

}  // namespace risim

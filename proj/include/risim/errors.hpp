#ifndef RISIM_ERRORS_HPP
#define RISIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace risim {

/// Stage 1 of the phase optimizer ended above the orthogonality threshold.
class InfeasibleStartError : public std::runtime_error {
public:
    InfeasibleStartError(const std::string& msg, double best_metric)
        : std::runtime_error(msg), best_metric_(best_metric) {}
    double best_metric() const { return best_metric_; }

private:
    double best_metric_;
};

/// A message or estimate became non-finite during iterative decoding.
class DecodeFailure : public std::runtime_error {
public:
    DecodeFailure(const std::string& msg, int iteration)
        : std::runtime_error(msg), iteration_(iteration) {}
    int iteration() const { return iteration_; }

private:
    int iteration_;
};

/// A requested CNR/INR operating point cannot be met by the free parameters.
class InfeasibleTargetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace risim

#endif

#ifndef RISIM_TYPES_HPP
#define RISIM_TYPES_HPP

#include <array>
#include <complex>

#include <Eigen/Dense>

namespace risim {

using Real = double;
using Complex = std::complex<double>;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// QPSK constellation point for index i in {1,2,3,4}: exp(j(pi/2*i - pi/4)).
inline Complex qpsk_point(int i) {
    static const std::array<Complex, 4> pts = {
        std::polar(1.0, kPi / 2.0 * 1 - kPi / 4.0),
        std::polar(1.0, kPi / 2.0 * 2 - kPi / 4.0),
        std::polar(1.0, kPi / 2.0 * 3 - kPi / 4.0),
        std::polar(1.0, kPi / 2.0 * 4 - kPi / 4.0),
    };
    return pts[static_cast<std::size_t>(i - 1)];
}

/// Index in {1,2,3,4} of the constellation point nearest to z.
/// Equidistant cases resolve to the smaller index.
inline int qpsk_index(Complex z) {
    int best = 1;
    double best_d = std::norm(z - qpsk_point(1));
    for (int i = 2; i <= 4; ++i) {
        const double d = std::norm(z - qpsk_point(i));
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace risim

#endif

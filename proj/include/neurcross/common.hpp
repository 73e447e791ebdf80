#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace neurcross {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kHalfPi = 0.5 * std::numbers::pi;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Symmetric 3x3 storage order used by every Hessian jet: xx, yy, zz, xy, xz, yz.
inline constexpr int kSymRow[6] = {0, 1, 2, 0, 0, 1};
inline constexpr int kSymCol[6] = {0, 1, 2, 1, 2, 2};

inline Mat3 sym_to_mat(const double* h)
{
    Mat3 m;
    m << h[0], h[3], h[4],
         h[3], h[1], h[5],
         h[4], h[5], h[2];
    return m;
}

// Gradient of a scalar w.r.t. the six stored entries, given its gradient
// w.r.t. the full (not necessarily symmetric) matrix.
inline void mat_grad_to_sym(const Mat3& g, double* out)
{
    out[0] = g(0, 0);
    out[1] = g(1, 1);
    out[2] = g(2, 2);
    out[3] = g(0, 1) + g(1, 0);
    out[4] = g(0, 2) + g(2, 0);
    out[5] = g(1, 2) + g(2, 1);
}

// Deterministic 64-bit mixing used to derive per-iteration seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t z = a * 0x9E3779B97F4A7C15ull + b + 0x632BE59BD9B4E019ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace neurcross

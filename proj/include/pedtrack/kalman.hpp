#pragma once

#include <array>
#include <stdexcept>

#include "pedtrack/core.hpp"

namespace pedtrack {

// Row-major fixed-size matrices; large enough for the 4-state filter.
using Vec2 = std::array<double, 2>;
using Vec4 = std::array<double, 4>;
using Mat2 = std::array<double, 4>;
using Mat2x4 = std::array<double, 8>;
using Mat4x2 = std::array<double, 8>;
using Mat4 = std::array<double, 16>;

class SingularInnovationError : public std::runtime_error {
public:
    SingularInnovationError()
        : std::runtime_error("kalman: innovation covariance is singular") {}
};

// State [x, y, dx, dy] with error covariance P.
struct KalmanState {
    Vec4 x{0.0, 0.0, 0.0, 0.0};
    Mat4 p{};
};

Mat4 identity4(double scale = 1.0);
Mat2 identity2(double scale = 1.0);

// Constant-velocity system, one frame per step. The control conversion B is
// kept for completeness; tracks pass u = 0.
struct KalmanParams {
    Mat4 a = {1, 0, 1, 0,
              0, 1, 0, 1,
              0, 0, 1, 0,
              0, 0, 0, 1};
    Mat4 b = identity4();
    Mat2x4 h = {1, 0, 0, 0,
                0, 1, 0, 0};
    Mat4 q = identity4();   // process noise
    Mat2 r = identity2();   // measurement noise
};

// x' = A x + B u;  P' = A P A^T + Q.
KalmanState predict(const KalmanState& state, const KalmanParams& params,
                    const Vec4& u = {0.0, 0.0, 0.0, 0.0});

// K = P H^T (H P H^T + R)^-1 via direct 2x2 inversion.
Mat4x2 gain(const Mat4& p, const Mat2x4& h, const Mat2& r);

// x = x + K (z - H x);  P = (I - K H) P, re-symmetrized against drift.
KalmanState update(const KalmanState& state, const KalmanParams& params,
                   const Vec2& z);

}   // namespace pedtrack

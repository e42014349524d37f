#include "pedtrack/kalman.hpp"

#include <cmath>

namespace pedtrack {

namespace {

constexpr double kSingularDeterminant = 1e-12;

Vec4 mul4(const Mat4& m, const Vec4& v)
{
    Vec4 out{};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            out[r] += m[r * 4 + c] * v[c];
    return out;
}

Mat4 mul44(const Mat4& a, const Mat4& b)
{
    Mat4 out{};
    for (int r = 0; r < 4; ++r)
        for (int k = 0; k < 4; ++k) {
            const double v = a[r * 4 + k];
            for (int c = 0; c < 4; ++c)
                out[r * 4 + c] += v * b[k * 4 + c];
        }
    return out;
}

Mat4 transpose4(const Mat4& m)
{
    Mat4 out;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            out[c * 4 + r] = m[r * 4 + c];
    return out;
}

void symmetrize(Mat4& m)
{
    for (int r = 0; r < 4; ++r)
        for (int c = r + 1; c < 4; ++c) {
            const double v = 0.5 * (m[r * 4 + c] + m[c * 4 + r]);
            m[r * 4 + c] = v;
            m[c * 4 + r] = v;
        }
}

}   // namespace

Mat4 identity4(double scale)
{
    Mat4 m{};
    for (int i = 0; i < 4; ++i)
        m[i * 4 + i] = scale;
    return m;
}

Mat2 identity2(double scale)
{
    return {scale, 0.0, 0.0, scale};
}

KalmanState predict(const KalmanState& state, const KalmanParams& params, const Vec4& u)
{
    KalmanState out;
    const Vec4 ax = mul4(params.a, state.x);
    const Vec4 bu = mul4(params.b, u);
    for (int i = 0; i < 4; ++i)
        out.x[i] = ax[i] + bu[i];

    out.p = mul44(mul44(params.a, state.p), transpose4(params.a));
    for (int i = 0; i < 16; ++i)
        out.p[i] += params.q[i];
    symmetrize(out.p);
    return out;
}

Mat4x2 gain(const Mat4& p, const Mat2x4& h, const Mat2& r)
{
    // P H^T — 4x2
    Mat4x2 pht{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 4; ++k)
                pht[i * 2 + j] += p[i * 4 + k] * h[j * 4 + k];

    // S = H P H^T + R — 2x2
    Mat2 s = r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 4; ++k)
                s[i * 2 + j] += h[i * 4 + k] * pht[k * 2 + j];

    const double det = s[0] * s[3] - s[1] * s[2];
    if (std::abs(det) < kSingularDeterminant)
        throw SingularInnovationError();
    const Mat2 sinv = {s[3] / det, -s[1] / det, -s[2] / det, s[0] / det};

    Mat4x2 k{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j)
            for (int m = 0; m < 2; ++m)
                k[i * 2 + j] += pht[i * 2 + m] * sinv[m * 2 + j];
    return k;
}

KalmanState update(const KalmanState& state, const KalmanParams& params, const Vec2& z)
{
    const Mat4x2 k = gain(state.p, params.h, params.r);

    Vec2 innovation{};
    for (int i = 0; i < 2; ++i) {
        double hx = 0.0;
        for (int j = 0; j < 4; ++j)
            hx += params.h[i * 4 + j] * state.x[j];
        innovation[i] = z[i] - hx;
    }

    KalmanState out = state;
    for (int i = 0; i < 4; ++i)
        out.x[i] += k[i * 2 + 0] * innovation[0] + k[i * 2 + 1] * innovation[1];

    Mat4 ikh = identity4();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int m = 0; m < 2; ++m)
                ikh[i * 4 + j] -= k[i * 2 + m] * params.h[m * 4 + j];
    out.p = mul44(ikh, state.p);
    symmetrize(out.p);
    return out;
}

}   // namespace pedtrack

#include "subgcache/kernels.hpp"

#include <cmath>

namespace subgcache::kernels {
namespace {

using namespace detail;

float dot_scalar(const float* a, const float* b, size_t n) {
    float acc = 0.0f;
    for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(float* y, float alpha, const float* x, size_t n) {
    // fmaf keeps this bit-identical with the AVX2 fmadd path
    for (size_t i = 0; i < n; ++i) y[i] = std::fmaf(alpha, x[i], y[i]);
}

void add_scalar(float* y, const float* x, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += x[i];
}

void scale_scalar(float* y, float alpha, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] *= alpha;
}

void matvec_scalar(const float* w, const float* x, float* y, size_t rows, size_t cols) {
    for (size_t r = 0; r < rows; ++r) y[r] = dot_scalar(w + r * cols, x, cols);
}

float reduce_max_scalar(const float* x, size_t n) {
    float m = x[0];
    for (size_t i = 1; i < n; ++i) m = x[i] > m ? x[i] : m;
    return m;
}

// Mirrors the AVX2 polynomial exactly: same operations, same order, FMA via
// std::fmaf (correctly rounded), so each element matches the vector lane bit
// for bit.
float expf_poly(float x) {
    x = x > kExpHi ? kExpHi : x;
    x = x < kExpLo ? kExpLo : x;
    float fx = std::fmaf(x, kLog2E, 0.5f);
    fx = std::floor(fx);
    x = std::fmaf(fx, -kLn2Hi, x);
    x = std::fmaf(fx, -kLn2Lo, x);
    float z = x * x;
    float y = kExpP0;
    y = std::fmaf(y, x, kExpP1);
    y = std::fmaf(y, x, kExpP2);
    y = std::fmaf(y, x, kExpP3);
    y = std::fmaf(y, x, kExpP4);
    y = std::fmaf(y, x, kExpP5);
    y = std::fmaf(y, z, x);
    y += 1.0f;
    int n = static_cast<int>(fx);
    float pow2n;
    union { int i; float f; } bits;
    bits.i = (n + 127) << 23;
    pow2n = bits.f;
    return y * pow2n;
}

float exp_inplace_scalar(float* x, size_t n) {
    float sum = 0.0f;
    for (size_t i = 0; i < n; ++i) {
        x[i] = expf_poly(x[i]);
        sum += x[i];
    }
    return sum;
}

void tanh_inplace_scalar(float* x, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        float v = x[i];
        v = v > kTanhClamp ? kTanhClamp : (v < -kTanhClamp ? -kTanhClamp : v);
        float e = expf_poly(2.0f * v);
        x[i] = (e - 1.0f) / (e + 1.0f);
    }
}

const Backend kScalar = {
    "scalar",         dot_scalar,  axpy_scalar,        add_scalar,
    scale_scalar,     matvec_scalar, reduce_max_scalar, exp_inplace_scalar,
    tanh_inplace_scalar,
};

}  // namespace

const Backend& scalar_backend() { return kScalar; }

}  // namespace subgcache::kernels

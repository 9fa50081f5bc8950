#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel float kernels used by the LM forward pass. Every kernel has
// a scalar reference implementation and, on x86-64 with AVX2+FMA, a vector
// variant. The active backend is chosen once at runtime (cpuid), and can be
// forced for testing. Elementwise kernels (exp, tanh) produce bit-identical
// results across backends because both paths evaluate the same FMA-based
// polynomial; reduction kernels (dot, sums) differ only in accumulation
// order and are equivalence-tested under a small tolerance.

namespace subgcache::kernels {

struct Backend {
    std::string_view name;

    // sum_i a[i]*b[i]
    float (*dot)(const float* a, const float* b, size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(float* y, float alpha, const float* x, size_t n);
    // y[i] += x[i]
    void (*add)(float* y, const float* x, size_t n);
    // y[i] *= alpha
    void (*scale)(float* y, float alpha, size_t n);
    // y[r] = dot(w + r*cols, x, cols); w is row-major rows x cols
    void (*matvec)(const float* w, const float* x, float* y, size_t rows, size_t cols);
    float (*reduce_max)(const float* x, size_t n);
    // x[i] = exp(x[i]); returns sum of the results
    float (*exp_inplace)(float* x, size_t n);
    void (*tanh_inplace)(float* x, size_t n);
};

const Backend& scalar_backend();
#if defined(SUBGCACHE_HAVE_AVX2)
const Backend& avx2_backend();
bool avx2_supported();
#endif

// Active backend. Defaults to the best supported one; first call locks it in.
const Backend& active();

// Force "scalar", "avx2" or "auto" before first use (or to switch in tests).
// Throws DomainError for unknown/unsupported names.
void force_backend(std::string_view name);

namespace detail {

// Cephes-style expf constants, shared by the scalar and AVX2 paths so they
// round identically per element.
inline constexpr float kExpHi = 88.3762626647950f;
inline constexpr float kExpLo = -88.3762626647949f;
inline constexpr float kLog2E = 1.44269504088896341f;
inline constexpr float kLn2Hi = 0.693359375f;
inline constexpr float kLn2Lo = -2.12194440e-4f;
inline constexpr float kExpP0 = 1.9875691500e-4f;
inline constexpr float kExpP1 = 1.3981999507e-3f;
inline constexpr float kExpP2 = 8.3334519073e-3f;
inline constexpr float kExpP3 = 4.1665795894e-2f;
inline constexpr float kExpP4 = 1.6666665459e-1f;
inline constexpr float kExpP5 = 5.0000001201e-1f;
// tanh saturates well before |x| = 9 in float.
inline constexpr float kTanhClamp = 9.0f;

}  // namespace detail

}  // namespace subgcache::kernels

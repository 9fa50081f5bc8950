#include "subgcache/kernels.hpp"

#include <immintrin.h>

namespace subgcache::kernels {
namespace {

using namespace detail;

inline float hsum8(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 sh = _mm_movehl_ps(lo, lo);
    lo = _mm_add_ps(lo, sh);
    sh = _mm_shuffle_ps(lo, lo, 0x1);
    lo = _mm_add_ss(lo, sh);
    return _mm_cvtss_f32(lo);
}

float dot_avx2(const float* a, const float* b, size_t n) {
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
    }
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    }
    float sum = hsum8(_mm256_add_ps(acc0, acc1));
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void axpy_avx2(float* y, float alpha, const float* x, size_t n) {
    __m256 va = _mm256_set1_ps(alpha);
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 vy = _mm256_loadu_ps(y + i);
        vy = _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), vy);
        _mm256_storeu_ps(y + i, vy);
    }
    for (; i < n; ++i) y[i] = __builtin_fmaf(alpha, x[i], y[i]);
}

void add_avx2(float* y, const float* x, size_t n) {
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), _mm256_loadu_ps(x + i)));
    }
    for (; i < n; ++i) y[i] += x[i];
}

void scale_avx2(float* y, float alpha, size_t n) {
    __m256 va = _mm256_set1_ps(alpha);
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(y + i, _mm256_mul_ps(_mm256_loadu_ps(y + i), va));
    }
    for (; i < n; ++i) y[i] *= alpha;
}

void matvec_avx2(const float* w, const float* x, float* y, size_t rows, size_t cols) {
    for (size_t r = 0; r < rows; ++r) y[r] = dot_avx2(w + r * cols, x, cols);
}

float reduce_max_avx2(const float* x, size_t n) {
    float m = x[0];
    size_t i = 0;
    if (n >= 8) {
        __m256 vm = _mm256_loadu_ps(x);
        for (i = 8; i + 8 <= n; i += 8) vm = _mm256_max_ps(vm, _mm256_loadu_ps(x + i));
        __m128 lo = _mm_max_ps(_mm256_castps256_ps128(vm), _mm256_extractf128_ps(vm, 1));
        lo = _mm_max_ps(lo, _mm_movehl_ps(lo, lo));
        lo = _mm_max_ss(lo, _mm_shuffle_ps(lo, lo, 0x1));
        m = _mm_cvtss_f32(lo);
    }
    for (; i < n; ++i) m = x[i] > m ? x[i] : m;
    return m;
}

// 8-lane counterpart of the scalar expf_poly; identical FMA sequence.
inline __m256 expf_poly8(__m256 x) {
    x = _mm256_min_ps(x, _mm256_set1_ps(kExpHi));
    x = _mm256_max_ps(x, _mm256_set1_ps(kExpLo));
    __m256 fx = _mm256_fmadd_ps(x, _mm256_set1_ps(kLog2E), _mm256_set1_ps(0.5f));
    fx = _mm256_floor_ps(fx);
    x = _mm256_fmadd_ps(fx, _mm256_set1_ps(-kLn2Hi), x);
    x = _mm256_fmadd_ps(fx, _mm256_set1_ps(-kLn2Lo), x);
    __m256 z = _mm256_mul_ps(x, x);
    __m256 y = _mm256_set1_ps(kExpP0);
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(kExpP1));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(kExpP2));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(kExpP3));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(kExpP4));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(kExpP5));
    y = _mm256_fmadd_ps(y, z, x);
    y = _mm256_add_ps(y, _mm256_set1_ps(1.0f));
    __m256i n = _mm256_cvttps_epi32(fx);
    n = _mm256_add_epi32(n, _mm256_set1_epi32(127));
    n = _mm256_slli_epi32(n, 23);
    return _mm256_mul_ps(y, _mm256_castsi256_ps(n));
}

float exp_inplace_avx2(float* x, size_t n) {
    __m256 vsum = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 e = expf_poly8(_mm256_loadu_ps(x + i));
        _mm256_storeu_ps(x + i, e);
        vsum = _mm256_add_ps(vsum, e);
    }
    float sum = hsum8(vsum);
    for (; i < n; ++i) {
        // keep the tail on the shared polynomial so backends agree per element
        __m256 e = expf_poly8(_mm256_set1_ps(x[i]));
        x[i] = _mm_cvtss_f32(_mm256_castps256_ps128(e));
        sum += x[i];
    }
    return sum;
}

inline __m256 tanh_poly8(__m256 v) {
    v = _mm256_min_ps(v, _mm256_set1_ps(kTanhClamp));
    v = _mm256_max_ps(v, _mm256_set1_ps(-kTanhClamp));
    __m256 e = expf_poly8(_mm256_mul_ps(v, _mm256_set1_ps(2.0f)));
    __m256 one = _mm256_set1_ps(1.0f);
    return _mm256_div_ps(_mm256_sub_ps(e, one), _mm256_add_ps(e, one));
}

void tanh_inplace_avx2(float* x, size_t n) {
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(x + i, tanh_poly8(_mm256_loadu_ps(x + i)));
    }
    for (; i < n; ++i) {
        __m256 t = tanh_poly8(_mm256_set1_ps(x[i]));
        x[i] = _mm_cvtss_f32(_mm256_castps256_ps128(t));
    }
}

const Backend kAvx2 = {
    "avx2",      dot_avx2,    axpy_avx2,       add_avx2,
    scale_avx2,  matvec_avx2, reduce_max_avx2, exp_inplace_avx2,
    tanh_inplace_avx2,
};

}  // namespace

const Backend& avx2_backend() { return kAvx2; }

bool avx2_supported() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

}  // namespace subgcache::kernels

// AVX2 variants. This translation unit is compiled with -mavx2; the entry
// points are only reached after the CPUID check in simd.cpp.
#if defined(__x86_64__) || defined(__i386__)

#include "spike/simd.hpp"

#include <immintrin.h>

namespace spike::simd {

namespace {

void axpy_avx2(double a, const double* x, double* y, int len) {
    const __m256d va = _mm256_set1_pd(a);
    int i = 0;
    for (; i + 4 <= len; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        __m256d vx = _mm256_loadu_pd(x + i);
        vy = _mm256_add_pd(vy, _mm256_mul_pd(va, vx));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < len; ++i) y[i] += a * x[i];
}

void scale_avx2(double a, double* x, int len) {
    const __m256d va = _mm256_set1_pd(a);
    int i = 0;
    for (; i + 4 <= len; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < len; ++i) x[i] *= a;
}

double dot_avx2(const double* x, const double* y, int len) {
    __m256d acc = _mm256_setzero_pd();
    int i = 0;
    for (; i + 4 <= len; i += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    alignas(32) double s[4];
    _mm256_store_pd(s, acc);
    for (; i < len; ++i) s[i % 4] += x[i] * y[i];
    return (s[0] + s[2]) + (s[1] + s[3]);
}

const Ops kAvx2{axpy_avx2, scale_avx2, dot_avx2, "avx2"};

} // namespace

const Ops& avx2_ops() { return kAvx2; }

} // namespace spike::simd

#endif

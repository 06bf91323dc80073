#include "spike/simd.hpp"

#include <cstdlib>
#include <cstring>

namespace spike::simd {

namespace {

void axpy_scalar(double a, const double* x, double* y, int len) {
    for (int i = 0; i < len; ++i) y[i] += a * x[i];
}

void scale_scalar(double a, double* x, int len) {
    for (int i = 0; i < len; ++i) x[i] *= a;
}

// Four interleaved partial sums, combined as (s0+s2)+(s1+s3). This matches
// the AVX2 variant's lane order so both produce the same bits.
double dot_scalar(const double* x, const double* y, int len) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    int i = 0;
    for (; i + 4 <= len; i += 4) {
        s0 += x[i + 0] * y[i + 0];
        s1 += x[i + 1] * y[i + 1];
        s2 += x[i + 2] * y[i + 2];
        s3 += x[i + 3] * y[i + 3];
    }
    for (; i < len; ++i) {
        switch (i % 4) {
            case 0: s0 += x[i] * y[i]; break;
            case 1: s1 += x[i] * y[i]; break;
            case 2: s2 += x[i] * y[i]; break;
            default: s3 += x[i] * y[i]; break;
        }
    }
    return (s0 + s2) + (s1 + s3);
}

const Ops kScalar{axpy_scalar, scale_scalar, dot_scalar, "scalar"};

const Ops& pick() {
    if (const char* env = std::getenv("SPIKE_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return kScalar;
#if defined(__x86_64__) || defined(__i386__)
        if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return avx2_ops();
#endif
    }
#if defined(__x86_64__) || defined(__i386__)
    if (avx2_supported()) return avx2_ops();
#endif
    return kScalar;
}

} // namespace

const Ops& scalar_ops() { return kScalar; }

const Ops& ops() {
    static const Ops& chosen = pick();
    return chosen;
}

#if defined(__x86_64__) || defined(__i386__)
bool avx2_supported() {
    static const bool ok = __builtin_cpu_supports("avx2");
    return ok;
}
#endif

} // namespace spike::simd

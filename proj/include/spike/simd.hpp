#pragma once

// Vectorized inner-loop primitives for the band kernels.
//
// Every primitive has a scalar reference implementation and, on x86 with
// AVX2, a vector variant. The active variant is chosen once at startup from
// CPUID (override with SPIKE_SIMD=scalar|avx2). All variants are written to
// produce bit-identical results:
//   - axpy/scale are element-wise with plain mul/add (no FMA contraction,
//     the library is built with -ffp-contract=off),
//   - dot accumulates into four interleaved partial sums combined in a fixed
//     order, which the scalar reference reproduces exactly.

namespace spike::simd {

struct Ops {
    // y[0..len) += a * x[0..len)
    void (*axpy)(double a, const double* x, double* y, int len);
    // x[0..len) *= a
    void (*scale)(double a, double* x, int len);
    // sum of x[i]*y[i], lane-partitioned accumulation order
    double (*dot)(const double* x, const double* y, int len);
    const char* name;
};

// Active implementation (dispatch decided on first use).
const Ops& ops();

// Individual variants, exposed so equivalence tests can compare them.
const Ops& scalar_ops();
#if defined(__x86_64__) || defined(__i386__)
bool avx2_supported();
const Ops& avx2_ops();
#endif

inline void axpy(double a, const double* x, double* y, int len) { ops().axpy(a, x, y, len); }
inline void scale(double a, double* x, int len) { ops().scale(a, x, len); }
inline double dot(const double* x, const double* y, int len) { return ops().dot(x, y, len); }

} // namespace spike::simd

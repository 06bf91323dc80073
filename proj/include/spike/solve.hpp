#pragma once

#include "spike/factorize.hpp"

namespace spike {

/// Per-call instrumentation. partition_full_sweeps counts full-sweep units
/// per partition (a concurrent pair of half-sweeps on a dual partition is
/// one unit); reduced_coupling_solves counts 2k-by-2k solves, which is
/// always p-1 per reduced pass.
struct SolveStats {
    std::vector<long> partition_full_sweeps;
    long reduced_coupling_solves = 0;

    long total_full_sweeps() const {
        long s = 0;
        for (long v : partition_full_sweeps) s += v;
        return s;
    }
};

/// Forward solve A X = F on an immutable factorization. Re-entrant.
DenseBlock solve(const SpikeFactorization& fact, const DenseBlock& f,
                 SolveStats* stats = nullptr);

/// Transpose solve A^T X = F reusing the same factorization (no additional
/// factor-stage work).
DenseBlock transpose_solve(const SpikeFactorization& fact, const DenseBlock& f,
                           SolveStats* stats = nullptr);

/// Reduced-system solves over a 2pk tip block (partition i's top tip at rows
/// [2ik, 2ik+k), bottom tip below it).
DenseBlock reduced_solve(const ReducedLevels& levels, const DenseBlock& ytips,
                         long* coupling_solves = nullptr, int threads = 1);
DenseBlock reduced_solve_transpose(const ReducedLevels& levels, const DenseBlock& gtips,
                                   long* coupling_solves = nullptr, int threads = 1);

struct RefineResult {
    DenseBlock x;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    bool stagnated = false;
};

/// Classic residual-correction refinement on top of a (possibly boosted)
/// factorization. Stops at tol, max_iters, or when the residual shrinks by
/// less than 1.1x between iterations (reported as stagnation).
RefineResult iterative_refine(const SpikeFactorization& fact, const BandedMatrix& a,
                              const DenseBlock& f, const DenseBlock& x0, int max_iters,
                              double tol, bool transpose = false);

} // namespace spike

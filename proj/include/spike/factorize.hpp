#pragma once

#include "spike/banded_matrix.hpp"
#include "spike/kernels.hpp"
#include "spike/partition.hpp"
#include "spike/spike2x2.hpp"

#include <variant>
#include <vector>

namespace spike {

struct FactorOptions {
    bool pivoting = false;
    double boost_eps = default_boost_eps();
};

/// Recursive reduced-system hierarchy over the 2pk tip space.
///
/// Level l groups 2^l original partitions into units of 2^(l+1)*k tip rows.
/// Each pair of adjacent units owns a factored 2k coupling block
/// [[I, V_left_bottom],[W_right_top, I]]; the next level's spike columns are
/// the pair-solves of the right unit's V and the left unit's W. The final
/// level holds exactly one coupling block, and a solve performs one
/// 2k-by-2k coupling solve per partition interface (p-1 of them).
struct ReducedLevels {
    int p = 1, k = 0;
    std::vector<std::vector<DenseBlock>> v, w; // [level][unit] spike columns
    std::vector<std::vector<LUFactors>> pairs; // [level][pair] coupling blocks
    int boost_warnings = 0;

    int levels() const { return static_cast<int>(pairs.size()); }
    int unit_rows(int level) const { return (2 * k) << level; }

    /// In-place two-unit solve on z (2*unit_rows(level) tip rows).
    void pair_solve(int level, int a, MatView z) const;
    void pair_solve_transpose(int level, int a, MatView z) const;
};

/// Builds the reduced hierarchy from per-partition tip blocks. vt/vb index
/// partitions 0..p-2 (tips of V_i), wt/wb index 1..p-1 (tips of W_i); the
/// never-formed corners vt[0] and wb[p-1] are zero blocks in the library
/// path, but any values are handled. Singular coupling blocks fall back to
/// a boosted factorization and bump boost_warnings.
ReducedLevels reduce_factorize(const std::vector<DenseBlock>& vt,
                               const std::vector<DenseBlock>& vb,
                               const std::vector<DenseBlock>& wt,
                               const std::vector<DenseBlock>& wb, int p, int k,
                               double boost_eps = default_boost_eps(), int threads = 1);

/// Immutable SPIKE DS factorization: the plan, per-partition factors (LU for
/// all but the last partition, UL there, the 2x2 kernel on dual-thread
/// partitions), the k-by-k corner blocks and spike tips, and the recursive
/// reduced levels. Safe to share across any number of concurrent forward and
/// transpose solves.
struct SpikeFactorization {
    using PartitionFactors = std::variant<LUFactors, ULFactors, Spike2x2Factors>;

    PartitionPlan plan;
    int n = 0, kl = 0, ku = 0, k = 0; // k = max(kl, ku) tip size
    FactorOptions options;
    std::vector<PartitionFactors> factors;  // per partition
    std::vector<DenseBlock> bhat, chat;     // corner blocks; bhat[i] couples i -> i+1
    std::vector<DenseBlock> vt, vb, wt, wb; // k-by-k spike tips (zero where never formed)
    ReducedLevels levels;
    std::vector<long> factor_sweeps; // per-partition full-sweep units
    int boost_count = 0;

    int p() const { return plan.p; }
    const LUFactors& lu(int i) const { return std::get<LUFactors>(factors[i]); }
    const ULFactors& ul(int i) const { return std::get<ULFactors>(factors[i]); }
    const Spike2x2Factors& dual(int i) const { return std::get<Spike2x2Factors>(factors[i]); }
    bool is_dual(int i) const { return plan.kinds[i] == PartitionKind::InnerDual; }
};

SpikeFactorization factorize(const BandedMatrix& a, const PartitionPlan& plan,
                             FactorOptions opts = {});

} // namespace spike

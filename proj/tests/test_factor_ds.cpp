#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spike/band_ops.hpp"
#include "spike/factorize.hpp"
#include "spike/generate.hpp"
#include "spike/oracle.hpp"
#include "spike/solve.hpp"
#include "test_util.hpp"

#include <random>

using namespace spike;

namespace {

std::vector<DenseBlock> random_tip_set(int p, int k, std::mt19937_64& rng) {
    std::vector<DenseBlock> tips(p);
    for (int i = 0; i < p; ++i) tips[i] = random_block(k, k, RngSeed{rng()});
    return tips;
}

// Dense 2pk x 2pk reduced matrix in the tip layout: identity plus the V tips
// coupling each partition to its right neighbour's top block and the W tips
// to its left neighbour's bottom block.
DenseBlock assemble_reduced(const std::vector<DenseBlock>& vt, const std::vector<DenseBlock>& vb,
                            const std::vector<DenseBlock>& wt, const std::vector<DenseBlock>& wb,
                            int p, int k) {
    DenseBlock s(2 * p * k, 2 * p * k);
    for (int i = 0; i < 2 * p * k; ++i) s.at(i, i) = 1.0;
    for (int i = 0; i < p; ++i) {
        const int rt = 2 * i * k, rb = (2 * i + 1) * k;
        if (i + 1 < p) {
            const int cv = 2 * (i + 1) * k;
            for (int c = 0; c < k; ++c)
                for (int r = 0; r < k; ++r) {
                    s.at(rt + r, cv + c) = vt[i].at(r, c);
                    s.at(rb + r, cv + c) = vb[i].at(r, c);
                }
        }
        if (i > 0) {
            const int cw = (2 * (i - 1) + 1) * k;
            for (int c = 0; c < k; ++c)
                for (int r = 0; r < k; ++r) {
                    s.at(rt + r, cw + c) = wt[i].at(r, c);
                    s.at(rb + r, cw + c) = wb[i].at(r, c);
                }
        }
    }
    return s;
}

// Dense spike matrix of hierarchy level l: identity plus the stored level-l
// spike columns in their tip-space positions.
DenseBlock assemble_level(const ReducedLevels& rl, int l) {
    const int n = 2 * rl.p * rl.k;
    const int h = rl.unit_rows(l);
    const int units = rl.p >> l;
    DenseBlock s(n, n);
    for (int i = 0; i < n; ++i) s.at(i, i) = 1.0;
    for (int j = 0; j < units; ++j) {
        if (j + 1 < units && rl.v[l][j].rows > 0)
            for (int c = 0; c < rl.k; ++c)
                for (int r = 0; r < h; ++r) s.at(j * h + r, (j + 1) * h + c) += rl.v[l][j].at(r, c);
        if (j > 0 && rl.w[l][j].rows > 0)
            for (int c = 0; c < rl.k; ++c)
                for (int r = 0; r < h; ++r) s.at(j * h + r, j * h - rl.k + c) += rl.w[l][j].at(r, c);
    }
    return s;
}

// Dense block-diagonal factor of level l: only the couplings internal to
// each pair of units.
DenseBlock assemble_level_diag(const ReducedLevels& rl, int l) {
    const int n = 2 * rl.p * rl.k;
    const int h = rl.unit_rows(l);
    const int npairs = (rl.p >> l) / 2;
    DenseBlock d(n, n);
    for (int i = 0; i < n; ++i) d.at(i, i) = 1.0;
    for (int a = 0; a < npairs; ++a) {
        const int lo = 2 * a * h;
        const DenseBlock& vl = rl.v[l][2 * a];
        const DenseBlock& wr = rl.w[l][2 * a + 1];
        for (int c = 0; c < rl.k; ++c)
            for (int r = 0; r < h; ++r) {
                d.at(lo + r, lo + h + c) += vl.at(r, c);
                d.at(lo + h + r, lo + h - rl.k + c) += wr.at(r, c);
            }
    }
    return d;
}

bool blocks_equal(const std::vector<DenseBlock>& a, const std::vector<DenseBlock>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].data != b[i].data) return false;
    return true;
}

} // namespace

TEST_CASE("factorize identity: all tips zero, reduced blocks trivial") {
    BandedMatrix a(64, 2, 2);
    for (int i = 0; i < 64; ++i) a.set(i, i, 1.0);
    for (int t : {2, 4, 6}) {
        PartitionPlan plan = make_plan(64, 2, 2, t, 1.0, 2.0);
        SpikeFactorization fact = factorize(a, plan);
        for (int i = 0; i < fact.p(); ++i) {
            CHECK(testutil::max_abs(fact.vt[i]) == 0.0);
            CHECK(testutil::max_abs(fact.vb[i]) == 0.0);
            CHECK(testutil::max_abs(fact.wt[i]) == 0.0);
            CHECK(testutil::max_abs(fact.wb[i]) == 0.0);
        }
        for (const auto& level : fact.levels.pairs)
            for (const auto& block : level)
                for (int i = 0; i < 2 * fact.k; ++i)
                    CHECK(block.uval(i, i) == 1.0);
        DenseBlock f = random_block(64, 2, RngSeed{3});
        CHECK(testutil::max_abs_diff(solve(fact, f), f) == 0.0);
    }
}

TEST_CASE("factorize: matrix decoupled at partition boundaries has zero tips") {
    const int n = 80, k = 2;
    PartitionPlan plan = make_plan(n, k, k, 4, 1.0, 2.0);
    BandedMatrix a = generate_banded(n, k, k, 1.5, RngSeed{5});
    for (int b = 1; b < plan.p; ++b) {
        const int row = plan.bounds[b];
        for (int j = row - k; j < row + k; ++j)
            for (int i = std::max(0, j - k); i <= std::min(n - 1, j + k); ++i)
                if ((i < row) != (j < row)) a.set(i, j, 0.0);
    }
    SpikeFactorization fact = factorize(a, plan);
    for (int i = 0; i < fact.p(); ++i) {
        CHECK(testutil::max_abs(fact.vb[i]) == 0.0);
        CHECK(testutil::max_abs(fact.wt[i]) == 0.0);
    }
    DenseBlock f = random_block(n, 2, RngSeed{7});
    CHECK(testutil::rel_componentwise(solve(fact, f), oracle_solve(a, f)) < 1e-12);
}

TEST_CASE("factorize: tips match per-partition oracle spikes") {
    const int n = 96, k = 2;
    BandedMatrix a = generate_banded(n, k, k, 1.5, RngSeed{11});
    for (int t : {4, 6}) {
        PartitionPlan plan = make_plan(n, k, k, t, 1.0, 2.0);
        REQUIRE(plan.p == 4);
        SpikeFactorization fact = factorize(a, plan);
        for (int i = 0; i < 4; ++i) {
            const int r0 = plan.bounds[i], m = plan.size(i);
            BandedMatrix sub = testutil::band_submatrix(a, r0, m);
            if (i + 1 < 4) {
                DenseBlock rhs(m, k);
                for (int c = 0; c < k; ++c)
                    for (int r = 0; r < k; ++r) rhs.at(m - k + r, c) = fact.bhat[i].at(r, c);
                DenseBlock vfull = oracle_solve(sub, rhs);
                for (int c = 0; c < k; ++c)
                    for (int r = 0; r < k; ++r) {
                        if (i > 0)
                            CHECK(fact.vt[i].at(r, c) ==
                                  doctest::Approx(vfull.at(r, c)).epsilon(1e-12));
                        CHECK(fact.vb[i].at(r, c) ==
                              doctest::Approx(vfull.at(m - k + r, c)).epsilon(1e-12));
                    }
            }
            if (i > 0) {
                DenseBlock rhs(m, k);
                for (int c = 0; c < k; ++c)
                    for (int r = 0; r < k; ++r) rhs.at(r, c) = fact.chat[i].at(r, c);
                DenseBlock wfull = oracle_solve(sub, rhs);
                for (int c = 0; c < k; ++c)
                    for (int r = 0; r < k; ++r) {
                        CHECK(fact.wt[i].at(r, c) ==
                              doctest::Approx(wfull.at(r, c)).epsilon(1e-12));
                        if (i + 1 < 4)
                            CHECK(fact.wb[i].at(r, c) ==
                                  doctest::Approx(wfull.at(m - k + r, c)).epsilon(1e-12));
                    }
            }
        }
    }
}

TEST_CASE("DS identity at desk scale: densified D*S equals A") {
    for (int p : {2, 4}) {
        const int n = 64, k = 2;
        BandedMatrix a = generate_banded(n, k, k, 1.5, RngSeed{13});
        PartitionPlan plan = make_plan(n, k, k, p, 1.0, 2.0);
        REQUIRE(plan.p == p);

        // full spikes from the oracle (test-only; the library keeps tips)
        DenseBlock s(n, n);
        for (int i = 0; i < n; ++i) s.at(i, i) = 1.0;
        DenseBlock d(n, n);
        for (int i = 0; i < p; ++i) {
            const int r0 = plan.bounds[i], m = plan.size(i);
            BandedMatrix sub = testutil::band_submatrix(a, r0, m);
            for (int jj = 0; jj < m; ++jj)
                for (int ii = 0; ii < m; ++ii) d.at(r0 + ii, r0 + jj) = sub.at(ii, jj);
            if (i + 1 < p) {
                DenseBlock rhs(m, k);
                for (int c = 0; c < k; ++c)
                    for (int r = 0; r < k; ++r)
                        rhs.at(m - k + r, c) = band_corner(a, r0 + m - k, r0 + m, k, k).at(r, c);
                DenseBlock v = oracle_solve(sub, rhs);
                for (int c = 0; c < k; ++c)
                    for (int r = 0; r < m; ++r) s.at(r0 + r, plan.bounds[i + 1] + c) = v.at(r, c);
            }
            if (i > 0) {
                DenseBlock rhs(m, k);
                for (int c = 0; c < k; ++c)
                    for (int r = 0; r < k; ++r)
                        rhs.at(r, c) = band_corner(a, r0, r0 - k, k, k).at(r, c);
                DenseBlock w = oracle_solve(sub, rhs);
                for (int c = 0; c < k; ++c)
                    for (int r = 0; r < m; ++r) s.at(r0 + r, plan.bounds[i] - k + c) = w.at(r, c);
            }
        }
        DenseBlock ds = testutil::dense_matmul(d, s);
        CHECK(testutil::max_abs_diff(ds, testutil::densify(a)) / testutil::max_abs(ds) < 1e-12);
    }
}

TEST_CASE("reduce_factorize base case p=2: one coupling block, no recursion") {
    std::mt19937_64 rng(17);
    const int k = 2;
    auto vt = random_tip_set(2, k, rng), vb = random_tip_set(2, k, rng);
    auto wt = random_tip_set(2, k, rng), wb = random_tip_set(2, k, rng);
    ReducedLevels rl = reduce_factorize(vt, vb, wt, wb, 2, k);
    CHECK(rl.levels() == 1);
    CHECK(rl.pairs[0].size() == 1);
    // coupling is [[I, vb0],[wt1, I]]; spot-check by solving against dense
    DenseBlock red = assemble_reduced(vt, vb, wt, wb, 2, k);
    DenseBlock y = random_block(4 * k, 3, RngSeed{rng()});
    DenseBlock x = reduced_solve(rl, y);
    CHECK(testutil::rel_componentwise(x, testutil::dense_solve(red, y)) < 1e-13);
}

TEST_CASE("reduce_factorize: all-zero tips give identity levels") {
    const int p = 4, k = 2;
    std::vector<DenseBlock> zero(p, DenseBlock(k, k));
    ReducedLevels rl = reduce_factorize(zero, zero, zero, zero, p, k);
    for (int l = 0; l < rl.levels(); ++l)
        for (const auto& pr : rl.pairs[l])
            for (int i = 0; i < 2 * k; ++i) CHECK(pr.uval(i, i) == 1.0);
    for (int l = 1; l < rl.levels(); ++l)
        for (const auto& col : rl.v[l])
            if (col.rows > 0) CHECK(testutil::max_abs(col) == 0.0);
    DenseBlock y = random_block(2 * p * k, 2, RngSeed{19});
    CHECK(testutil::max_abs_diff(reduced_solve(rl, y), y) == 0.0);
}

TEST_CASE("reduce_factorize p=4: assembled S(0) equals D(0) * S(1)") {
    std::mt19937_64 rng(23);
    for (int k : {1, 2}) {
        auto vt = random_tip_set(4, k, rng), vb = random_tip_set(4, k, rng);
        auto wt = random_tip_set(4, k, rng), wb = random_tip_set(4, k, rng);
        // scale tips down so the hierarchy stays well conditioned
        for (auto* tips : {&vt, &vb, &wt, &wb})
            for (auto& b : *tips)
                for (double& v : b.data) v *= 0.5;
        ReducedLevels rl = reduce_factorize(vt, vb, wt, wb, 4, k);
        REQUIRE(rl.levels() == 2);
        DenseBlock s0 = assemble_reduced(vt, vb, wt, wb, 4, k);
        CHECK(testutil::max_abs_diff(assemble_level(rl, 0), s0) == 0.0);
        DenseBlock prod = testutil::dense_matmul(assemble_level_diag(rl, 0), assemble_level(rl, 1));
        CHECK(testutil::max_abs_diff(prod, s0) < 1e-13 * (1 + testutil::max_abs(s0)));
    }
}

TEST_CASE("factor-stage sweep budget: 0 for first/last, 3 for inner, both thread modes") {
    const int n = 512, k = 4;
    BandedMatrix a = generate_banded(n, k, k, 1.5, RngSeed{29});
    for (bool piv : {false, true}) {
        for (int t : {4, 6, 5}) {
            PartitionPlan plan = make_plan(n, k, k, t, 1.0, 2.0);
            REQUIRE(plan.p == 4);
            SpikeFactorization fact = factorize(a, plan, {piv, default_boost_eps()});
            CHECK(fact.factor_sweeps[0] == 0);
            CHECK(fact.factor_sweeps[3] == 0);
            CHECK(fact.factor_sweeps[1] == 3);
            CHECK(fact.factor_sweeps[2] == 3);
        }
    }
}

TEST_CASE("factorize is deterministic across repeated runs") {
    const int n = 256, k = 3;
    BandedMatrix a = generate_banded(n, k, k, 1.5, RngSeed{31});
    PartitionPlan plan = make_plan(n, k, k, 6, 1.15, 2.3);
    SpikeFactorization f1 = factorize(a, plan);
    SpikeFactorization f2 = factorize(a, plan);
    CHECK(blocks_equal(f1.vt, f2.vt));
    CHECK(blocks_equal(f1.vb, f2.vb));
    CHECK(blocks_equal(f1.wt, f2.wt));
    CHECK(blocks_equal(f1.wb, f2.wb));
    for (int l = 0; l < f1.levels.levels(); ++l) {
        CHECK(blocks_equal(f1.levels.v[l], f2.levels.v[l]));
        CHECK(blocks_equal(f1.levels.w[l], f2.levels.w[l]));
    }
    DenseBlock f = random_block(n, 3, RngSeed{37});
    CHECK(testutil::max_abs_diff(solve(f1, f), solve(f2, f)) == 0.0);
}

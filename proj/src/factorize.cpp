#include "spike/factorize.hpp"

#include "block_util.hpp"
#include "parallel_util.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <cassert>
#include <memory>
#include <stdexcept>

namespace spike {

using detail::bottom_padded;
using detail::top_padded;
using detail::trunc_start;

void ReducedLevels::pair_solve(int level, int a, MatView z) const {
    const int h = unit_rows(level);
    assert(z.rows == 2 * h);
    const DenseBlock& vl = v[level][2 * a];
    const DenseBlock& wr = w[level][2 * a + 1];
    DenseBlock red = copy_of(z.block(h - k, 2 * k));
    pairs[level][a].solve_inplace(red.view(), false, nullptr);
    ConstMatView zlb = red.block(0, k);
    ConstMatView zrt = red.block(k, k);
    gemm_minus(z.block(0, h - k), vl.block(0, h - k), zrt);
    assign(z.block(h - k, k), zlb);
    assign(z.block(h, k), zrt);
    gemm_minus(z.block(h + k, h - k), wr.block(k, h - k), zlb);
}

void ReducedLevels::pair_solve_transpose(int level, int a, MatView z) const {
    const int h = unit_rows(level);
    assert(z.rows == 2 * h);
    const DenseBlock& vl = v[level][2 * a];
    const DenseBlock& wr = w[level][2 * a + 1];
    DenseBlock red = copy_of(z.block(h - k, 2 * k));
    gemm_minus_t(red.block(0, k), wr.block(k, h - k), z.block(h + k, h - k));
    gemm_minus_t(red.block(k, k), vl.block(0, h - k), z.block(0, h - k));
    pairs[level][a].solve_inplace(red.view(), true, nullptr);
    assign(z.block(h - k, 2 * k), red.view());
}

ReducedLevels reduce_factorize(const std::vector<DenseBlock>& vt,
                               const std::vector<DenseBlock>& vb,
                               const std::vector<DenseBlock>& wt,
                               const std::vector<DenseBlock>& wb, int p, int k,
                               double boost_eps, int threads) {
    if (p < 1 || (p & (p - 1)) != 0)
        throw std::invalid_argument("reduce_factorize: p must be a power of two");
    ReducedLevels rl;
    rl.p = p;
    rl.k = k;
    if (p < 2 || k == 0) return rl;

    int levels = 0;
    while ((1 << (levels + 1)) <= p) ++levels; // log2(p)
    rl.v.resize(levels);
    rl.w.resize(levels);
    rl.pairs.resize(levels);

    rl.v[0].resize(p);
    rl.w[0].resize(p);
    for (int i = 0; i < p; ++i) {
        if (i < p - 1) {
            DenseBlock col(2 * k, k);
            assign(col.block(0, k), vt[i].view());
            assign(col.block(k, k), vb[i].view());
            rl.v[0][i] = std::move(col);
        }
        if (i > 0) {
            DenseBlock col(2 * k, k);
            assign(col.block(0, k), wt[i].view());
            assign(col.block(k, k), wb[i].view());
            rl.w[0][i] = std::move(col);
        }
    }

    std::atomic<int> warnings{0};
    for (int l = 0; l < levels; ++l) {
        const int units = p >> l;
        const int npairs = units / 2;
        const int h = rl.unit_rows(l);
        rl.pairs[l].resize(npairs);
        if (l + 1 < levels) {
            rl.v[l + 1].resize(npairs);
            rl.w[l + 1].resize(npairs);
        }
        detail::parallel_for(npairs, threads, [&](int a) {
            const DenseBlock& vl = rl.v[l][2 * a];
            const DenseBlock& wr = rl.w[l][2 * a + 1];
            DenseBlock coupling(2 * k, 2 * k);
            for (int i = 0; i < 2 * k; ++i) coupling.at(i, i) = 1.0;
            for (int j = 0; j < k; ++j)
                for (int i = 0; i < k; ++i) {
                    coupling.at(i, k + j) = vl.at(h - k + i, j);
                    coupling.at(k + i, j) = wr.at(i, j);
                }
            rl.pairs[l][a] = LUFactors::dense(coupling.view(), boost_eps);
            if (!rl.pairs[l][a].pivoting()) ++warnings; // pivoted factor fell back
            if (l + 1 == levels) return;
            if (2 * a + 1 < units - 1) {
                DenseBlock rhs(2 * h, k);
                assign(rhs.block(h, h), rl.v[l][2 * a + 1].view());
                rl.pair_solve(l, a, rhs.view());
                rl.v[l + 1][a] = std::move(rhs);
            }
            if (a > 0) {
                DenseBlock rhs(2 * h, k);
                assign(rhs.block(0, h), rl.w[l][2 * a].view());
                rl.pair_solve(l, a, rhs.view());
                rl.w[l + 1][a] = std::move(rhs);
            }
        });
    }
    rl.boost_warnings = warnings.load();
    return rl;
}

namespace {

struct FactorTaskState {
    std::unique_ptr<std::barrier<>> bar;
    Spike2x2Factors::Work work;
    SpikeTips tips;
    long half_sweeps[2] = {0, 0};
};

} // namespace

SpikeFactorization factorize(const BandedMatrix& a, const PartitionPlan& plan,
                             FactorOptions opts) {
    if (plan.n() != a.n()) throw std::invalid_argument("factorize: plan does not match matrix");
    for (int i = 0; i < plan.p; ++i)
        if (plan.size(i) < 1) throw std::invalid_argument("factorize: empty partition");

    SpikeFactorization fact;
    fact.plan = plan;
    fact.n = a.n();
    fact.kl = a.kl();
    fact.ku = a.ku();
    fact.k = std::max(a.kl(), a.ku());
    fact.options = opts;
    const int p = plan.p;
    const int k = fact.k;
    fact.factors.resize(p);
    fact.bhat.resize(p);
    fact.chat.resize(p);
    fact.vt.assign(p, DenseBlock(k, k));
    fact.vb.assign(p, DenseBlock(k, k));
    fact.wt.assign(p, DenseBlock(k, k));
    fact.wb.assign(p, DenseBlock(k, k));
    fact.factor_sweeps.assign(p, 0);

    for (int i = 0; i + 1 < p; ++i) {
        const int b = plan.bounds[i + 1];
        fact.bhat[i] = band_corner(a, b - k, b, k, k);
        fact.chat[i + 1] = band_corner(a, b, b - k, k, k);
    }

    std::vector<FactorTaskState> state(p);
    for (int i = 0; i < p; ++i)
        if (plan.kinds[i] == PartitionKind::InnerDual) {
            state[i].bar = std::make_unique<std::barrier<>>(2);
            state[i].work = Spike2x2Factors::make_work(k, k);
            fact.factors[i].emplace<Spike2x2Factors>();
            std::get<Spike2x2Factors>(fact.factors[i])
                .prepare(a, plan.bounds[i], plan.size(i), opts.pivoting, opts.boost_eps);
        }

    detail::run_partition_tasks(plan, [&](int i, int role) {
        const int r0 = plan.bounds[i];
        const int m = plan.size(i);
        long* cnt = &state[i].half_sweeps[role];
        switch (plan.kinds[i]) {
            case PartitionKind::InnerDual: {
                auto& fac = std::get<Spike2x2Factors>(fact.factors[i]);
                fac.factor_task(a, role, *state[i].bar);
                fac.spikes_task(fact.bhat[i].view(), fact.chat[i].view(), state[i].tips, role,
                                *state[i].bar, state[i].work, cnt);
                if (role == 0) {
                    fact.vt[i] = state[i].tips.vt;
                    fact.vb[i] = state[i].tips.vb;
                    fact.wt[i] = state[i].tips.wt;
                    fact.wb[i] = state[i].tips.wb;
                }
                break;
            }
            case PartitionKind::InnerSingle: {
                fact.factors[i] = LUFactors(a, r0, m, opts.pivoting, opts.boost_eps);
                const auto& lu = std::get<LUFactors>(fact.factors[i]);
                if (k > 0) {
                    // V_i with one full sweep: truncated L start, full U
                    DenseBlock vcol = bottom_padded(m, fact.bhat[i].view());
                    lu.forward_lower(vcol.view(), trunc_start(lu, k), nullptr);
                    lu.backward_upper(vcol.view(), m - 1, cnt);
                    fact.vt[i] = copy_of(vcol.block(0, k));
                    fact.vb[i] = copy_of(vcol.block(m - k, k));
                    // W_i with two full sweeps
                    DenseBlock wcol = top_padded(m, fact.chat[i].view());
                    lu.forward_lower(wcol.view(), 0, cnt);
                    lu.backward_upper(wcol.view(), m - 1, cnt);
                    fact.wt[i] = copy_of(wcol.block(0, k));
                    fact.wb[i] = copy_of(wcol.block(m - k, k));
                }
                break;
            }
            case PartitionKind::FirstLast: {
                if (p == 1) {
                    fact.factors[i] = LUFactors(a, r0, m, opts.pivoting, opts.boost_eps);
                    break;
                }
                if (i == 0) {
                    fact.factors[i] = LUFactors(a, r0, m, opts.pivoting, opts.boost_eps);
                    const auto& lu = std::get<LUFactors>(fact.factors[i]);
                    if (k > 0) {
                        // only V_1b is needed: truncated sweeps only
                        DenseBlock rhs = bottom_padded(m, fact.bhat[i].view());
                        lu.forward_lower(rhs.view(), trunc_start(lu, k), nullptr);
                        fact.vb[i] = lu.upper_bottom_tip(rhs.view(), k);
                    }
                } else {
                    fact.factors[i] = ULFactors(a, r0, m, opts.pivoting, opts.boost_eps);
                    const auto& ul = std::get<ULFactors>(fact.factors[i]);
                    if (k > 0) {
                        // only W_pt: [0; rev Chat] in reversed space, truncated
                        DenseBlock rhs =
                            bottom_padded(m, reversed_rows(fact.chat[i].view()).view());
                        ul.rev().forward_lower(rhs.view(), trunc_start(ul.rev(), k), nullptr);
                        fact.wt[i] =
                            reversed_rows(ul.rev().upper_bottom_tip(rhs.view(), k).view());
                    }
                }
                break;
            }
        }
    });

    for (int i = 0; i < p; ++i) {
        if (plan.kinds[i] == PartitionKind::InnerDual) {
            fact.factor_sweeps[i] = (state[i].half_sweeps[0] + state[i].half_sweeps[1]) / 2;
            fact.boost_count += std::get<Spike2x2Factors>(fact.factors[i]).boost_count();
        } else {
            fact.factor_sweeps[i] = state[i].half_sweeps[0];
            if (std::holds_alternative<LUFactors>(fact.factors[i]))
                fact.boost_count += std::get<LUFactors>(fact.factors[i]).boost_count();
            else
                fact.boost_count += std::get<ULFactors>(fact.factors[i]).boost_count();
        }
    }

    fact.levels = reduce_factorize(fact.vt, fact.vb, fact.wt, fact.wb, p, k, opts.boost_eps,
                                   plan.threads_used);
    return fact;
}

} // namespace spike

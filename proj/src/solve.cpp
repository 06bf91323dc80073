#include "spike/solve.hpp"

#include "spike/band_ops.hpp"
#include "block_util.hpp"
#include "parallel_util.hpp"

#include <atomic>
#include <barrier>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace spike {

namespace {

using detail::mul;
using detail::top_padded;
using detail::trunc_start;

struct PartState {
    DenseBlock y;                // stashed D/S-stage buffer
    DenseBlock t;                // dual transpose S-stage result
    DenseBlock tau_top, tau_bot; // transpose corner tips
    std::unique_ptr<std::barrier<>> bar;
    Spike2x2Factors::Work work;
    long half[2] = {0, 0};
};

MatView tip_t(DenseBlock& tips, int i, int k) { return tips.block(2 * i * k, k); }
MatView tip_b(DenseBlock& tips, int i, int k) { return tips.block((2 * i + 1) * k, k); }

void reduced_solve_inplace(const ReducedLevels& rl, MatView tips, std::atomic<long>* couplings,
                           int threads) {
    for (int l = 0; l < rl.levels(); ++l) {
        const int npairs = (rl.p >> l) / 2;
        const int span = 2 * rl.unit_rows(l);
        detail::parallel_for(npairs, threads, [&](int a) {
            rl.pair_solve(l, a, tips.block(a * span, span));
            if (couplings) ++*couplings;
        });
    }
}

void reduced_solve_transpose_inplace(const ReducedLevels& rl, MatView tips,
                                     std::atomic<long>* couplings, int threads) {
    for (int l = rl.levels() - 1; l >= 0; --l) {
        const int npairs = (rl.p >> l) / 2;
        const int span = 2 * rl.unit_rows(l);
        detail::parallel_for(npairs, threads, [&](int a) {
            rl.pair_solve_transpose(l, a, tips.block(a * span, span));
            if (couplings) ++*couplings;
        });
    }
}

std::vector<PartState> make_state(const SpikeFactorization& fact, int nrhs) {
    std::vector<PartState> state(fact.p());
    for (int i = 0; i < fact.p(); ++i)
        if (fact.is_dual(i)) {
            state[i].bar = std::make_unique<std::barrier<>>(2);
            state[i].work = Spike2x2Factors::make_work(fact.k, nrhs);
            state[i].y = DenseBlock(fact.plan.size(i), nrhs);
            state[i].t = DenseBlock(fact.plan.size(i), nrhs);
        }
    return state;
}

void fill_stats(const SpikeFactorization& fact, std::vector<PartState>& state,
                long couplings, SolveStats* stats) {
    if (!stats) return;
    stats->partition_full_sweeps.assign(fact.p(), 0);
    for (int i = 0; i < fact.p(); ++i)
        stats->partition_full_sweeps[i] =
            fact.is_dual(i) ? (state[i].half[0] + state[i].half[1]) / 2 : state[i].half[0];
    stats->reduced_coupling_solves = couplings;
}

} // namespace

DenseBlock solve(const SpikeFactorization& fact, const DenseBlock& f, SolveStats* stats) {
    if (f.rows != fact.n) throw std::invalid_argument("solve: F.rows must equal n");
    const PartitionPlan& plan = fact.plan;
    const int p = plan.p, k = fact.k, nrhs = f.cols;
    DenseBlock x(fact.n, nrhs);

    if (p == 1) {
        x = f;
        long cnt = 0;
        fact.lu(0).solve_inplace(x.view(), false, &cnt);
        if (stats) {
            stats->partition_full_sweeps.assign(1, cnt);
            stats->reduced_coupling_solves = 0;
        }
        return x;
    }

    std::vector<PartState> state = make_state(fact, nrhs);
    DenseBlock tips(2 * p * k, nrhs);

    // D stage: Y_i = A_i^-1 F_i landing in X, boundary partitions only as
    // far as their tips (the last partition works in reversed row order)
    detail::run_partition_tasks(plan, [&](int i, int role) {
        const int r0 = plan.bounds[i], m = plan.size(i);
        long* cnt = &state[i].half[role];
        MatView xi = x.block(r0, m);
        switch (plan.kinds[i]) {
            case PartitionKind::InnerDual: {
                const auto& fac = fact.dual(i);
                fac.solve_task(f.block(r0, m), xi, role, *state[i].bar, state[i].work, cnt);
                if (role == 0 && k > 0) {
                    assign(tip_t(tips, i, k), xi.block(0, k));
                    assign(tip_b(tips, i, k), xi.block(m - k, k));
                }
                break;
            }
            case PartitionKind::InnerSingle: {
                const auto& lu = fact.lu(i);
                assign(xi, f.block(r0, m));
                lu.forward_lower(xi, 0, cnt);
                lu.backward_upper(xi, m - 1, cnt);
                if (k > 0) {
                    assign(tip_t(tips, i, k), xi.block(0, k));
                    assign(tip_b(tips, i, k), xi.block(m - k, k));
                }
                break;
            }
            case PartitionKind::FirstLast: {
                if (i == 0) {
                    const auto& lu = fact.lu(i);
                    assign(xi, f.block(r0, m));
                    lu.forward_lower(xi, 0, cnt);
                    if (k > 0) assign(tip_b(tips, i, k), lu.upper_bottom_tip(xi, k).view());
                } else {
                    const auto& rev = fact.ul(i).rev();
                    assign(xi, f.block(r0, m));
                    reverse_rows_inplace(xi);
                    rev.forward_lower(xi, 0, cnt);
                    if (k > 0)
                        assign(tip_t(tips, i, k),
                               reversed_rows(rev.upper_bottom_tip(xi, k).view()).view());
                }
                break;
            }
        }
    });

    std::atomic<long> couplings{0};
    reduced_solve_inplace(fact.levels, tips.view(), &couplings, plan.threads_used);

    // Retrieval: X_i = Y_i - A_i^-1 (B_i X_{i+1,t} + C_i X_{i-1,b}); the
    // boundary corrections only ever touch the trailing rows of the sweep
    detail::run_partition_tasks(plan, [&](int i, int role) {
        const int r0 = plan.bounds[i], m = plan.size(i);
        long* cnt = &state[i].half[role];
        MatView xi = x.block(r0, m);
        switch (plan.kinds[i]) {
            case PartitionKind::InnerDual: {
                const auto& fac = fact.dual(i);
                if (k > 0) {
                    // Each role plants its own half's corner product; t was
                    // zero-initialized up front.
                    if (role == 0)
                        assign(state[i].t.block(0, k),
                               mul(fact.chat[i].view(), tip_b(tips, i - 1, k)).view());
                    else
                        assign(state[i].t.block(m - k, k),
                               mul(fact.bhat[i].view(), tip_t(tips, i + 1, k)).view());
                }
                fac.solve_task(state[i].t.view(), state[i].y.view(), role, *state[i].bar,
                               state[i].work, cnt);
                const int h0 = role == 0 ? 0 : fac.split();
                const int hm = role == 0 ? fac.split() : m - fac.split();
                subtract_inplace(xi.block(h0, hm), state[i].y.block(h0, hm));
                break;
            }
            case PartitionKind::InnerSingle: {
                const auto& lu = fact.lu(i);
                if (k > 0) {
                    DenseBlock corr(m, nrhs);
                    assign(corr.block(0, k), mul(fact.chat[i].view(), tip_b(tips, i - 1, k)).view());
                    assign(corr.block(m - k, k),
                           mul(fact.bhat[i].view(), tip_t(tips, i + 1, k)).view());
                    lu.forward_lower(corr.view(), 0, cnt);
                    lu.backward_upper(corr.view(), m - 1, cnt);
                    subtract_inplace(xi, corr.view());
                }
                break;
            }
            case PartitionKind::FirstLast: {
                if (i == 0) {
                    const auto& lu = fact.lu(i);
                    if (k > 0) {
                        const int start = trunc_start(lu, k);
                        DenseBlock corr(m - start, nrhs);
                        assign(corr.block(corr.rows - k, k),
                               mul(fact.bhat[i].view(), tip_t(tips, i + 1, k)).view());
                        lu.forward_lower_tail(corr.view(), start);
                        subtract_inplace(xi.block(start, m - start), corr.view());
                    }
                    lu.backward_upper(xi, m - 1, cnt);
                } else {
                    const auto& rev = fact.ul(i).rev();
                    if (k > 0) {
                        const int start = trunc_start(rev, k);
                        DenseBlock corr(m - start, nrhs);
                        assign(corr.block(corr.rows - k, k),
                               reversed_rows(mul(fact.chat[i].view(), tip_b(tips, i - 1, k)).view())
                                   .view());
                        rev.forward_lower_tail(corr.view(), start);
                        subtract_inplace(xi.block(start, m - start), corr.view());
                    }
                    rev.backward_upper(xi, m - 1, cnt);
                    reverse_rows_inplace(xi);
                }
                break;
            }
        }
    });

    fill_stats(fact, state, couplings.load(), stats);
    return x;
}

DenseBlock transpose_solve(const SpikeFactorization& fact, const DenseBlock& f,
                           SolveStats* stats) {
    if (f.rows != fact.n) throw std::invalid_argument("transpose_solve: F.rows must equal n");
    const PartitionPlan& plan = fact.plan;
    const int p = plan.p, k = fact.k, nrhs = f.cols;
    DenseBlock x(fact.n, nrhs);

    if (p == 1) {
        x = f;
        long cnt = 0;
        fact.lu(0).solve_inplace(x.view(), true, &cnt);
        if (stats) {
            stats->partition_full_sweeps.assign(1, cnt);
            stats->reduced_coupling_solves = 0;
        }
        return x;
    }

    std::vector<PartState> state = make_state(fact, nrhs);

    // S stage: one transpose solve over the middle rows of each partition;
    // boundary partitions fold their uncoupled tip in and stop at their own
    // corner tip.
    detail::run_partition_tasks(plan, [&](int i, int role) {
        const int r0 = plan.bounds[i], m = plan.size(i);
        long* cnt = &state[i].half[role];
        switch (plan.kinds[i]) {
            case PartitionKind::InnerDual: {
                const auto& fac = fact.dual(i);
                const int split = fac.split();
                if (role == 0) {
                    assign(state[i].y.block(0, split), f.block(r0, split));
                    for (int c = 0; c < nrhs; ++c)
                        for (int r = 0; r < k; ++r) state[i].y.at(r, c) = 0.0;
                } else {
                    assign(state[i].y.block(split, m - split), f.block(r0 + split, m - split));
                    for (int c = 0; c < nrhs; ++c)
                        for (int r = m - k; r < m; ++r) state[i].y.at(r, c) = 0.0;
                }
                fac.solve_transpose_task(state[i].y.view(), state[i].t.view(), role,
                                         *state[i].bar, state[i].work, cnt);
                if (role == 0 && k > 0) {
                    state[i].tau_top = copy_of(state[i].t.block(0, k));
                    state[i].tau_bot = copy_of(state[i].t.block(m - k, k));
                }
                break;
            }
            case PartitionKind::InnerSingle: {
                const auto& lu = fact.lu(i);
                DenseBlock v = copy_of(f.block(r0, m));
                for (int c = 0; c < nrhs; ++c)
                    for (int r = 0; r < k; ++r) {
                        v.at(r, c) = 0.0;
                        v.at(m - 1 - r, c) = 0.0;
                    }
                lu.forward_upperT(v.view(), cnt);
                lu.backward_lowerT(v.view(), cnt);
                state[i].tau_top = copy_of(v.block(0, k));
                state[i].tau_bot = copy_of(v.block(m - k, k));
                break;
            }
            case PartitionKind::FirstLast: {
                MatView xi = x.block(r0, m);
                if (i == 0) {
                    const auto& lu = fact.lu(i);
                    assign(xi, f.block(r0, m));
                    for (int c = 0; c < nrhs; ++c)
                        for (int r = m - k; r < m; ++r) xi.at(r, c) = 0.0;
                    lu.forward_upperT(xi, cnt);
                    if (k > 0) state[i].tau_bot = lu.lowerT_perm_bottom_tip(xi, k);
                } else {
                    const auto& rev = fact.ul(i).rev();
                    assign(xi, f.block(r0, m));
                    for (int c = 0; c < nrhs; ++c)
                        for (int r = 0; r < k; ++r) xi.at(r, c) = 0.0;
                    reverse_rows_inplace(xi);
                    rev.forward_upperT(xi, cnt);
                    if (k > 0)
                        state[i].tau_top =
                            reversed_rows(rev.lowerT_perm_bottom_tip(xi, k).view());
                }
                break;
            }
        }
    });

    // Modified right-hand side G over the tips; the boundary tips pass
    // through unchanged.
    DenseBlock tips(2 * p * k, nrhs);
    if (k > 0) {
        assign(tip_t(tips, 0, k), f.block(0, k));
        assign(tip_b(tips, p - 1, k), f.block(fact.n - k, k));
        for (int i = 1; i < p; ++i) {
            assign(tip_t(tips, i, k), f.block(plan.bounds[i], k));
            gemm_minus_t(tip_t(tips, i, k), fact.bhat[i - 1].view(), state[i - 1].tau_bot.view());
        }
        for (int i = 0; i + 1 < p; ++i) {
            assign(tip_b(tips, i, k), f.block(plan.bounds[i + 1] - k, k));
            gemm_minus_t(tip_b(tips, i, k), fact.chat[i + 1].view(), state[i + 1].tau_top.view());
        }
    }

    std::atomic<long> couplings{0};
    reduced_solve_transpose_inplace(fact.levels, tips.view(), &couplings, plan.threads_used);

    // Transpose D stage: X_i = A_i^-T [Y_it; F~_i; Y_ib]
    detail::run_partition_tasks(plan, [&](int i, int role) {
        const int r0 = plan.bounds[i], m = plan.size(i);
        long* cnt = &state[i].half[role];
        MatView xi = x.block(r0, m);
        switch (plan.kinds[i]) {
            case PartitionKind::InnerDual: {
                const auto& fac = fact.dual(i);
                const int split = fac.split();
                if (role == 0) {
                    assign(state[i].y.block(0, split), f.block(r0, split));
                    if (k > 0) assign(state[i].y.block(0, k), tip_t(tips, i, k));
                } else {
                    assign(state[i].y.block(split, m - split), f.block(r0 + split, m - split));
                    if (k > 0) assign(state[i].y.block(m - k, k), tip_b(tips, i, k));
                }
                fac.solve_transpose_task(state[i].y.view(), xi, role, *state[i].bar,
                                         state[i].work, cnt);
                break;
            }
            case PartitionKind::InnerSingle: {
                const auto& lu = fact.lu(i);
                assign(xi, f.block(r0, m));
                if (k > 0) {
                    assign(xi.block(0, k), tip_t(tips, i, k));
                    assign(xi.block(m - k, k), tip_b(tips, i, k));
                }
                lu.forward_upperT(xi, cnt);
                lu.backward_lowerT(xi, cnt);
                break;
            }
            case PartitionKind::FirstLast: {
                if (i == 0) {
                    const auto& lu = fact.lu(i);
                    if (k > 0) lu.add_upperT_tail(xi, tip_b(tips, i, k));
                    lu.backward_lowerT(xi, cnt);
                } else {
                    const auto& rev = fact.ul(i).rev();
                    if (k > 0)
                        rev.add_upperT_tail(xi, reversed_rows(tip_t(tips, i, k)).view());
                    rev.backward_lowerT(xi, cnt);
                    reverse_rows_inplace(xi);
                }
                break;
            }
        }
    });

    fill_stats(fact, state, couplings.load(), stats);
    return x;
}

DenseBlock reduced_solve(const ReducedLevels& levels, const DenseBlock& ytips,
                         long* coupling_solves, int threads) {
    if (ytips.rows != 2 * levels.p * levels.k)
        throw std::invalid_argument("reduced_solve: tip block has wrong height");
    DenseBlock out = ytips;
    std::atomic<long> couplings{0};
    reduced_solve_inplace(levels, out.view(), &couplings, threads);
    if (coupling_solves) *coupling_solves += couplings.load();
    return out;
}

DenseBlock reduced_solve_transpose(const ReducedLevels& levels, const DenseBlock& gtips,
                                   long* coupling_solves, int threads) {
    if (gtips.rows != 2 * levels.p * levels.k)
        throw std::invalid_argument("reduced_solve_transpose: tip block has wrong height");
    DenseBlock out = gtips;
    std::atomic<long> couplings{0};
    reduced_solve_transpose_inplace(levels, out.view(), &couplings, threads);
    if (coupling_solves) *coupling_solves += couplings.load();
    return out;
}

RefineResult iterative_refine(const SpikeFactorization& fact, const BandedMatrix& a,
             const DenseBlock& f, const DenseBlock& x0, int max_iters,
                              double tol, bool transpose) {
    RefineResult res;
    res.x = x0;
    const double fnorm = frobenius_norm(f);
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it <= max_iters; ++it) {
        DenseBlock r = band_matmul(a, res.x, transpose);
        for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] = f.data[i] - r.data[i];
        const double rn = frobenius_norm(r);
        res.residual = fnorm == 0.0 ? (rn == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
                                    : rn / fnorm;
        res.iterations = it;
        if (res.residual <= tol) {
            res.converged = true;
            return res;
        }
        if (it > 0 && res.residual * 1.1 > prev) {
            res.stagnated = true;
            return res;
        }
        if (it == max_iters) return res;
        prev = res.residual;
        DenseBlock d = transpose ? transpose_solve(fact, r) : solve(fact, r);
        for (std::size_t i = 0; i < res.x.data.size(); ++i) res.x.data[i] += d.data[i];
    }
    return res;
}

} // namespace spike

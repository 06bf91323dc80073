#include "spike/spike2x2.hpp"

#include "block_util.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

namespace spike {

using detail::bottom_padded;
using detail::mul;
using detail::negate;
using detail::top_padded;
using detail::trunc_start;

DenseBlock band_corner(const BandedMatrix& a, int row0, int col0, int rows, int cols) {
    DenseBlock out(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) {
            const int gi = row0 + i, gj = col0 + j;
            if (gi >= 0 && gi < a.n() && gj >= 0 && gj < a.n() && a.in_band(gi, gj))
                out.at(i, j) = a.at(gi, gj);
        }
    return out;
}

Spike2x2Factors::Work Spike2x2Factors::make_work(int k, int nrhs) {
    Work w;
    w.red = DenseBlock(2 * k, nrhs);
    return w;
}

void Spike2x2Factors::prepare(const BandedMatrix& a, int r0, int m, bool pivoting,
                              double boost_eps) {
    k_ = std::max(a.kl(), a.ku());
    if (m < 2 * (a.kl() + a.ku() + 1))
        throw std::invalid_argument("Spike2x2Factors: partition too small for its band");
    r0_ = r0;
    n_ = m;
    split_ = (m + 1) / 2;
    pivoting_ = pivoting;
    boost_eps_ = boost_eps;
    bint_ = band_corner(a, r0 + split_ - k_, r0 + split_, k_, k_);
    cint_ = band_corner(a, r0 + split_, r0 + split_ - k_, k_, k_);
}

void Spike2x2Factors::factor_task(const BandedMatrix& a, int half, std::barrier<>& bar) {
    const int nb = n_ - split_;
    if (half == 0) {
        top_ = LUFactors(a, r0_, split_, pivoting_, boost_eps_);
        // bottom tip of A1^-1 [0; Bint], truncated sweeps only
        DenseBlock rhs = bottom_padded(split_, bint_.view());
        top_.forward_lower(rhs.view(), trunc_start(top_, k_), nullptr);
        vtip_ = top_.upper_bottom_tip(rhs.view(), k_);
    } else {
        bottom_ = ULFactors(a, r0_ + split_, nb, pivoting_, boost_eps_);
        // top tip of A2^-1 [Cint; 0]: [0; rev Cint] in reversed space
        DenseBlock rhs = bottom_padded(nb, reversed_rows(cint_.view()).view());
        bottom_.rev().forward_lower(rhs.view(), trunc_start(bottom_.rev(), k_), nullptr);
        wtip_ = reversed_rows(bottom_.rev().upper_bottom_tip(rhs.view(), k_).view());
    }
    bar.arrive_and_wait();
    if (half == 0 && k_ > 0) {
        DenseBlock coupling(2 * k_, 2 * k_);
        for (int i = 0; i < 2 * k_; ++i) coupling.at(i, i) = 1.0;
        for (int j = 0; j < k_; ++j)
            for (int i = 0; i < k_; ++i) {
                coupling.at(i, k_ + j) = vtip_.at(i, j);
                coupling.at(k_ + i, j) = wtip_.at(i, j);
            }
        reduced_ = LUFactors::dense(coupling.view(), boost_eps_);
    }
    bar.arrive_and_wait();
}

void Spike2x2Factors::solve_task(ConstMatView f, MatView x, int half, std::barrier<>& bar,
                                 Work& w, long* half_sweeps) const {
    const int nb = n_ - split_, nrhs = f.cols;
    if (half == 0) {
        MatView x0 = x.block(0, split_);
        assign(x0, f.block(0, split_));
        top_.forward_lower(x0, 0, half_sweeps);
        w.y1b = top_.upper_bottom_tip(x0, k_);
    } else {
        w.rx = reversed_rows(f.block(split_, nb));
        bottom_.rev().forward_lower(w.rx.view(), 0, half_sweeps);
        w.y2t = reversed_rows(bottom_.rev().upper_bottom_tip(w.rx.view(), k_).view());
    }
    bar.arrive_and_wait();
    if (half == 0 && k_ > 0) {
        for (int c = 0; c < nrhs; ++c)
            for (int i = 0; i < k_; ++i) {
                w.red.at(i, c) = w.y1b.at(i, c);
                w.red.at(k_ + i, c) = w.y2t.at(i, c);
            }
        reduced_.solve_inplace(w.red.view(), false, nullptr);
        w.x1b = copy_of(w.red.block(0, k_));
        w.x2t = copy_of(w.red.block(k_, k_));
    }
    bar.arrive_and_wait();
    if (half == 0) {
        MatView x0 = x.block(0, split_);
        if (k_ > 0) {
            const int start = trunc_start(top_, k_);
            DenseBlock corr(split_ - start, x.cols);
            assign(corr.block(corr.rows - k_, k_), mul(bint_.view(), w.x2t.view()).view());
            top_.forward_lower_tail(corr.view(), start);
            subtract_inplace(x0.block(start, split_ - start), corr.view());
        }
        top_.backward_upper(x0, split_ - 1, half_sweeps);
    } else {
        if (k_ > 0) {
            const int start = trunc_start(bottom_.rev(), k_);
            DenseBlock corr(nb - start, x.cols);
            assign(corr.block(corr.rows - k_, k_),
                   reversed_rows(mul(cint_.view(), w.x1b.view()).view()).view());
            bottom_.rev().forward_lower_tail(corr.view(), start);
            subtract_inplace(w.rx.block(start, nb - start), corr.view());
        }
        bottom_.rev().backward_upper(w.rx.view(), nb - 1, half_sweeps);
        MatView x1 = x.block(split_, nb);
        assign(x1, w.rx.view());
        reverse_rows_inplace(x1);
    }
    bar.arrive_and_wait();
}

void Spike2x2Factors::solve_transpose_task(ConstMatView f, MatView x, int half,
                                           std::barrier<>& bar, Work& w,
                                           long* half_sweeps) const {
    const int nb = n_ - split_, nrhs = f.cols;
    if (half == 0) {
        MatView x0 = x.block(0, split_);
        assign(x0, f.block(0, split_));
        for (int c = 0; c < nrhs; ++c)
            for (int i = split_ - k_; i < split_; ++i) x0.at(i, c) = 0.0;
        top_.forward_upperT(x0, half_sweeps);
        w.tau0 = top_.lowerT_perm_bottom_tip(x0, k_);
    } else {
        DenseBlock f1 = copy_of(f.block(split_, nb));
        for (int c = 0; c < nrhs; ++c)
            for (int i = 0; i < k_; ++i) f1.at(i, c) = 0.0;
        w.rx = reversed_rows(f1.view());
        bottom_.rev().forward_upperT(w.rx.view(), half_sweeps);
        w.tau1 = reversed_rows(bottom_.rev().lowerT_perm_bottom_tip(w.rx.view(), k_).view());
    }
    bar.arrive_and_wait();
    if (half == 0 && k_ > 0) {
        // coupling rhs: [f1b - Cint^T tau1; f2t - Bint^T tau0], transposed block
        for (int c = 0; c < nrhs; ++c)
            for (int i = 0; i < k_; ++i) {
                w.red.at(i, c) = f.at(split_ - k_ + i, c);
                w.red.at(k_ + i, c) = f.at(split_ + i, c);
            }
        gemm_minus_t(w.red.block(0, k_), cint_.view(), w.tau1.view());
        gemm_minus_t(w.red.block(k_, k_), bint_.view(), w.tau0.view());
        reduced_.solve_inplace(w.red.view(), true, nullptr);
        w.x1b = copy_of(w.red.block(0, k_));
        w.x2t = copy_of(w.red.block(k_, k_));
    }
    bar.arrive_and_wait();
    if (half == 0) {
        MatView x0 = x.block(0, split_);
        if (k_ > 0) top_.add_upperT_tail(x0, w.x1b.view());
        top_.backward_lowerT(x0, half_sweeps);
    } else {
        if (k_ > 0)
            bottom_.rev().add_upperT_tail(w.rx.view(), reversed_rows(w.x2t.view()).view());
        bottom_.rev().backward_lowerT(w.rx.view(), half_sweeps);
        MatView x1 = x.block(split_, nb);
        assign(x1, w.rx.view());
        reverse_rows_inplace(x1);
    }
    bar.arrive_and_wait();
}

void Spike2x2Factors::spikes_task(ConstMatView bhat, ConstMatView chat, SpikeTips& tips,
                                  int half, std::barrier<>& bar, Work& w,
                                  long* half_sweeps) const {
    const int nb = n_ - split_;
    const int kc = bhat.cols;
    if (half == 1) {
        // V pass D-stage: A2^-1 [0; bhat]; reversed space puts bhat on top
        w.hv = top_padded(nb, reversed_rows(bhat).view());
        bottom_.rev().forward_lower(w.hv.view(), 0, half_sweeps);
        w.y2t_v = reversed_rows(bottom_.rev().upper_bottom_tip(w.hv.view(), k_).view());
    } else {
        // W pass D-stage: A1^-1 [chat; 0]
        w.gw = top_padded(split_, chat);
        top_.forward_lower(w.gw.view(), 0, half_sweeps);
        w.y1b_w = top_.upper_bottom_tip(w.gw.view(), k_);
    }
    bar.arrive_and_wait();
    if (half == 0 && k_ > 0) {
        // V coupling: [[I, vtip],[wtip, I]] [v1b; v2t] = [0; y2t_v]
        DenseBlock red(2 * k_, kc);
        for (int c = 0; c < kc; ++c)
            for (int i = 0; i < k_; ++i) red.at(k_ + i, c) = w.y2t_v.at(i, c);
        reduced_.solve_inplace(red.view(), false, nullptr);
        w.v1b = copy_of(red.block(0, k_));
        w.v2t = copy_of(red.block(k_, k_));
        // W coupling: rhs [y1b_w; 0]
        DenseBlock redw(2 * k_, kc);
        for (int c = 0; c < kc; ++c)
            for (int i = 0; i < k_; ++i) redw.at(i, c) = w.y1b_w.at(i, c);
        reduced_.solve_inplace(redw.view(), false, nullptr);
        w.w1b = copy_of(redw.block(0, k_));
        w.w2t = copy_of(redw.block(k_, k_));
    }
    bar.arrive_and_wait();
    if (half == 0) {
        // V retrieval over the top half: U^-1(0 - L^-1 P [0; Bint v2t])
        DenseBlock corr = bottom_padded(split_, mul(bint_.view(), w.v2t.view()).view());
        top_.forward_lower(corr.view(), trunc_start(top_, k_), nullptr);
        negate(corr);
        top_.backward_upper(corr.view(), split_ - 1, half_sweeps);
        tips.vt = copy_of(corr.block(0, k_));
        // W retrieval: U^-1(gw - L^-1 P [0; Bint w2t])
        DenseBlock corr2 = bottom_padded(split_, mul(bint_.view(), w.w2t.view()).view());
        top_.forward_lower(corr2.view(), trunc_start(top_, k_), nullptr);
        subtract_inplace(w.gw.view(), corr2.view());
        top_.backward_upper(w.gw.view(), split_ - 1, half_sweeps);
        tips.wt = copy_of(w.gw.block(0, k_));
    } else {
        // V retrieval over the bottom half (reversed space)
        DenseBlock corr =
            bottom_padded(nb, reversed_rows(mul(cint_.view(), w.v1b.view()).view()).view());
        bottom_.rev().forward_lower(corr.view(), trunc_start(bottom_.rev(), k_), nullptr);
        subtract_inplace(w.hv.view(), corr.view());
        bottom_.rev().backward_upper(w.hv.view(), nb - 1, half_sweeps);
        tips.vb = copy_of(w.hv.block(0, k_));
        reverse_rows_inplace(tips.vb.view());
        // W retrieval: L^-1(0 - U^-1 [Cint w1b; 0])
        DenseBlock corr2 =
            bottom_padded(nb, reversed_rows(mul(cint_.view(), w.w1b.view()).view()).view());
        bottom_.rev().forward_lower(corr2.view(), trunc_start(bottom_.rev(), k_), nullptr);
        negate(corr2);
        bottom_.rev().backward_upper(corr2.view(), nb - 1, half_sweeps);
        tips.wb = copy_of(corr2.block(0, k_));
        reverse_rows_inplace(tips.wb.view());
    }
    bar.arrive_and_wait();
}

Spike2x2Factors factor_2x2(const BandedMatrix& a, bool pivoting, double boost_eps) {
    Spike2x2Factors fac;
    fac.prepare(a, 0, a.n(), pivoting, boost_eps);
    std::barrier<> bar(2);
    std::thread t1([&] { fac.factor_task(a, 1, bar); });
    fac.factor_task(a, 0, bar);
    t1.join();
    return fac;
}

DenseBlock solve_2x2(const Spike2x2Factors& fac, const DenseBlock& f, bool transpose,
                     SweepCounter* counter) {
    if (f.rows != fac.n()) throw std::invalid_argument("solve_2x2: F.rows mismatch");
    DenseBlock x(f.rows, f.cols);
    auto w = Spike2x2Factors::make_work(fac.k(), f.cols);
    std::barrier<> bar(2);
    long h0 = 0, h1 = 0;
    std::thread t1([&] {
        if (transpose)
            fac.solve_transpose_task(f.view(), x.view(), 1, bar, w, &h1);
        else
            fac.solve_task(f.view(), x.view(), 1, bar, w, &h1);
    });
    if (transpose)
        fac.solve_transpose_task(f.view(), x.view(), 0, bar, w, &h0);
    else
        fac.solve_task(f.view(), x.view(), 0, bar, w, &h0);
    t1.join();
    if (counter) counter->full_sweeps_solve += (h0 + h1) / 2;
    return x;
}

SpikeTips spikes_2x2(const Spike2x2Factors& fac, const DenseBlock& bhat, const DenseBlock& chat,
                     SweepCounter* counter) {
    SpikeTips tips;
    auto w = Spike2x2Factors::make_work(fac.k(), bhat.cols);
    std::barrier<> bar(2);
    long h0 = 0, h1 = 0;
    std::thread t1([&] { fac.spikes_task(bhat.view(), chat.view(), tips, 1, bar, w, &h1); });
    fac.spikes_task(bhat.view(), chat.view(), tips, 0, bar, w, &h0);
    t1.join();
    if (counter) counter->full_sweeps_factor += (h0 + h1) / 2;
    return tips;
}

} // namespace spike

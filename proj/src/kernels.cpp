#include "spike/kernels.hpp"

#include "spike/simd.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace spike {

namespace {

#ifndef NDEBUG
void check_zero_rows(ConstMatView b, int row_end) {
    for (int j = 0; j < b.cols; ++j)
        for (int i = 0; i < row_end; ++i)
            assert(b.at(i, j) == 0.0 && "truncated sweep precondition: leading rows not zero");
}
void check_zero_rows_tail(ConstMatView b, int row_begin) {
    for (int j = 0; j < b.cols; ++j)
        for (int i = row_begin; i < b.rows; ++i)
            assert(b.at(i, j) == 0.0 && "truncated sweep precondition: trailing rows not zero");
}
#endif

} // namespace

LUFactors::LUFactors(const BandedMatrix& a, int r0, int m, bool pivoting, double boost_eps,
                     bool reversed)
    : n_(m), kl_(reversed ? a.ku() : a.kl()), ku_(reversed ? a.kl() : a.ku()),
      pivoting_(pivoting), reversed_(reversed), boost_eps_(boost_eps) {
    if (r0 < 0 || m < 1 || r0 + m > a.n())
        throw std::invalid_argument("LUFactors: bad submatrix range");
    kl_ = std::min(kl_, m - 1);
    ku_ = std::min(ku_, m - 1);
    ubw_ = pivoting_ ? std::min(kl_ + ku_, m - 1) : ku_;
    d_ = ubw_;
    rows_ = ubw_ + kl_ + 1;
    band_.assign(static_cast<std::size_t>(rows_) * m, 0.0);
    piv_.resize(m);
    for (int j = 0; j < m; ++j) piv_[j] = j;
    if (!reversed) {
        for (int j = 0; j < m; ++j) {
            const int gj = r0 + j;
            const int i0 = std::max(0, j - ku_);
            const int i1 = std::min(m - 1, j + kl_);
            const double* src = a.col(gj) + (a.ku() + i0 - j);
            std::copy(src, src + (i1 - i0 + 1), col(j) + d_ + i0 - j);
        }
    } else {
        // Source columns ascending keeps the reads streaming; each band
        // segment lands row-reversed in the mirrored column.
        for (int sj = 0; sj < m; ++sj) {
            const int j = m - 1 - sj;
            const int gj = r0 + sj;
            const int i0 = std::max(0, j - ku_);
            const int i1 = std::min(m - 1, j + kl_);
            const double* lo = a.col(gj) + (a.ku() + j - i1);
            const double* hi = a.col(gj) + (a.ku() + j - i0);
            std::reverse_copy(lo, hi + 1, col(j) + d_ + i0 - j);
        }
    }
    factor();
}

LUFactors LUFactors::dense(ConstMatView m, double boost_eps) {
    assert(m.rows == m.cols);
    BandedMatrix a(std::max(m.rows, 1), std::max(m.rows - 1, 0), std::max(m.rows - 1, 0));
    for (int j = 0; j < m.cols; ++j)
        for (int i = 0; i < m.rows; ++i) a.set(i, j, m.at(i, j));
    try {
        return LUFactors(a, true, boost_eps);
    } catch (const std::runtime_error&) {
        return LUFactors(a, false, boost_eps);
    }
}

void LUFactors::factor() {
    const int m = n_;
    double amax = 0.0;
    for (double v : band_) amax = std::max(amax, std::abs(v));
    const double scale = amax == 0.0 ? 1.0 : amax;
    zero_thresh_ = std::numeric_limits<double>::epsilon() * scale;
    boost_mag_ = boost_eps_ * scale;

    for (int j = 0; j < m; ++j) {
        double* cj = col(j);
        const int rl = std::min(kl_, m - 1 - j);
        if (pivoting_) {
            int ip = j;
            double best = std::abs(cj[d_]);
            for (int r = 1; r <= rl; ++r)
                if (std::abs(cj[d_ + r]) > best) {
                    best = std::abs(cj[d_ + r]);
                    ip = j + r;
                }
            if (best == 0.0)
                throw std::runtime_error("lu_factor: exactly singular column in pivoting mode");
            piv_[j] = ip;
            if (ip != j) {
                const int cend = std::min(m - 1, j + ubw_);
                for (int c = j; c <= cend; ++c)
                    std::swap(col(c)[d_ + j - c], col(c)[d_ + ip - c]);
            }
        } else if (std::abs(cj[d_]) < zero_thresh_) {
            cj[d_] = cj[d_] == 0.0 ? boost_mag_ : std::copysign(boost_mag_, cj[d_]);
            ++boost_count_;
        }
        if (rl == 0) continue;
        simd::scale(1.0 / cj[d_], cj + d_ + 1, rl);
        const int cend = std::min(m - 1, j + ubw_);
        for (int c = j + 1; c <= cend; ++c) {
            const double ajc = col(c)[d_ + j - c];
            if (ajc != 0.0) simd::axpy(-ajc, cj + d_ + 1, col(c) + d_ + j - c + 1, rl);
        }
    }
}

double LUFactors::uval(int i, int j) const {
    if (i > j || j - i > ubw_) return 0.0;
    return col(j)[d_ + i - j];
}

double LUFactors::lval(int i, int j) const {
    if (i == j) return 1.0;
    if (i < j || i - j > kl_) return 0.0;
    return col(j)[d_ + i - j];
}

void LUFactors::forward_lower(MatView b, int start_col, long* full_sweeps) const {
    assert(b.rows == n_);
#ifndef NDEBUG
    check_zero_rows(b, std::max(0, start_col - (pivoting_ ? 0 : 0)));
#endif
    for (int j = start_col; j < n_; ++j) {
        if (pivoting_ && piv_[j] != j)
            for (int c = 0; c < b.cols; ++c) std::swap(b.at(j, c), b.at(piv_[j], c));
        const int rl = std::min(kl_, n_ - 1 - j);
        if (rl == 0) continue;
        const double* lj = col(j) + d_ + 1;
        for (int c = 0; c < b.cols; ++c) {
            const double bj = b.at(j, c);
            if (bj != 0.0) simd::axpy(-bj, lj, b.col(c) + j + 1, rl);
        }
    }
    if (full_sweeps && start_col == 0) ++*full_sweeps;
}

void LUFactors::forward_lower_tail(MatView tail, int start_col) const {
    assert(tail.rows == n_ - start_col);
    const int off = start_col;
    for (int j = start_col; j < n_; ++j) {
        if (pivoting_ && piv_[j] != j)
            for (int c = 0; c < tail.cols; ++c)
                std::swap(tail.at(j - off, c), tail.at(piv_[j] - off, c));
        const int rl = std::min(kl_, n_ - 1 - j);
        if (rl == 0) continue;
        const double* lj = col(j) + d_ + 1;
        for (int c = 0; c < tail.cols; ++c) {
            const double bj = tail.at(j - off, c);
            if (bj != 0.0) simd::axpy(-bj, lj, tail.col(c) + j - off + 1, rl);
        }
    }
}

void LUFactors::backward_upper(MatView b, int begin_col, long* full_sweeps) const {
    assert(b.rows == n_);
#ifndef NDEBUG
    if (begin_col < n_ - 1) check_zero_rows_tail(b, begin_col + 1);
#endif
    for (int j = begin_col; j >= 0; --j) {
        const double ujj = col(j)[d_];
        const int ul = std::min(ubw_, j);
        const double* uj = col(j) + d_ - ul;
        for (int c = 0; c < b.cols; ++c) {
            const double z = b.at(j, c) / ujj;
            b.at(j, c) = z;
            if (ul && z != 0.0) simd::axpy(-z, uj, b.col(c) + j - ul, ul);
        }
    }
    if (full_sweeps && begin_col == n_ - 1) ++*full_sweeps;
}

DenseBlock LUFactors::upper_bottom_tip(ConstMatView b, int r) const {
    assert(b.rows <= n_);
    r = std::min(r, b.rows);
    DenseBlock t(r, b.cols);
    const int off = n_ - r;
    for (int c = 0; c < b.cols; ++c)
        for (int i = 0; i < r; ++i) t.at(i, c) = b.at(b.rows - r + i, c);
    for (int j = n_ - 1; j >= off; --j) {
        const double ujj = col(j)[d_];
        const int jend = std::min(n_ - 1, j + ubw_);
        for (int c = 0; c < b.cols; ++c) {
            double s = t.at(j - off, c);
            for (int j2 = j + 1; j2 <= jend; ++j2) s -= col(j2)[d_ + j - j2] * t.at(j2 - off, c);
            t.at(j - off, c) = s / ujj;
        }
    }
    return t;
}

void LUFactors::forward_upperT(MatView b, long* full_sweeps) const {
    assert(b.rows == n_);
    for (int i = 0; i < n_; ++i) {
        const int ul = std::min(ubw_, i);
        const double* ui = col(i) + d_ - ul;
        const double uii = col(i)[d_];
        for (int c = 0; c < b.cols; ++c) {
            double s = b.at(i, c);
            if (ul) s -= simd::dot(ui, b.col(c) + i - ul, ul);
            b.at(i, c) = s / uii;
        }
    }
    if (full_sweeps) ++*full_sweeps;
}

void LUFactors::backward_lowerT(MatView b, long* full_sweeps) const {
    assert(b.rows == n_);
    // The band factorization interleaves swaps with eliminations, so the
    // transpose sweep interleaves each column's update with its swap.
    for (int i = n_ - 1; i >= 0; --i) {
        const int rl = std::min(kl_, n_ - 1 - i);
        if (rl > 0) {
            const double* li = col(i) + d_ + 1;
            for (int c = 0; c < b.cols; ++c)
                b.at(i, c) -= simd::dot(li, b.col(c) + i + 1, rl);
        }
        if (pivoting_ && piv_[i] != i)
            for (int c = 0; c < b.cols; ++c) std::swap(b.at(i, c), b.at(piv_[i], c));
    }
    if (full_sweeps) ++*full_sweeps;
}

DenseBlock LUFactors::lowerT_perm_bottom_tip(ConstMatView b, int r) const {
    assert(b.rows == n_);
    r = std::min(r, n_);
    // Window of r + kl rows: iterations below it only touch rows above the
    // requested tip, so the bottom r rows are final after the window pass.
    const int w = std::min(n_, r + (pivoting_ ? kl_ : 0));
    const int off = n_ - w;
    DenseBlock t(w, b.cols);
    for (int c = 0; c < b.cols; ++c)
        for (int i = 0; i < w; ++i) t.at(i, c) = b.at(off + i, c);
    for (int i = n_ - 1; i >= off; --i) {
        const int rl = std::min(kl_, n_ - 1 - i);
        if (rl > 0) {
            const double* li = col(i) + d_ + 1;
            for (int c = 0; c < b.cols; ++c)
                t.at(i - off, c) -= simd::dot(li, t.col(c) + i - off + 1, rl);
        }
        if (pivoting_ && piv_[i] != i)
            for (int c = 0; c < b.cols; ++c)
                std::swap(t.at(i - off, c), t.at(piv_[i] - off, c));
    }
    DenseBlock out(r, b.cols);
    for (int c = 0; c < b.cols; ++c)
        for (int i = 0; i < r; ++i) out.at(i, c) = t.at(w - r + i, c);
    return out;
}

void LUFactors::add_upperT_tail(MatView b, ConstMatView tail) const {
    assert(b.rows == n_ && tail.cols == b.cols);
    const int r = tail.rows;
    if (r == 0) return;
    const int off = n_ - r;
    DenseBlock z(r, b.cols);
    for (int i = off; i < n_; ++i) {
        const int ul = std::min(ubw_, i - off);
        const double uii = col(i)[d_];
        for (int c = 0; c < b.cols; ++c) {
            double s = tail.at(i - off, c);
            for (int j = i - ul; j < i; ++j) s -= col(i)[d_ + j - i] * z.at(j - off, c);
            z.at(i - off, c) = s / uii;
        }
    }
    for (int c = 0; c < b.cols; ++c)
        for (int i = 0; i < r; ++i) b.at(off + i, c) += z.at(i, c);
}

void LUFactors::solve_inplace(MatView b, bool transpose, long* full_sweeps) const {
    if (!transpose) {
        forward_lower(b, 0, full_sweeps);
        backward_upper(b, n_ - 1, full_sweeps);
    } else {
        forward_upperT(b, full_sweeps);
        backward_lowerT(b, full_sweeps);
    }
}

void ULFactors::solve_inplace(MatView b, bool transpose, long* full_sweeps) const {
    reverse_rows_inplace(b);
    rev_.solve_inplace(b, transpose, full_sweeps);
    reverse_rows_inplace(b);
}

LUFactors lu_factor(const BandedMatrix& a, bool pivoting, double boost_eps) {
    return LUFactors(a, pivoting, boost_eps);
}

ULFactors ul_factor(const BandedMatrix& a, bool pivoting, double boost_eps) {
    return ULFactors(a, pivoting, boost_eps);
}

DenseBlock sweep_lower(const LUFactors& f, const DenseBlock& b, int start_row,
                       SweepCounter* c) {
    DenseBlock out = b;
    f.forward_lower(out.view(), start_row, c ? &c->full_sweeps_solve : nullptr);
    return out;
}

DenseBlock sweep_upper(const LUFactors& f, const DenseBlock& b, int stop_row,
                       SweepCounter* c) {
    DenseBlock out = b;
    f.backward_upper(out.view(), stop_row, c ? &c->full_sweeps_solve : nullptr);
    return out;
}

DenseBlock solve_factored(const LUFactors& f, const DenseBlock& rhs, bool transpose,
                          SweepCounter* c) {
    DenseBlock out = rhs;
    f.solve_inplace(out.view(), transpose, c ? &c->full_sweeps_solve : nullptr);
    return out;
}

DenseBlock solve_factored(const ULFactors& f, const DenseBlock& rhs, bool transpose,
                          SweepCounter* c) {
    DenseBlock out = rhs;
    f.solve_inplace(out.view(), transpose, c ? &c->full_sweeps_solve : nullptr);
    return out;
}

} // namespace spike

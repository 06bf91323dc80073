#pragma once

#include "spike/banded_matrix.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace spike {

/// Full triangular sweeps per stage. A sweep counts as full only when it
/// spans every column of its partition; truncated sweeps of O(k) span are
/// excluded.
struct SweepCounter {
    long full_sweeps_factor = 0;
    long full_sweeps_solve = 0;
};

inline double default_boost_eps() {
    return std::sqrt(std::numeric_limits<double>::epsilon());
}

/// Packed band LU of a (sub)matrix: P*A = L*U with unit-lower L.
///
/// Non-pivoting mode keeps the input band (kl+ku+1 packed rows) and replaces
/// any pivot below eps*max|A| with +-boost_eps*max|A|, keeping the prior
/// sign. Pivoting mode carries kl fill rows (2*kl+ku+1), picks the largest
/// candidate among the <= kl+1 in-band rows (smallest row index on ties) and
/// throws on an exactly zero column segment.
///
/// Constructed with reversed=true the factorization applies to Q*A*Q (rows
/// and columns reversed, kl/ku swapped), which is how the UL path reuses LU.
class LUFactors {
public:
    LUFactors() = default;
    LUFactors(const BandedMatrix& a, int r0, int m, bool pivoting, double boost_eps,
              bool reversed = false);
    LUFactors(const BandedMatrix& a, bool pivoting, double boost_eps = default_boost_eps())
        : LUFactors(a, 0, a.n(), pivoting, boost_eps) {}

    /// Dense square block (used for the 2k coupling blocks of the reduced
    /// system). Falls back to a boosted non-pivoting factorization when the
    /// pivoted one meets an exactly singular column.
    static LUFactors dense(ConstMatView m, double boost_eps = default_boost_eps());

    int n() const { return n_; }
    int kl() const { return kl_; }
    int ku() const { return ku_; }
    bool pivoting() const { return pivoting_; }
    bool reversed() const { return reversed_; }
    int boost_count() const { return boost_count_; }
    double boost_magnitude() const { return boost_mag_; }
    const std::vector<int>& pivots() const { return piv_; }

    /// Factor entries, for reconstruction checks. lval implies unit diagonal.
    double uval(int i, int j) const;
    double lval(int i, int j) const;

    /// B := L^-1 P B over columns [start_col, n). Rows that the truncation
    /// skips must be zero (debug-checked); pivoting callers must leave kl
    /// further zero rows above the start. Counts a full sweep iff start_col
    /// is 0.
    void forward_lower(MatView b, int start_col, long* full_sweeps) const;

    /// Truncated lower sweep materializing only the trailing rows: tail
    /// covers system rows [start_col, n) and the skipped leading rows are
    /// implicitly zero. Never counted.
    void forward_lower_tail(MatView tail, int start_col) const;

    /// B := U^-1 B, back substitution over columns [0, begin_col]. Rows
    /// below begin_col must be zero unless begin_col == n-1 (full sweep).
    void backward_upper(MatView b, int begin_col, long* full_sweeps) const;

    /// Bottom r rows of U^-1 B; B untouched, never counted. The view's last
    /// row must align with system row n-1 (a bottom-tail view works).
    DenseBlock upper_bottom_tip(ConstMatView b, int r) const;

    /// B := U^-T B (downward pass; always a full sweep).
    void forward_upperT(MatView b, long* full_sweeps) const;

    /// B := P^T L^-T B (upward pass then permutation; always full).
    void backward_lowerT(MatView b, long* full_sweeps) const;

    /// Bottom r rows of P^T L^-T B; B untouched, never counted.
    DenseBlock lowerT_perm_bottom_tip(ConstMatView b, int r) const;

    /// B += U^-T [0; tail] with tail occupying the bottom tail.rows rows.
    /// The update only reaches those rows; never counted.
    void add_upperT_tail(MatView b, ConstMatView tail) const;

    /// Full solve; counts two full sweeps.
    void solve_inplace(MatView b, bool transpose, long* full_sweeps) const;

private:
    double* col(int j) { return band_.data() + static_cast<std::size_t>(j) * rows_; }
    const double* col(int j) const { return band_.data() + static_cast<std::size_t>(j) * rows_; }
    void factor();

    int n_ = 0, kl_ = 0, ku_ = 0;
    int ubw_ = 0;   // upper bandwidth after fill: ku (non-pivoting) or kl+ku
    int d_ = 0;     // packed row of the diagonal
    int rows_ = 0;  // packed rows per column
    bool pivoting_ = false, reversed_ = false;
    double boost_eps_ = 0.0, boost_mag_ = 0.0, zero_thresh_ = 0.0;
    int boost_count_ = 0;
    std::vector<double> band_;
    std::vector<int> piv_;
};

/// UL factorization realized as LU of the row-and-column reversed matrix:
/// A X = F  =>  X = Q (QAQ)^-1 Q F with Q the anti-diagonal permutation.
class ULFactors {
public:
    ULFactors() = default;
    ULFactors(const BandedMatrix& a, int r0, int m, bool pivoting, double boost_eps)
        : rev_(a, r0, m, pivoting, boost_eps, /*reversed=*/true) {}
    ULFactors(const BandedMatrix& a, bool pivoting, double boost_eps = default_boost_eps())
        : ULFactors(a, 0, a.n(), pivoting, boost_eps) {}

    int n() const { return rev_.n(); }
    int boost_count() const { return rev_.boost_count(); }

    /// The factors of QAQ; partition code drives these in reversed space.
    const LUFactors& rev() const { return rev_; }

    void solve_inplace(MatView b, bool transpose, long* full_sweeps) const;

private:
    LUFactors rev_;
};

LUFactors lu_factor(const BandedMatrix& a, bool pivoting,
                    double boost_eps = default_boost_eps());
ULFactors ul_factor(const BandedMatrix& a, bool pivoting,
                    double boost_eps = default_boost_eps());

/// Spec-level sweep wrappers; counts land in full_sweeps_solve.
DenseBlock sweep_lower(const LUFactors& f, const DenseBlock& b, int start_row,
                       SweepCounter* c = nullptr);
DenseBlock sweep_upper(const LUFactors& f, const DenseBlock& b, int stop_row,
                       SweepCounter* c = nullptr);
DenseBlock solve_factored(const LUFactors& f, const DenseBlock& rhs, bool transpose,
                          SweepCounter* c = nullptr);
DenseBlock solve_factored(const ULFactors& f, const DenseBlock& rhs, bool transpose,
                          SweepCounter* c = nullptr);

} // namespace spike

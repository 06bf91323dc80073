#pragma once

#include "spike/banded_matrix.hpp"
#include "spike/kernels.hpp"

#include <barrier>

namespace spike {

/// k-by-k corner block A[row0..row0+rows) x [col0..col0+cols); entries the
/// band does not cover come back as zero.
DenseBlock band_corner(const BandedMatrix& a, int row0, int col0, int rows, int cols);

struct SpikeTips {
    DenseBlock vt, vb, wt, wb;
};

/// Two-partition SPIKE kernel: LU on the top half, UL on the bottom half,
/// one factored 2k coupling block. Used standalone as the p=2 solver and as
/// the dual-thread engine for inner partitions.
///
/// Every *_task method is written to be entered by exactly two cooperating
/// threads (half 0 = top, half 1 = bottom) sharing the barrier. Sweep counts
/// are per half; a pair of concurrent half-sweeps is one full-sweep unit.
class Spike2x2Factors {
public:
    struct Work; // shared per-call scratch, defined in the .cpp

    Spike2x2Factors() = default;

    /// Geometry and corner blocks for A[r0..r0+m); no factorization yet.
    void prepare(const BandedMatrix& a, int r0, int m, bool pivoting, double boost_eps);

    void factor_task(const BandedMatrix& a, int half, std::barrier<>& bar);

    /// X := A^-1 F. Two half-sweeps per half (one unit for the pair, twice).
    void solve_task(ConstMatView f, MatView x, int half, std::barrier<>& bar, Work& w,
                    long* half_sweeps) const;

    /// X := A^-T F, same budget as the forward solve.
    void solve_transpose_task(ConstMatView f, MatView x, int half, std::barrier<>& bar,
                              Work& w, long* half_sweeps) const;

    /// Tips of the enclosing partition's spikes V = A^-1 [0; bhat] and
    /// W = A^-1 [chat; 0]; three half-sweeps per half.
    void spikes_task(ConstMatView bhat, ConstMatView chat, SpikeTips& tips, int half,
                     std::barrier<>& bar, Work& w, long* half_sweeps) const;

    int n() const { return n_; }
    int k() const { return k_; }
    int split() const { return split_; }
    int boost_count() const { return top_.boost_count() + bottom_.boost_count(); }
    const DenseBlock& vtip() const { return vtip_; }
    const DenseBlock& wtip() const { return wtip_; }
    const LUFactors& reduced() const { return reduced_; }

    static Work make_work(int k, int nrhs);

private:
    int r0_ = 0, n_ = 0, k_ = 0, split_ = 0;
    bool pivoting_ = false;
    double boost_eps_ = 0.0;
    LUFactors top_;
    ULFactors bottom_;
    DenseBlock bint_, cint_; // internal corner blocks at the split
    DenseBlock vtip_, wtip_; // bottom tip of A1^-1[0;Bint], top tip of A2^-1[Cint;0]
    LUFactors reduced_;      // [[I, vtip],[wtip, I]]
};

struct Spike2x2Factors::Work {
    DenseBlock y1b, y2t;     // D-stage tips
    DenseBlock x1b, x2t;     // coupling solution
    DenseBlock red;          // 2k x nrhs coupling buffer
    DenseBlock tau0, tau1;   // transpose S-stage tips
    DenseBlock rx;           // bottom half workspace, reversed row order
    DenseBlock hv, gw;       // spike-generation half workspaces
    // spike generation interface values
    DenseBlock y2t_v, y1b_w, v1b, v2t, w1b, w2t;
};

/// Standalone wrappers; each spawns the two cooperating tasks.
Spike2x2Factors factor_2x2(const BandedMatrix& a, bool pivoting,
                           double boost_eps = default_boost_eps());
DenseBlock solve_2x2(const Spike2x2Factors& fac, const DenseBlock& f, bool transpose = false,
                     SweepCounter* counter = nullptr);
SpikeTips spikes_2x2(const Spike2x2Factors& fac, const DenseBlock& bhat, const DenseBlock& chat,
                     SweepCounter* counter = nullptr);

} // namespace spike

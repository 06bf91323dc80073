#include "spike/oracle.hpp"

#include "spike/band_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace spike {

namespace {

// Padded band factorization working state: 2*kl+ku+1 rows per column, entry
// (i,j) at row kl+ku+i-j. Plain textbook elimination.
struct BandGE {
    int n, kl, ku, ubw, d;
    std::vector<double> ab;
    std::vector<int> piv;
    int sign = 1;
    int boosts = 0;

    BandGE(const BandedMatrix& a, bool pivoting)
        : n(a.n()), kl(a.kl()), ku(a.ku()), ubw(kl + ku), d(kl + ku),
          ab(static_cast<std::size_t>(2 * kl + ku + 1) * a.n(), 0.0), piv(a.n()) {
        const int rows = 2 * kl + ku + 1;
        for (int j = 0; j < n; ++j) {
            const int i0 = std::max(0, j - ku);
            const int i1 = std::min(n - 1, j + kl);
            for (int i = i0; i <= i1; ++i)
                ab[static_cast<std::size_t>(j) * rows + (d + i - j)] = a.at(i, j);
        }
        double amax = 0.0;
        for (double v : ab) amax = std::max(amax, std::abs(v));
        const double scale = amax == 0.0 ? 1.0 : amax;
        const double zthresh = std::numeric_limits<double>::epsilon() * scale;
        const double bmag = std::sqrt(std::numeric_limits<double>::epsilon()) * scale;

        for (int j = 0; j < n; ++j) {
            double* cj = col(j);
            const int rl = std::min(kl, n - 1 - j);
            int ip = j;
            if (pivoting) {
                double best = std::abs(cj[d]);
                for (int r = 1; r <= rl; ++r)
                    if (std::abs(cj[d + r]) > best) {
                        best = std::abs(cj[d + r]);
                        ip = j + r;
                    }
                if (best == 0.0) throw std::runtime_error("oracle_solve: singular matrix");
                if (ip != j) {
                    sign = -sign;
                    const int cend = std::min(n - 1, j + ubw);
                    for (int c = j; c <= cend; ++c)
                        std::swap(col(c)[d + j - c], col(c)[d + ip - c]);
                }
            } else if (std::abs(cj[d]) < zthresh) {
                cj[d] = cj[d] == 0.0 ? bmag : std::copysign(bmag, cj[d]);
                ++boosts;
            }
            piv[j] = ip;
            const double pv = cj[d];
            for (int r = 1; r <= rl; ++r) cj[d + r] /= pv;
            const int cend = std::min(n - 1, j + ubw);
            for (int c = j + 1; c <= cend; ++c) {
                const double ajc = col(c)[d + j - c];
                if (ajc == 0.0) continue;
                for (int r = 1; r <= rl; ++r) col(c)[d + j + r - c] -= cj[d + r] * ajc;
            }
        }
    }

    double* col(int j) {
        return ab.data() + static_cast<std::size_t>(j) * (2 * kl + ku + 1);
    }
    const double* col(int j) const {
        return ab.data() + static_cast<std::size_t>(j) * (2 * kl + ku + 1);
    }

    void solve_inplace(DenseBlock& b) const {
        for (int c = 0; c < b.cols; ++c) {
            double* x = b.col(c);
            for (int j = 0; j < n; ++j) {
                if (piv[j] != j) std::swap(x[j], x[piv[j]]);
                const int rl = std::min(kl, n - 1 - j);
                for (int r = 1; r <= rl; ++r) x[j + r] -= col(j)[d + r] * x[j];
            }
            for (int j = n - 1; j >= 0; --j) {
                x[j] /= col(j)[d];
                const int ul = std::min(ubw, j);
                for (int r = 1; r <= ul; ++r) x[j - r] -= col(j)[d - r] * x[j];
            }
        }
    }

    int det_sign() const {
        int s = sign;
        for (int j = 0; j < n; ++j) {
            const double u = col(j)[d];
            if (u == 0.0) return 0;
            if (u < 0.0) s = -s;
        }
        return s;
    }
};

} // namespace

DenseBlock oracle_solve(const BandedMatrix& a, const DenseBlock& f, bool transpose,
                        bool pivoting) {
    if (f.rows != a.n()) throw std::invalid_argument("oracle_solve: F.rows must equal n");
    if (transpose) {
        BandedMatrix at = band_transpose(a);
        return oracle_solve(at, f, false, pivoting);
    }
    BandGE ge(a, pivoting);
    DenseBlock x = f;
    ge.solve_inplace(x);
    return x;
}

int oracle_det_sign(const BandedMatrix& a) {
    try {
        BandGE ge(a, true);
        return ge.det_sign();
    } catch (const std::runtime_error&) {
        return 0;
    }
}

double condition_estimate_1norm(const BandedMatrix& a) {
    const int n = a.n();
    BandGE fwd(a, true);
    BandedMatrix at = band_transpose(a);
    BandGE bwd(at, true);

    // Hager's estimator for ||A^-1||_1.
    DenseBlock x(n, 1);
    for (int i = 0; i < n; ++i) x.at(i, 0) = 1.0 / n;
    double est = 0.0;
    for (int iter = 0; iter < 6; ++iter) {
        DenseBlock y = x;
        fwd.solve_inplace(y);
        double ynorm = 0.0;
        for (int i = 0; i < n; ++i) ynorm += std::abs(y.at(i, 0));
        est = std::max(est, ynorm);
        DenseBlock xi(n, 1);
        for (int i = 0; i < n; ++i) xi.at(i, 0) = y.at(i, 0) >= 0.0 ? 1.0 : -1.0;
        bwd.solve_inplace(xi);
        int jmax = 0;
        double zmax = 0.0, zdotx = 0.0;
        for (int i = 0; i < n; ++i) {
            const double az = std::abs(xi.at(i, 0));
            zdotx += xi.at(i, 0) * x.at(i, 0);
            if (az > zmax) {
                zmax = az;
                jmax = i;
            }
        }
        if (zmax <= zdotx) break;
        x = DenseBlock(n, 1);
        x.at(jmax, 0) = 1.0;
    }
    return est * norm1(a);
}

} // namespace spike

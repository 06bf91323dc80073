#include "spike/band_ops.hpp"

#include "spike/simd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spike {

DenseBlock band_matmul(const BandedMatrix& a, const DenseBlock& x, bool transpose) {
    const int n = a.n();
    if (x.rows != n) throw std::invalid_argument("band_matmul: X.rows must equal n");
    DenseBlock y(n, x.cols);
    if (!transpose) {
        // y[i0..i1, c] += A(i,j) * x(j,c), column j of A is contiguous in y.
        for (int j = 0; j < n; ++j) {
            const int i0 = std::max(0, j - a.ku());
            const int i1 = std::min(n - 1, j + a.kl());
            const double* acol = a.col(j) + (a.ku() + i0 - j);
            const int len = i1 - i0 + 1;
            for (int c = 0; c < x.cols; ++c)
                simd::axpy(x.at(j, c), acol, y.col(c) + i0, len);
        }
    } else {
        // y(j,c) = dot(column j of A, x rows of that column's band).
        for (int j = 0; j < n; ++j) {
            const int i0 = std::max(0, j - a.ku());
            const int i1 = std::min(n - 1, j + a.kl());
            const double* acol = a.col(j) + (a.ku() + i0 - j);
            const int len = i1 - i0 + 1;
            for (int c = 0; c < x.cols; ++c)
                y.at(j, c) = simd::dot(acol, x.col(c) + i0, len);
        }
    }
    return y;
}

double frobenius_norm(const DenseBlock& b) {
    double s = 0.0;
    for (double v : b.data) s += v * v;
    return std::sqrt(s);
}

double relative_residual(const BandedMatrix& a, const DenseBlock& x, const DenseBlock& f,
                         bool transpose) {
    if (x.rows != a.n() || f.rows != a.n() || x.cols != f.cols)
        throw std::invalid_argument("relative_residual: inconsistent shapes");
    const double fn = frobenius_norm(f);
    if (fn == 0.0) {
        if (frobenius_norm(x) == 0.0) return 0.0;
        throw std::domain_error("relative_residual: F is zero but X is not");
    }
    DenseBlock r = band_matmul(a, x, transpose);
    for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] -= f.data[i];
    return frobenius_norm(r) / fn;
}

double norm1(const BandedMatrix& a) {
    double best = 0.0;
    for (int j = 0; j < a.n(); ++j) {
        const int i0 = std::max(0, j - a.ku());
        const int i1 = std::min(a.n() - 1, j + a.kl());
        double s = 0.0;
        for (int i = i0; i <= i1; ++i) s += std::abs(a.at(i, j));
        best = std::max(best, s);
    }
    return best;
}

double max_abs(const BandedMatrix& a) {
    double best = 0.0;
    for (double v : a.data()) best = std::max(best, std::abs(v));
    return best;
}

BandedMatrix band_transpose(const BandedMatrix& a) {
    BandedMatrix t(a.n(), a.ku(), a.kl());
    for (int j = 0; j < a.n(); ++j) {
        const int i0 = std::max(0, j - a.ku());
        const int i1 = std::min(a.n() - 1, j + a.kl());
        for (int i = i0; i <= i1; ++i) t.set(j, i, a.at(i, j));
    }
    return t;
}

} // namespace spike

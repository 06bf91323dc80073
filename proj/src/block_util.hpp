#pragma once

#include "spike/banded_matrix.hpp"
#include "spike/kernels.hpp"
#include "spike/simd.hpp"

#include <algorithm>

namespace spike::detail {

/// Truncated start row for a lower sweep over [0_pad; corner]; pivoting
/// needs kl extra rows of runway above the corner.
inline int trunc_start(const LUFactors& f, int corner_rows) {
    const int pad = f.pivoting() ? f.kl() : 0;
    return std::max(0, f.n() - corner_rows - pad);
}

inline DenseBlock bottom_padded(int rows, ConstMatView prod) {
    DenseBlock b(rows, prod.cols);
    for (int c = 0; c < prod.cols; ++c)
        for (int i = 0; i < prod.rows; ++i) b.at(rows - prod.rows + i, c) = prod.at(i, c);
    return b;
}

inline DenseBlock top_padded(int rows, ConstMatView prod) {
    DenseBlock b(rows, prod.cols);
    for (int c = 0; c < prod.cols; ++c)
        for (int i = 0; i < prod.rows; ++i) b.at(i, c) = prod.at(i, c);
    return b;
}

inline DenseBlock mul(ConstMatView a, ConstMatView b) {
    DenseBlock out(a.rows, b.cols);
    for (int j = 0; j < b.cols; ++j)
        for (int l = 0; l < a.cols; ++l)
            simd::axpy(b.at(l, j), a.col(l), out.col(j), a.rows);
    return out;
}

inline void negate(DenseBlock& b) {
    for (double& v : b.data) v = -v;
}

} // namespace spike::detail

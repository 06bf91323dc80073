#include "spike/banded_matrix.hpp"

#include "spike/simd.hpp"

#include <algorithm>
#include <cassert>

namespace spike {

DenseBlock copy_of(ConstMatView v) {
    DenseBlock out(v.rows, v.cols);
    assign(out.view(), v);
    return out;
}

void assign(MatView dst, ConstMatView src) {
    assert(dst.rows == src.rows && dst.cols == src.cols);
    for (int j = 0; j < src.cols; ++j)
        std::copy(src.col(j), src.col(j) + src.rows, dst.col(j));
}

void subtract_inplace(MatView dst, ConstMatView src) {
    assert(dst.rows == src.rows && dst.cols == src.cols);
    for (int j = 0; j < src.cols; ++j)
        simd::axpy(-1.0, src.col(j), dst.col(j), src.rows);
}

void reverse_rows_inplace(MatView v) {
    for (int j = 0; j < v.cols; ++j) std::reverse(v.col(j), v.col(j) + v.rows);
}

DenseBlock reversed_rows(ConstMatView v) {
    DenseBlock out(v.rows, v.cols);
    for (int j = 0; j < v.cols; ++j)
        std::reverse_copy(v.col(j), v.col(j) + v.rows, out.col(j));
    return out;
}

void gemm_minus(MatView c, ConstMatView a, ConstMatView b) {
    assert(a.rows == c.rows && a.cols == b.rows && b.cols == c.cols);
    for (int j = 0; j < c.cols; ++j)
        for (int l = 0; l < a.cols; ++l)
            simd::axpy(-b.at(l, j), a.col(l), c.col(j), a.rows);
}

void gemm_minus_t(MatView c, ConstMatView a, ConstMatView b) {
    assert(a.cols == c.rows && a.rows == b.rows && b.cols == c.cols);
    for (int j = 0; j < c.cols; ++j)
        for (int i = 0; i < c.rows; ++i)
            c.at(i, j) -= simd::dot(a.col(i), b.col(j), a.rows);
}

} // namespace spike

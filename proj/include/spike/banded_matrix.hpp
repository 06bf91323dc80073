#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace spike {

/// Band-packed square matrix, the A of AX=F.
///
/// Entry (i,j) with -ku <= i-j <= kl lives at packed row ku+i-j of column j;
/// the packed array has kl+ku+1 rows and n columns, column-major. Entries
/// outside the band read as exact zero and cannot be written.
class BandedMatrix {
public:
    BandedMatrix() = default;

    BandedMatrix(int n, int kl, int ku) : n_(n), kl_(kl), ku_(ku) {
        if (n < 1) throw std::invalid_argument("BandedMatrix: n must be >= 1");
        if (kl < 0 || ku < 0 || kl >= n || ku >= n)
            throw std::invalid_argument("BandedMatrix: need 0 <= kl,ku < n");
        data_.assign(static_cast<std::size_t>(ld()) * n, 0.0);
    }

    static BandedMatrix identity(int n) {
        BandedMatrix a(n, 0, 0);
        for (int j = 0; j < n; ++j) a.set(j, j, 1.0);
        return a;
    }

    int n() const { return n_; }
    int kl() const { return kl_; }
    int ku() const { return ku_; }
    int ld() const { return kl_ + ku_ + 1; }

    bool in_band(int i, int j) const {
        return i >= 0 && i < n_ && j >= 0 && j < n_ && i - j <= kl_ && j - i <= ku_;
    }

    double at(int i, int j) const {
        if (i < 0 || i >= n_ || j < 0 || j >= n_)
            throw std::out_of_range("BandedMatrix::at: index out of range");
        if (i - j > kl_ || j - i > ku_) return 0.0;
        return data_[idx(i, j)];
    }

    void set(int i, int j, double v) {
        if (!in_band(i, j))
            throw std::out_of_range("BandedMatrix::set: entry outside the band");
        data_[idx(i, j)] = v;
    }

    /// Packed column pointer; rows run over diagonals ku+i-j = 0..kl+ku.
    double* col(int j) { return data_.data() + static_cast<std::size_t>(j) * ld(); }
    const double* col(int j) const { return data_.data() + static_cast<std::size_t>(j) * ld(); }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(j) * ld() + static_cast<std::size_t>(ku_ + i - j);
    }

    int n_ = 0, kl_ = 0, ku_ = 0;
    std::vector<double> data_;
};

struct MatView;
struct ConstMatView;

/// Column-major dense block; holds F, X, Y, G and the k-by-k spike tips.
struct DenseBlock {
    int rows = 0, cols = 0;
    std::vector<double> data;

    DenseBlock() = default;
    DenseBlock(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {
        if (r < 0 || c < 0) throw std::invalid_argument("DenseBlock: negative shape");
    }

    double& at(int i, int j) { return data[static_cast<std::size_t>(j) * rows + i]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(j) * rows + i]; }
    double* col(int j) { return data.data() + static_cast<std::size_t>(j) * rows; }
    const double* col(int j) const { return data.data() + static_cast<std::size_t>(j) * rows; }

    MatView view();
    ConstMatView view() const;
    MatView block(int row0, int nrows);
    ConstMatView block(int row0, int nrows) const;
};

/// Strided view over a row range of a DenseBlock (or any column-major data).
struct MatView {
    double* p = nullptr;
    int rows = 0, cols = 0, ld = 0;

    double& at(int i, int j) const { return p[static_cast<std::size_t>(j) * ld + i]; }
    double* col(int j) const { return p + static_cast<std::size_t>(j) * ld; }
    MatView block(int row0, int nrows) const { return {p + row0, nrows, cols, ld}; }
};

struct ConstMatView {
    const double* p = nullptr;
    int rows = 0, cols = 0, ld = 0;

    ConstMatView() = default;
    ConstMatView(const MatView& v) : p(v.p), rows(v.rows), cols(v.cols), ld(v.ld) {}
    double at(int i, int j) const { return p[static_cast<std::size_t>(j) * ld + i]; }
    const double* col(int j) const { return p + static_cast<std::size_t>(j) * ld; }
    ConstMatView block(int row0, int nrows) const { return {p + row0, nrows, cols, ld}; }

private:
    ConstMatView(const double* q, int r, int c, int l) : p(q), rows(r), cols(c), ld(l) {}
};

inline MatView DenseBlock::view() { return {data.data(), rows, cols, rows}; }
inline ConstMatView DenseBlock::view() const { return MatView{const_cast<double*>(data.data()), rows, cols, rows}; }
inline MatView DenseBlock::block(int row0, int nrows) { return view().block(row0, nrows); }
inline ConstMatView DenseBlock::block(int row0, int nrows) const {
    return view().block(row0, nrows);
}

/// Copy a view into a fresh block.
DenseBlock copy_of(ConstMatView v);
/// dst := src (shapes must match).
void assign(MatView dst, ConstMatView src);
/// dst -= src
void subtract_inplace(MatView dst, ConstMatView src);
/// Reverse the row order (the Q permutation of the UL trick).
void reverse_rows_inplace(MatView v);
DenseBlock reversed_rows(ConstMatView v);
/// C -= A*B and C -= A^T*B for small dense blocks.
void gemm_minus(MatView c, ConstMatView a, ConstMatView b);
void gemm_minus_t(MatView c, ConstMatView a, ConstMatView b);

} // namespace spike

#pragma once

#include "spike/banded_matrix.hpp"

namespace spike {

/// A*X or A^T*X by direct band traversal.
DenseBlock band_matmul(const BandedMatrix& a, const DenseBlock& x, bool transpose = false);

/// ||A*X - F||_F / ||F||_F (or A^T). Returns 0 for the all-zero system;
/// throws std::domain_error when F is zero but X is not (degenerate metric).
double relative_residual(const BandedMatrix& a, const DenseBlock& x, const DenseBlock& f,
                         bool transpose = false);

double frobenius_norm(const DenseBlock& b);

/// Max absolute column sum.
double norm1(const BandedMatrix& a);

/// Largest absolute entry.
double max_abs(const BandedMatrix& a);

BandedMatrix band_transpose(const BandedMatrix& a);

} // namespace spike

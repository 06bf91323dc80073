#pragma once

#include "spike/banded_matrix.hpp"

namespace spike {

/// Serial banded Gaussian elimination used as ground truth. Deliberately
/// independent of the parallel solver: plain loops, own storage, no shared
/// sweep kernels. Non-pivoting mode boosts exact/near-zero pivots; pivoting
/// mode throws on an exactly singular column.
DenseBlock oracle_solve(const BandedMatrix& a, const DenseBlock& f, bool transpose = false,
                        bool pivoting = true);

/// Sign of det(A) via pivoted elimination: -1, 0 or +1.
int oracle_det_sign(const BandedMatrix& a);

/// 1-norm condition estimate: exact ||A||_1 times a Hager-style estimate of
/// ||A^-1||_1 driven by oracle solves. Two significant digits of accuracy is
/// all the accuracy study needs.
double condition_estimate_1norm(const BandedMatrix& a);

} // namespace spike

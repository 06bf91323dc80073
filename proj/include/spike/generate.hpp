#pragma once

#include "spike/banded_matrix.hpp"

#include <cstdint>

namespace spike {

struct RngSeed {
    std::uint64_t value = 42;
};

/// Random banded matrix with a controlled degree of diagonal dominance.
///
/// In-band off-diagonal entries are uniform in (0,1); the diagonal of column
/// j is set to dd times the column's off-diagonal sum, so the measured DD of
/// the result equals dd whenever the band is non-empty. For n=1 with an
/// empty band the diagonal is 0 (empty sum); callers wanting a nonsingular
/// 1x1 matrix must floor dd themselves.
BandedMatrix generate_banded(int n, int kl, int ku, double dd, RngSeed seed);

/// min over columns i of |A(i,i)| / sum_{j != i} |A(j,i)|.
/// Returns +infinity when every off-diagonal column sum is zero.
double degree_of_diagonal_dominance(const BandedMatrix& a);

/// Uniform(0,1) dense block, deterministic in the seed.
DenseBlock random_block(int rows, int cols, RngSeed seed);

} // namespace spike

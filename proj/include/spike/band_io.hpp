#pragma once

#include "spike/banded_matrix.hpp"

#include <optional>
#include <string>

namespace spike {

enum class MatrixFormat { MatrixMarket, Spkb };

/// Write in Matrix Market coordinate (1-based, real general) or the native
/// binary format: magic "SPKB", then n, kl, ku as little-endian int64, then
/// (kl+ku+1)*n IEEE-754 doubles in packed column order.
void write_matrix(const BandedMatrix& a, const std::string& path, MatrixFormat fmt);

/// Reads either format (sniffed from the leading bytes). When expected_kl /
/// expected_ku are given, a Matrix Market entry outside that band is an
/// error; otherwise the band is inferred from the entries. Round-trips are
/// bit-exact in both formats.
BandedMatrix read_matrix(const std::string& path, std::optional<int> expected_kl = {},
                         std::optional<int> expected_ku = {});

/// Dense blocks travel as Matrix Market array format.
void write_dense(const DenseBlock& b, const std::string& path);
DenseBlock read_dense(const std::string& path);

} // namespace spike

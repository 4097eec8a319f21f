#pragma once

#include "kernmoment/common.hpp"

#include <filesystem>

namespace kernmoment {

// On-disk measurement matrices.
//
// CSV: one line per matrix row, comma-separated, '.' decimal point, no header.
// Values are written with 17 significant digits so they round-trip exactly.
//
// KMM1 binary: the four bytes "KMM1", then u64 P, u64 Q, then P*Q f64 in
// row-major order. All integers and floats are little-endian.

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

void write_matrix_kmm1(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_kmm1(const std::filesystem::path& path);

/// Dispatches on the extension: ".bin"/".kmm" → KMM1, anything else → CSV.
void write_matrix(const std::filesystem::path& path, const Matrix& m);
/// Sniffs the KMM1 magic; falls back to CSV.
Matrix read_matrix(const std::filesystem::path& path);

}  // namespace kernmoment

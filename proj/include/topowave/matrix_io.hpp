#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "topowave/common.hpp"

namespace topowave {

// Raw binary matrix layout ("HPMX"):
//   4 bytes  magic "HPMX"
//   u32 LE   rows
//   u32 LE   cols
//   rows*cols f64 LE, row-major
inline constexpr char kMatrixMagic[4] = {'H', 'P', 'M', 'X'};

void write_hpmx(std::ostream& out, const Matrix& m);
Matrix read_hpmx(std::istream& in, const std::string& source_name);

void write_hpmx_file(const std::filesystem::path& path, const Matrix& m);

/// Reads a comma-separated matrix. A first row in which no cell parses as a
/// number is treated as a header. Non-finite values are rejected with the
/// 1-based data row in the message.
Matrix read_csv_matrix(std::istream& in, const std::string& source_name);

/// Dispatches on the leading magic bytes: HPMX binary or CSV text.
Matrix read_matrix_file(const std::filesystem::path& path);

void write_csv_matrix(std::ostream& out, const Matrix& m);

}  // namespace topowave

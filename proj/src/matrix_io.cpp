#include "topowave/matrix_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace topowave {

namespace {

static_assert(std::endian::native == std::endian::little,
              "HPMX I/O assumes a little-endian host");

void put_u32(std::ostream& out, std::uint32_t v) {
    std::array<char, 4> b{};
    std::memcpy(b.data(), &v, 4);
    out.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& in, const std::string& source) {
    std::array<char, 4> b{};
    if (!in.read(b.data(), 4)) throw LoadError(source + ": truncated HPMX header");
    std::uint32_t v = 0;
    std::memcpy(&v, b.data(), 4);
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return cells;
}

bool parse_double(std::string_view cell, double& out) {
    if (cell.empty()) return false;
    if (cell.front() == '+') cell.remove_prefix(1);
    const auto* end = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(cell.data(), end, out);
    return ec == std::errc() && ptr == end;
}

}  // namespace

void write_hpmx(std::ostream& out, const Matrix& m) {
    out.write(kMatrixMagic, 4);
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            out.write(reinterpret_cast<const char*>(&v), sizeof(double));
        }
    }
}

Matrix read_hpmx(std::istream& in, const std::string& source) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMatrixMagic, 4) != 0)
        throw LoadError(source + ": missing HPMX magic bytes");
    const std::uint32_t rows = get_u32(in, source);
    const std::uint32_t cols = get_u32(in, source);
    Matrix m(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i) {
        for (std::uint32_t j = 0; j < cols; ++j) {
            double v = 0;
            if (!in.read(reinterpret_cast<char*>(&v), sizeof(double)))
                throw LoadError(source + ": truncated HPMX payload at row " + std::to_string(i + 1));
            if (!std::isfinite(v))
                throw LoadError(source + ": non-finite value at row " + std::to_string(i + 1) +
                                ", column " + std::to_string(j + 1));
            m(i, j) = v;
        }
    }
    return m;
}

void write_hpmx_file(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_hpmx(out, m);
}

Matrix read_csv_matrix(std::istream& in, const std::string& source) {
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::size_t line_no = 0;
    bool first_content_line = true;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_commas(line);
        if (first_content_line) {
            first_content_line = false;
            bool any_numeric = false;
            double scratch = 0;
            for (auto c : cells) any_numeric = any_numeric || parse_double(c, scratch);
            if (!any_numeric) continue;  // header row
        }
        const std::size_t row = rows + 1;
        if (cols == 0) {
            cols = cells.size();
        } else if (cells.size() != cols) {
            throw LoadError(source + ": ragged row " + std::to_string(row) + " (line " +
                            std::to_string(line_no) + "): expected " + std::to_string(cols) +
                            " columns, found " + std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0;
            if (!parse_double(cells[c], v))
                throw LoadError(source + ": non-numeric cell '" + std::string(cells[c]) + "' at row " +
                                std::to_string(row) + ", column " + std::to_string(c + 1));
            if (!std::isfinite(v))
                throw LoadError(source + ": non-finite value at row " + std::to_string(row) +
                                ", column " + std::to_string(c + 1));
            values.push_back(v);
        }
        ++rows;
    }
    if (rows == 0 || cols == 0) throw LoadError(source + ": no data rows");
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = values[i * cols + j];
    return m;
}

Matrix read_matrix_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError(path.string() + ": file not found or unreadable");
    char magic[4] = {};
    in.read(magic, 4);
    const bool binary = in.gcount() == 4 && std::memcmp(magic, kMatrixMagic, 4) == 0;
    in.clear();
    in.seekg(0);
    return binary ? read_hpmx(in, path.string()) : read_csv_matrix(in, path.string());
}

void write_csv_matrix(std::ostream& out, const Matrix& m) {
    std::ostringstream buf;
    buf << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) buf << ',';
            buf << m(i, j);
        }
        buf << '\n';
    }
    out << buf.str();
}

}  // namespace topowave

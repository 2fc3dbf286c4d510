// SPDX-FileCopyrightText: © 2026 The stsa Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace stsa {

/// Dense row-major matrix of signed integers.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::int64_t> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, std::int64_t fill = 0) : rows(r), cols(c), data(r * c, fill) {}

    std::int64_t& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    std::int64_t operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool empty() const { return rows == 0 || cols == 0; }

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Copies `m` into the top-left corner of a zero matrix of the given size.
Matrix zero_pad(const Matrix& m, std::size_t rows, std::size_t cols);

/// Sub-matrix starting at (row, col); cells beyond `m` read as zero.
Matrix slice(const Matrix& m, std::size_t row, std::size_t col, std::size_t rows, std::size_t cols);

// CSV: one matrix row per line, comma-separated signed decimal integers.
// Throws UsageError on ragged rows, non-integer cells or an empty matrix.
Matrix parse_csv(std::string_view text);
Matrix read_csv(const std::filesystem::path& path);
void write_csv(std::ostream& out, const Matrix& m);
void write_csv(const std::filesystem::path& path, const Matrix& m);

}  // namespace stsa

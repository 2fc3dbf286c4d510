// SPDX-FileCopyrightText: © 2026 The stsa Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "stsa/matrix.hpp"

#include "stsa/arith.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

namespace stsa {

Matrix zero_pad(const Matrix& m, std::size_t rows, std::size_t cols)
{
    if (rows < m.rows || cols < m.cols) {
        throw UsageError("zero_pad: target is smaller than the source matrix");
    }
    return slice(m, 0, 0, rows, cols);
}

Matrix slice(const Matrix& m, std::size_t row, std::size_t col, std::size_t rows, std::size_t cols)
{
    Matrix out(rows, cols);
    for (std::size_t r = 0; r < rows && row + r < m.rows; ++r) {
        for (std::size_t c = 0; c < cols && col + c < m.cols; ++c) {
            out(r, c) = m(row + r, col + c);
        }
    }
    return out;
}

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

Matrix parse_csv(std::string_view text)
{
    Matrix m;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty()) {
            continue;
        }

        std::size_t cells = 0;
        std::string_view rest = line;
        while (true) {
            const auto comma = rest.find(',');
            std::string_view cell = trim(rest.substr(0, comma));
            if (!cell.empty() && cell.front() == '+') {
                cell.remove_prefix(1);
            }
            std::int64_t v = 0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
                throw UsageError("csv line " + std::to_string(line_no) + ": not an integer: '" +
                                 std::string(cell) + "'");
            }
            m.data.push_back(v);
            ++cells;
            if (comma == std::string_view::npos) {
                break;
            }
            rest = rest.substr(comma + 1);
        }

        if (m.rows == 0) {
            m.cols = cells;
        } else if (cells != m.cols) {
            throw UsageError("csv line " + std::to_string(line_no) + ": expected " +
                             std::to_string(m.cols) + " cells, got " + std::to_string(cells));
        }
        ++m.rows;
    }
    if (m.empty()) {
        throw UsageError("csv: empty matrix");
    }
    return m;
}

Matrix read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

void write_csv(std::ostream& out, const Matrix& m)
{
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) {
            if (c) {
                out << ',';
            }
            out << m(r, c);
        }
        out << '\n';
    }
}

void write_csv(const std::filesystem::path& path, const Matrix& m)
{
    std::ofstream out(path);
    if (!out) {
        throw UsageError("cannot write " + path.string());
    }
    write_csv(out, m);
}

}  // namespace stsa

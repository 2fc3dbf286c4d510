// SPDX-FileCopyrightText: © 2026 The stsa Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "stsa/sparsity.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>

namespace stsa {

SparseWeightTile::SparseWeightTile(unsigned rows, unsigned cols, unsigned m, unsigned n, unsigned data_width)
    : rows_(rows), cols_(cols), m_(m), n_(n), data_width_(data_width)
{
    if (rows == 0 || cols == 0 || m == 0 || n == 0 || n > m) {
        throw UsageError("tile: need rows, cols, m, n > 0 and n <= m");
    }
    SparseBlock empty;
    empty.values.assign(n, Word::zero(data_width));
    empty.indexes.assign(n, 0);
    blocks_.assign(static_cast<std::size_t>(rows) * cols, empty);
}

void SparseWeightTile::set_block(unsigned row, unsigned col, SparseBlock block)
{
    if (row >= rows_ || col >= cols_) {
        throw UsageError("tile: block coordinates out of range");
    }
    if (block.values.size() != n_ || block.indexes.size() != n_) {
        throw UsageError("tile: block must carry exactly n values and indexes");
    }
    for (std::size_t k = 0; k < n_; ++k) {
        if (block.values[k].width() != data_width_ || block.indexes[k] >= m_) {
            throw UsageError("tile: block value width or index out of range");
        }
        if (k > 0 && block.indexes[k] < block.indexes[k - 1]) {
            throw UsageError("tile: block indexes must be non-decreasing");
        }
        for (std::size_t q = 0; q < k; ++q) {
            if (block.values[k].value() != 0 && block.values[q].value() != 0 &&
                block.indexes[k] == block.indexes[q]) {
                throw UsageError("tile: two non-zero values share an index");
            }
        }
    }
    blocks_[row * cols_ + col] = std::move(block);
}

SparseBlock prune_to_nm(std::span<const Word> block, unsigned n)
{
    if (block.empty() || n == 0 || n > block.size()) {
        throw UsageError("prune_to_nm: need 0 < n <= M");
    }
    const unsigned width = block.front().width();

    std::vector<std::uint32_t> order(block.size());
    std::iota(order.begin(), order.end(), 0U);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return std::llabs(block[a].value()) > std::llabs(block[b].value());
    });

    std::vector<std::uint32_t> kept;
    for (std::uint32_t pos : order) {
        if (kept.size() == n || block[pos].value() == 0) {
            break;
        }
        kept.push_back(pos);
    }
    std::sort(kept.begin(), kept.end());

    SparseBlock out;
    const std::size_t padding = n - kept.size();
    out.values.assign(padding, Word::zero(width));
    out.indexes.assign(padding, 0);
    for (std::uint32_t pos : kept) {
        out.values.push_back(block[pos]);
        out.indexes.push_back(pos);
    }
    return out;
}

SparseWeightTile pack_tile(const Matrix& dense, unsigned m, unsigned n, unsigned data_width)
{
    if (m == 0 || dense.empty() || dense.rows % m != 0) {
        throw UsageError("pack_tile: row count " + std::to_string(dense.rows) +
                         " is not a positive multiple of M=" + std::to_string(m));
    }
    const auto grid_rows = static_cast<unsigned>(dense.rows / m);
    const auto grid_cols = static_cast<unsigned>(dense.cols);
    SparseWeightTile tile(grid_rows, grid_cols, m, n, data_width);

    std::vector<Word> column_block(m, Word::zero(data_width));
    for (unsigned i = 0; i < grid_rows; ++i) {
        for (unsigned j = 0; j < grid_cols; ++j) {
            for (unsigned e = 0; e < m; ++e) {
                const std::int64_t v = dense(i * m + e, j);
                if (!Word::fits(data_width, v)) {
                    throw UsageError("pack_tile: value " + std::to_string(v) + " does not fit in " +
                                     std::to_string(data_width) + " bits");
                }
                column_block[e] = Word(data_width, v);
            }
            tile.set_block(i, j, prune_to_nm(column_block, n));
        }
    }
    return tile;
}

Matrix densify(const SparseWeightTile& tile)
{
    Matrix out(static_cast<std::size_t>(tile.rows()) * tile.m(), tile.cols());
    for (unsigned i = 0; i < tile.rows(); ++i) {
        for (unsigned j = 0; j < tile.cols(); ++j) {
            const SparseBlock& b = tile.block(i, j);
            for (unsigned k = 0; k < tile.n(); ++k) {
                if (b.values[k].value() != 0) {
                    out(i * tile.m() + b.indexes[k], j) = b.values[k].value();
                }
            }
        }
    }
    return out;
}

bool validate_nm(const Matrix& dense, unsigned m, unsigned n)
{
    if (m == 0) {
        throw UsageError("validate_nm: M must be positive");
    }
    for (std::size_t j = 0; j < dense.cols; ++j) {
        for (std::size_t start = 0; start < dense.rows; start += m) {
            unsigned nonzero = 0;
            for (std::size_t r = start; r < std::min(dense.rows, start + m); ++r) {
                nonzero += dense(r, j) != 0;
            }
            if (nonzero > n) {
                return false;
            }
        }
    }
    return true;
}

std::string block_mask(const SparseBlock& block, unsigned m)
{
    std::string mask(m, '0');
    for (std::size_t k = 0; k < block.values.size(); ++k) {
        if (block.values[k].value() != 0) {
            mask[block.indexes[k]] = '1';
        }
    }
    return mask;
}

nlohmann::json to_json(const SparseWeightTile& tile)
{
    nlohmann::json blocks = nlohmann::json::array();
    for (unsigned i = 0; i < tile.rows(); ++i) {
        for (unsigned j = 0; j < tile.cols(); ++j) {
            const SparseBlock& b = tile.block(i, j);
            std::vector<std::int64_t> values;
            for (const Word& w : b.values) {
                values.push_back(w.value());
            }
            blocks.push_back({{"row", i},
                              {"col", j},
                              {"values", values},
                              {"indexes", b.indexes},
                              {"mask", block_mask(b, tile.m())}});
        }
    }
    return {{"rows", tile.rows()},   {"cols", tile.cols()}, {"m", tile.m()},
            {"n", tile.n()},         {"data_width", tile.data_width()},
            {"blocks", std::move(blocks)}};
}

SparseWeightTile tile_from_json(const nlohmann::json& j)
{
    try {
        SparseWeightTile tile(j.at("rows").get<unsigned>(), j.at("cols").get<unsigned>(),
                              j.at("m").get<unsigned>(), j.at("n").get<unsigned>(),
                              j.at("data_width").get<unsigned>());
        for (const auto& jb : j.at("blocks")) {
            SparseBlock b;
            for (const auto& v : jb.at("values")) {
                const auto value = v.get<std::int64_t>();
                if (!Word::fits(tile.data_width(), value)) {
                    throw UsageError("tile json: value out of range");
                }
                b.values.emplace_back(tile.data_width(), value);
            }
            b.indexes = jb.at("indexes").get<std::vector<std::uint32_t>>();
            tile.set_block(jb.at("row").get<unsigned>(), jb.at("col").get<unsigned>(), std::move(b));
        }
        return tile;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("tile json: ") + e.what());
    }
}

}  // namespace stsa

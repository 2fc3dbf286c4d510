// SPDX-FileCopyrightText: © 2026 The stsa Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stsa/arith.hpp"
#include "stsa/matrix.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace stsa {

/// Up to N non-zero values out of one M-element column block, with their
/// in-block positions. Padding slots are (0, 0) and come first so that the
/// index list stays non-decreasing.
struct SparseBlock {
    std::vector<Word> values;
    std::vector<std::uint32_t> indexes;

    friend bool operator==(const SparseBlock&, const SparseBlock&) = default;
};

/// Packed weight tile: an R x C grid of blocks standing for an (R*M) x C
/// dense matrix. Block (i, j) covers dense rows i*M .. i*M+M-1 of column j.
class SparseWeightTile {
  public:
    SparseWeightTile(unsigned rows, unsigned cols, unsigned m, unsigned n, unsigned data_width);

    unsigned rows() const { return rows_; }
    unsigned cols() const { return cols_; }
    unsigned m() const { return m_; }
    unsigned n() const { return n_; }
    unsigned data_width() const { return data_width_; }

    const SparseBlock& block(unsigned row, unsigned col) const { return blocks_[row * cols_ + col]; }

    /// Replaces a block after checking it against the tile's N:M shape.
    void set_block(unsigned row, unsigned col, SparseBlock block);

    friend bool operator==(const SparseWeightTile&, const SparseWeightTile&) = default;

  private:
    unsigned rows_;
    unsigned cols_;
    unsigned m_;
    unsigned n_;
    unsigned data_width_;
    std::vector<SparseBlock> blocks_;
};

/// Keeps the n largest-magnitude entries of an M-element block (ties go to the
/// lower position) and records where they came from.
SparseBlock prune_to_nm(std::span<const Word> block, unsigned n);

/// Column-wise N:M packing of a dense (R*M) x C matrix. Every entry must fit
/// in `data_width` bits.
SparseWeightTile pack_tile(const Matrix& dense, unsigned m, unsigned n, unsigned data_width = 16);

/// Reconstructs the pruned (R*M) x C dense matrix.
Matrix densify(const SparseWeightTile& tile);

/// True iff every M-row block of every column holds at most n non-zeros.
/// A trailing partial block counts as a block.
bool validate_nm(const Matrix& dense, unsigned m, unsigned n);

/// M-character position mask of a block, e.g. "1001"; padding slots set nothing.
std::string block_mask(const SparseBlock& block, unsigned m);

nlohmann::json to_json(const SparseWeightTile& tile);
SparseWeightTile tile_from_json(const nlohmann::json& j);

}  // namespace stsa

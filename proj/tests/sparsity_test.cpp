// SPDX-FileCopyrightText: © 2026 The stsa Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "stsa/sparsity.hpp"

#include "test_oracles.hpp"

#include <random>
#include <vector>

#include <gtest/gtest.h>

using namespace stsa;

namespace {

std::vector<Word> words(std::initializer_list<std::int64_t> values, unsigned width = 16)
{
    std::vector<Word> out;
    for (auto v : values) {
        out.emplace_back(width, v);
    }
    return out;
}

std::vector<std::int64_t> values_of(const SparseBlock& b)
{
    std::vector<std::int64_t> out;
    for (const Word& w : b.values) {
        out.push_back(w.value());
    }
    return out;
}

}  // namespace

TEST(PruneToNmTest, KeepsLargestMagnitudes)
{
    const SparseBlock b = prune_to_nm(words({5, -1, 2, 3}), 2);
    EXPECT_EQ(values_of(b), (std::vector<std::int64_t>{5, 3}));
    EXPECT_EQ(b.indexes, (std::vector<std::uint32_t>{0, 3}));
    EXPECT_EQ(oracle::prune_positions({5, -1, 2, 3}, 2), (std::vector<unsigned>{0, 3}));
}

TEST(PruneToNmTest, AllZeroPadsWithIndexZero)
{
    const SparseBlock b = prune_to_nm(words({0, 0, 0, 0}), 2);
    EXPECT_EQ(values_of(b), (std::vector<std::int64_t>{0, 0}));
    EXPECT_EQ(b.indexes, (std::vector<std::uint32_t>{0, 0}));
}

TEST(PruneToNmTest, TiesGoToLowerIndex)
{
    const SparseBlock b = prune_to_nm(words({2, -2, 1, 1}), 2);
    EXPECT_EQ(values_of(b), (std::vector<std::int64_t>{2, -2}));
    EXPECT_EQ(b.indexes, (std::vector<std::uint32_t>{0, 1}));
    EXPECT_EQ(oracle::prune_positions({2, -2, 1, 1}, 2), (std::vector<unsigned>{0, 1}));
}

TEST(PruneToNmTest, PaddingComesFirstSoIndexesStaySorted)
{
    const SparseBlock b = prune_to_nm(words({0, 0, 0, 9}), 2);
    EXPECT_EQ(values_of(b), (std::vector<std::int64_t>{0, 9}));
    EXPECT_EQ(b.indexes, (std::vector<std::uint32_t>{0, 3}));
}

TEST(PruneToNmTest, RejectsBadN)
{
    EXPECT_THROW(prune_to_nm(words({1, 2, 3, 4}), 5), UsageError);
    EXPECT_THROW(prune_to_nm(words({1, 2, 3, 4}), 0), UsageError);
}

TEST(PruneToNmTest, MatchesBruteForceOracle)
{
    std::mt19937_64 rng(11);
    // Small value range so ties and zeros are common.
    std::uniform_int_distribution<std::int64_t> dist(-3, 3);
    for (int trial = 0; trial < 5000; ++trial) {
        const unsigned m = 1 + static_cast<unsigned>(rng() % 6);
        const unsigned n = 1 + static_cast<unsigned>(rng() % m);
        std::vector<std::int64_t> raw(m);
        std::vector<Word> block;
        for (auto& v : raw) {
            v = dist(rng);
            block.emplace_back(16, v);
        }
        const SparseBlock b = prune_to_nm(block, n);
        const std::vector<unsigned> expect = oracle::prune_positions(raw, n);

        std::vector<unsigned> got;
        for (std::size_t k = 0; k < b.values.size(); ++k) {
            if (b.values[k].value() != 0) {
                got.push_back(b.indexes[k]);
                EXPECT_EQ(b.values[k].value(), raw[b.indexes[k]]);
            }
            if (k > 0) {
                EXPECT_LE(b.indexes[k - 1], b.indexes[k]);
            }
        }
        ASSERT_EQ(got, expect);
    }
}

TEST(PackTileTest, LosslessOnAlreadySparseInput)
{
    Matrix w(8, 2);
    w(0, 0) = 1;
    w(3, 0) = -4;
    w(5, 0) = 7;
    w(1, 1) = 2;
    w(2, 1) = 3;
    w(7, 1) = -9;
    ASSERT_TRUE(validate_nm(w, 4, 2));
    const SparseWeightTile tile = pack_tile(w, 4, 2);
    EXPECT_EQ(tile.rows(), 2u);
    EXPECT_EQ(tile.cols(), 2u);
    EXPECT_EQ(densify(tile), w);
}

TEST(PackTileTest, DenseInputMatchesBlockPruningOracle)
{
    std::mt19937_64 rng(3);
    for (unsigned n : {1U, 2U}) {
        const Matrix w = oracle::random_matrix(rng, 8, 2, -100, 100);
        EXPECT_EQ(densify(pack_tile(w, 4, n)), oracle::prune_matrix(w, 4, n));
    }
}

TEST(PackTileTest, OneOfFourKeepsOneValuePerBlock)
{
    std::mt19937_64 rng(5);
    const Matrix w = oracle::random_matrix(rng, 16, 4, 1, 50);
    const SparseWeightTile tile = pack_tile(w, 4, 1);
    for (unsigned i = 0; i < tile.rows(); ++i) {
        for (unsigned j = 0; j < tile.cols(); ++j) {
            ASSERT_EQ(tile.block(i, j).values.size(), 1u);
            EXPECT_NE(tile.block(i, j).values[0].value(), 0);
        }
    }
    EXPECT_TRUE(validate_nm(densify(tile), 4, 1));
}

TEST(PackTileTest, Errors)
{
    EXPECT_THROW(pack_tile(Matrix(6, 2), 4, 2), UsageError);
    Matrix big(4, 1);
    big(0, 0) = 40000;
    EXPECT_THROW(pack_tile(big, 4, 2, 16), UsageError);
}

TEST(ValidateNmTest, Examples)
{
    // Each 4-row block of each column holds at most two non-zeros.
    const Matrix fig = parse_csv("1,0\n0,2\n3,0\n0,4\n0,5\n6,0\n0,0\n7,8\n");
    EXPECT_TRUE(validate_nm(fig, 4, 2));

    Matrix three(4, 1);
    three(0, 0) = 1;
    three(1, 0) = 1;
    three(2, 0) = 1;
    EXPECT_FALSE(validate_nm(three, 4, 2));

    EXPECT_TRUE(validate_nm(Matrix(8, 8), 4, 2));
}

TEST(SparsityProperties, PackDensifyRoundTrip)
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const unsigned m = 2 + static_cast<unsigned>(rng() % 4);
        const unsigned n = 1 + static_cast<unsigned>(rng() % m);
        const Matrix w = oracle::random_matrix(rng, m * (1 + rng() % 4), 1 + rng() % 5, -1000, 1000);
        const SparseWeightTile tile = pack_tile(w, m, n);
        const Matrix pruned = densify(tile);
        ASSERT_TRUE(validate_nm(pruned, m, n));
        // Re-packing a pruned matrix reproduces the same tile and loses nothing.
        ASSERT_EQ(pack_tile(pruned, m, n), tile);
        ASSERT_EQ(densify(pack_tile(pruned, m, n)), pruned);
    }
}

TEST(SparsityJson, RoundTripAndMasks)
{
    const Matrix w = parse_csv("5,0\n-1,0\n2,4\n3,0\n");
    const SparseWeightTile tile = pack_tile(w, 4, 2);
    const nlohmann::json j = to_json(tile);
    EXPECT_EQ(j["blocks"][0]["mask"], "1001");
    EXPECT_EQ(j["blocks"][1]["mask"], "0010");
    EXPECT_EQ(tile_from_json(j), tile);
    EXPECT_THROW(tile_from_json(nlohmann::json::object()), UsageError);
}

TEST(CsvTest, ParseAndErrors)
{
    const Matrix m = parse_csv("1, -2,3\n4,5,+6\n\n");
    EXPECT_EQ(m.rows, 2u);
    EXPECT_EQ(m.cols, 3u);
    EXPECT_EQ(m(0, 1), -2);
    EXPECT_EQ(m(1, 2), 6);
    EXPECT_THROW(parse_csv(""), UsageError);
    EXPECT_THROW(parse_csv("1,2\n3\n"), UsageError);
    EXPECT_THROW(parse_csv("1,x\n"), UsageError);
    EXPECT_THROW(parse_csv("1.5\n"), UsageError);
}

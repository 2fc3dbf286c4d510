// SPDX-FileCopyrightText: © 2026 The stsa Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "stsa/driver.hpp"

#include "test_oracles.hpp"

#include <random>

#include <gtest/gtest.h>

using namespace stsa;

namespace {

Workload random_workload(std::mt19937_64& rng, unsigned layers)
{
    Workload wl;
    for (unsigned l = 0; l < layers; ++l) {
        const std::size_t x = 1 + rng() % 40;
        const std::size_t k = 1 + rng() % 70;
        const std::size_t c = 1 + rng() % 20;
        wl.layers.push_back({oracle::random_matrix(rng, x, k, -128, 127),
                             oracle::random_matrix(rng, k, c, -20000, 20000)});
    }
    return wl;
}

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b)
{
    return (a + b - 1) / b;
}

CycleStats stats_with_total(std::uint64_t total)
{
    CycleStats s;
    s.total_cycles = total;
    return s;
}

}  // namespace

TEST(TiledMatmulTest, MatchesOracleWithTestingOnAndOff)
{
    std::mt19937_64 rng(101);
    for (unsigned n : {1U, 2U}) {
        ArrayConfig cfg;
        cfg.n = n;
        const Workload wl = random_workload(rng, 3);
        const MatmulRun off = tiled_matmul(wl, cfg, Testing::Off);
        const MatmulRun on = tiled_matmul(wl, cfg, Testing::On);
        ASSERT_EQ(off.results.size(), wl.layers.size());
        for (std::size_t l = 0; l < wl.layers.size(); ++l) {
            const Matrix expect =
                oracle::matmul_wrapped(wl.layers[l].a, oracle::prune_matrix(wl.layers[l].w, cfg.m, n), 32);
            EXPECT_EQ(off.results[l], expect);
            EXPECT_EQ(on.results[l], expect);
        }
        EXPECT_TRUE(off.reports.empty());
        EXPECT_EQ(on.reports.size(), on.stats.tiles_executed);
        for (const TestReport& r : on.reports) {
            EXPECT_FALSE(r.detected);
        }
    }
}

TEST(TiledMatmulTest, CycleAccounting)
{
    std::mt19937_64 rng(102);
    const ArrayConfig cfg;
    const Workload wl = random_workload(rng, 4);
    std::uint64_t tiles = 0;
    std::uint64_t compute = 0;
    for (const Layer& layer : wl.layers) {
        const std::uint64_t t = ceil_div(layer.w.rows, 32) * ceil_div(layer.w.cols, 8);
        tiles += t;
        compute += t * (layer.a.rows + 8 + 8 - 1);
    }
    const MatmulRun off = tiled_matmul(wl, cfg, Testing::Off);
    const MatmulRun on = tiled_matmul(wl, cfg, Testing::On);
    EXPECT_EQ(off.stats.tiles_executed, tiles);
    EXPECT_EQ(off.stats.load_cycles, 8 * tiles);
    EXPECT_EQ(off.stats.compute_cycles, compute);
    EXPECT_EQ(off.stats.test_cycles, 0u);
    EXPECT_EQ(on.stats.test_cycles, 4 * tiles);
    EXPECT_EQ(on.stats.total_cycles, on.stats.load_cycles + on.stats.compute_cycles + on.stats.test_cycles);
    EXPECT_EQ(on.stats.total_cycles - off.stats.total_cycles, 4 * tiles);
    EXPECT_EQ(weight_tiles(wl, cfg).size(), tiles);
}

TEST(TiledMatmulTest, ZeroPaddingDoesNotChangeResults)
{
    std::mt19937_64 rng(103);
    const ArrayConfig cfg;
    const Matrix a = oracle::random_matrix(rng, 9, 19, -100, 100);
    const Matrix w = oracle::random_matrix(rng, 19, 5, -100, 100);
    // Padding K up to 20 keeps the 4-row block boundaries where they were.
    Workload plain{{{a, w}}};
    Workload padded{{{zero_pad(a, 9, 20), zero_pad(w, 20, 5)}}};
    EXPECT_EQ(tiled_matmul(plain, cfg, Testing::On).results, tiled_matmul(padded, cfg, Testing::On).results);
}

TEST(TiledMatmulTest, ShapeErrors)
{
    const ArrayConfig cfg;
    Workload bad{{{Matrix(2, 3), Matrix(4, 2)}}};
    EXPECT_THROW(tiled_matmul(bad, cfg, Testing::Off), UsageError);
    Workload empty{{{Matrix(0, 3), Matrix(3, 2)}}};
    EXPECT_THROW(tiled_matmul(empty, cfg, Testing::Off), UsageError);
}

TEST(TiledMatmulTest, InjectedFaultIsReported)
{
    std::mt19937_64 rng(104);
    const ArrayConfig cfg;
    Workload wl{{{oracle::random_matrix(rng, 4, 32, -50, 50), oracle::random_matrix(rng, 32, 8, 1, 1000)}}};
    const std::vector<FaultSite> faults{{RegClass::Output, 7, 3, 0, 30, 1}};
    const MatmulRun run = tiled_matmul(wl, cfg, Testing::On, faults);
    ASSERT_EQ(run.reports.size(), 1u);
    EXPECT_TRUE(run.reports[0].detected);
    EXPECT_EQ(run.reports[0].verdicts[3].kind, VerdictKind::OutputRegister);
}

TEST(OverheadTest, Examples)
{
    EXPECT_DOUBLE_EQ(overhead_report(stats_with_total(4000), stats_with_total(4000)), 0.0);
    EXPECT_DOUBLE_EQ(overhead_report(stats_with_total(4040), stats_with_total(4000)), 0.01);
    EXPECT_THROW(overhead_report(stats_with_total(1), stats_with_total(0)), UsageError);
}

TEST(OverheadTest, ShrinksAsMoreRowsAreStreamed)
{
    std::mt19937_64 rng(105);
    const ArrayConfig cfg;
    const Matrix w = oracle::random_matrix(rng, 64, 16, -100, 100);
    double previous = 1.0;
    for (std::size_t x : {1U, 8U, 64U, 200U, 512U}) {
        Workload wl{{{oracle::random_matrix(rng, x, 64, -100, 100), w}}};
        const double ov =
            overhead_report(tiled_matmul(wl, cfg, Testing::On).stats, tiled_matmul(wl, cfg, Testing::Off).stats);
        // Every tile streams x rows: 4 extra cycles over x + 2R + C - 1.
        EXPECT_DOUBLE_EQ(ov, 4.0 / static_cast<double>(x + 23));
        EXPECT_LT(ov, previous);
        previous = ov;
    }
}

TEST(SyntheticWorkloadTest, DeterministicAndInRange)
{
    const ArrayConfig cfg;
    SyntheticOptions opts;
    opts.rows_per_tile = 16;
    const Workload a = synthetic_workload(cfg, opts, 7);
    const Workload b = synthetic_workload(cfg, opts, 7);
    const Workload c = synthetic_workload(cfg, opts, 8);
    ASSERT_EQ(a.layers.size(), 4u);
    bool differs = false;
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        EXPECT_EQ(a.layers[l].a, b.layers[l].a);
        EXPECT_EQ(a.layers[l].w, b.layers[l].w);
        EXPECT_EQ(a.layers[l].w.rows % 32, 0u);
        EXPECT_EQ(a.layers[l].w.cols % 8, 0u);
        EXPECT_EQ(a.layers[l].a.rows, 16u);
        for (auto v : a.layers[l].w.data) {
            ASSERT_TRUE(Word::fits(16, v));
        }
        differs = differs || l >= c.layers.size() || !(a.layers[l].w == c.layers[l].w);
    }
    EXPECT_TRUE(differs);
    opts.layers = 0;
    EXPECT_THROW(synthetic_workload(cfg, opts, 1), UsageError);
}

TEST(StatsJsonTest, Fields)
{
    CycleStats s{1, 2, 3, 6, 1};
    const nlohmann::json j = to_json(s);
    EXPECT_EQ(j["load_cycles"], 1);
    EXPECT_EQ(j["compute_cycles"], 2);
    EXPECT_EQ(j["test_cycles"], 3);
    EXPECT_EQ(j["total_cycles"], 6);
    EXPECT_EQ(j["tiles_executed"], 1);
}

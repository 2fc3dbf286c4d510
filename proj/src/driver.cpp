// SPDX-FileCopyrightText: © 2026 The stsa Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "stsa/driver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace stsa {

namespace {

std::size_t round_up(std::size_t v, std::size_t multiple)
{
    return (v + multiple - 1) / multiple * multiple;
}

void check_layer(const Layer& layer)
{
    if (layer.a.empty() || layer.w.empty()) {
        throw UsageError("layer: A and W must be non-empty");
    }
    if (layer.a.cols != layer.w.rows) {
        throw UsageError("layer: A is " + std::to_string(layer.a.rows) + "x" + std::to_string(layer.a.cols) +
                         " but W is " + std::to_string(layer.w.rows) + "x" + std::to_string(layer.w.cols));
    }
}

// Calls fn(tile, k_tile, col_tile) for every weight tile of a layer.
template <typename Fn>
void for_each_tile(const Layer& layer, const ArrayConfig& config, Fn&& fn)
{
    const std::size_t depth = static_cast<std::size_t>(config.rows) * config.m;
    const std::size_t k_tiles = round_up(layer.w.rows, depth) / depth;
    const std::size_t col_tiles = round_up(layer.w.cols, config.cols) / config.cols;
    for (std::size_t ct = 0; ct < col_tiles; ++ct) {
        for (std::size_t kt = 0; kt < k_tiles; ++kt) {
            const Matrix dense = slice(layer.w, kt * depth, ct * config.cols, depth, config.cols);
            fn(pack_tile(dense, config.m, config.active_slots(), config.data_width), kt, ct);
        }
    }
}

}  // namespace

MatmulRun tiled_matmul(const Workload& workload, const ArrayConfig& config, Testing testing,
                       std::span<const FaultSite> faults)
{
    config.validate();
    SystolicArray array(config);
    for (const FaultSite& f : faults) {
        array.inject(f);
    }

    const std::size_t depth = static_cast<std::size_t>(config.rows) * config.m;
    MatmulRun run;
    std::size_t tile_id = 0;
    for (const Layer& layer : workload.layers) {
        check_layer(layer);
        const std::size_t X = layer.a.rows;
        std::vector<Word> acc(X * layer.w.cols, Word::zero(config.acc_width));

        for_each_tile(layer, config, [&](const SparseWeightTile& tile, std::size_t kt, std::size_t ct) {
            const std::uint64_t before = array.cycles();
            array.load_weights(tile);
            run.stats.load_cycles += array.cycles() - before;

            if (testing == Testing::On) {
                run.reports.push_back(run_session(array, compute_golden(tile, config), tile_id));
                run.stats.test_cycles += kTestCyclesPerTile;
            }

            const ComputeResult part = array.run_compute(slice(layer.a, 0, kt * depth, X, depth));
            run.stats.compute_cycles += part.cycles;
            for (std::size_t x = 0; x < X; ++x) {
                for (unsigned c = 0; c < config.cols; ++c) {
                    const std::size_t col = ct * config.cols + c;
                    if (col < layer.w.cols) {
                        Word& cell = acc[x * layer.w.cols + col];
                        cell = wrap_add(cell, Word(config.acc_width, part.out(x, c)));
                    }
                }
            }
            ++run.stats.tiles_executed;
            ++tile_id;
        });

        Matrix out(X, layer.w.cols);
        for (std::size_t i = 0; i < acc.size(); ++i) {
            out.data[i] = acc[i].value();
        }
        run.results.push_back(std::move(out));
    }
    run.stats.total_cycles = run.stats.load_cycles + run.stats.compute_cycles + run.stats.test_cycles;
    return run;
}

std::vector<SparseWeightTile> weight_tiles(const Workload& workload, const ArrayConfig& config)
{
    config.validate();
    std::vector<SparseWeightTile> tiles;
    for (const Layer& layer : workload.layers) {
        check_layer(layer);
        for_each_tile(layer, config,
                      [&](const SparseWeightTile& tile, std::size_t, std::size_t) { tiles.push_back(tile); });
    }
    return tiles;
}

double overhead_report(const CycleStats& stats_on, const CycleStats& stats_off)
{
    if (stats_off.total_cycles == 0) {
        throw UsageError("overhead_report: baseline has no cycles");
    }
    return (static_cast<double>(stats_on.total_cycles) - static_cast<double>(stats_off.total_cycles)) /
           static_cast<double>(stats_off.total_cycles);
}

Workload synthetic_workload(const ArrayConfig& config, const SyntheticOptions& options, std::uint64_t seed)
{
    config.validate();
    if (options.layers == 0 || options.rows_per_tile == 0 || options.max_k_tiles == 0 || options.max_col_tiles == 0) {
        throw UsageError("synthetic_workload: all sizes must be positive");
    }
    std::mt19937_64 rng(seed);
    const std::int64_t data_max = (std::int64_t{1} << (config.data_width - 1)) - 1;
    const std::int64_t act_max = std::min<std::int64_t>(127, data_max);

    Workload wl;
    for (unsigned l = 0; l < options.layers; ++l) {
        const auto k_tiles = std::uniform_int_distribution<unsigned>(1, options.max_k_tiles)(rng);
        const auto col_tiles = std::uniform_int_distribution<unsigned>(1, options.max_col_tiles)(rng);
        const std::size_t K = static_cast<std::size_t>(k_tiles) * config.rows * config.m;
        const std::size_t Ctot = static_cast<std::size_t>(col_tiles) * config.cols;
        // Per-layer weight scale between 2^4 and 2^(data_width-4).
        const auto scale_exp =
            std::uniform_int_distribution<int>(4, std::max(4, static_cast<int>(config.data_width) - 4))(rng);
        std::normal_distribution<double> weight_dist(0.0, std::ldexp(1.0, scale_exp));
        std::uniform_int_distribution<std::int64_t> act_dist(-act_max, act_max);

        Layer layer{Matrix(options.rows_per_tile, K), Matrix(K, Ctot)};
        for (auto& v : layer.a.data) {
            v = act_dist(rng);
        }
        for (auto& v : layer.w.data) {
            v = std::clamp<std::int64_t>(std::llround(weight_dist(rng)), -data_max, data_max);
        }
        wl.layers.push_back(std::move(layer));
    }
    return wl;
}

nlohmann::json to_json(const CycleStats& stats)
{
    return {{"load_cycles", stats.load_cycles},       {"compute_cycles", stats.compute_cycles},
            {"test_cycles", stats.test_cycles},       {"total_cycles", stats.total_cycles},
            {"tiles_executed", stats.tiles_executed}};
}

}  // namespace stsa

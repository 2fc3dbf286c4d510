// SPDX-FileCopyrightText: © 2026 The stsa Authors
//
// SPDX-License-Identifier: Apache-2.0

// Tiled matrix multiplication on a single array with optional per-tile
// self-test sessions, plus the cycle accounting used for overhead numbers.
//
// Cycle model per weight tile:
//   load     R cycles
//   test     4 cycles (session drain overlaps the following compute)
//   compute  X + R + C - 1 cycles for X streamed rows

#pragma once

#include "stsa/array.hpp"
#include "stsa/matrix.hpp"
#include "stsa/selftest.hpp"
#include "stsa/sparsity.hpp"

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

namespace stsa {

inline constexpr std::uint64_t kTestCyclesPerTile = kSessionTests;

/// One layer: C = A (X x K) times W (K x Ctotal). W is pruned N:M per tile.
struct Layer {
    Matrix a;
    Matrix w;
};

struct Workload {
    std::vector<Layer> layers;
};

struct CycleStats {
    std::uint64_t load_cycles = 0;
    std::uint64_t compute_cycles = 0;
    std::uint64_t test_cycles = 0;
    std::uint64_t total_cycles = 0;
    std::uint64_t tiles_executed = 0;

    friend bool operator==(const CycleStats&, const CycleStats&) = default;
};

enum class Testing { Off, On };

struct MatmulRun {
    std::vector<Matrix> results;  // one X x Ctotal matrix per layer
    CycleStats stats;
    std::vector<TestReport> reports;
};

/// Runs every layer tile by tile: load, optional self-test, then stream all
/// rows of A. Partial products across K tiles are summed on the host at
/// acc_width. Zero padding rounds K up to R*M and Ctotal up to C.
MatmulRun tiled_matmul(const Workload& workload, const ArrayConfig& config, Testing testing,
                       std::span<const FaultSite> faults = {});

/// Packed weight tiles of a workload in execution order.
std::vector<SparseWeightTile> weight_tiles(const Workload& workload, const ArrayConfig& config);

/// (total_on - total_off) / total_off
double overhead_report(const CycleStats& stats_on, const CycleStats& stats_off);

struct SyntheticOptions {
    unsigned layers = 4;
    unsigned rows_per_tile = 256;  // X, rows of A streamed per weight tile
    unsigned max_k_tiles = 3;
    unsigned max_col_tiles = 3;
};

/// Random layers shaped like lowered CNN layers: K and Ctotal are whole
/// multiples of the tile size, weights are roughly Gaussian with a per-layer
/// scale, activations are small signed integers. Deterministic in `seed`.
Workload synthetic_workload(const ArrayConfig& config, const SyntheticOptions& options, std::uint64_t seed);

nlohmann::json to_json(const CycleStats& stats);

}  // namespace stsa

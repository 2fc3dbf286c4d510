// SPDX-FileCopyrightText: © 2026 The stsa Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stsa/array.hpp"
#include "stsa/selftest.hpp"
#include "stsa/sparsity.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace stsa {

/// Every register bit of every TPE plus the edge accumulators, both
/// polarities. Order: TPE-major (row, col), then class, element, bit, stuck;
/// edge accumulators last.
std::vector<FaultSite> enumerate_faults(const ArrayConfig& config);

struct CampaignOptions {
    bool verify_classification = true;
    /// Replays random matmuls for every undetected fault to see whether it
    /// could have corrupted the tested tiles.
    bool check_harmless = true;
    unsigned harmless_trials = 10;
    unsigned harmless_rows = 8;
    /// 0 picks std::thread::hardware_concurrency().
    unsigned threads = 0;
    std::uint64_t seed = 1;
};

struct FaultOutcome {
    FaultSite site;
    std::optional<std::size_t> detected_at;  // tile index of first detection
    std::optional<bool> classified_correctly;
    std::optional<bool> harmless;
};

struct ClassCoverage {
    std::uint64_t total = 0;
    std::uint64_t detected = 0;
    std::uint64_t undetected = 0;
    std::uint64_t harmless_verified = 0;
    std::uint64_t not_harmless = 0;
    std::uint64_t classification_checked = 0;
    std::uint64_t classification_correct = 0;
};

struct CoverageReport {
    std::uint64_t total_faults = 0;
    std::uint64_t detected = 0;
    double coverage = 0.0;
    std::array<ClassCoverage, std::size(kAllRegClasses)> per_class{};
    std::vector<double> cumulative_curve;  // coverage after tiles 0..T-1
    std::uint64_t false_positives = 0;     // fault-free sessions that flagged something

    const ClassCoverage& of(RegClass reg) const { return per_class[static_cast<std::size_t>(reg)]; }
};

struct CampaignResult {
    CoverageReport report;
    std::vector<FaultOutcome> outcomes;  // same order as the fault list
};

/// Whether a session verdict names the injected fault. Empty when the fault
/// is outside the localization guarantee (e.g. an activation fault that also
/// trips tests 1-3).
std::optional<bool> classification_matches(const FaultSite& site, const TestReport& report);

/// Single-fault campaign: each fault gets a fresh array and sees the tiles in
/// order (load + session per tile) until a session flags it.
CampaignResult run_campaign(std::span<const SparseWeightTile> tiles, const ArrayConfig& config,
                            const CampaignOptions& options = {});
CampaignResult run_campaign(std::span<const SparseWeightTile> tiles, const ArrayConfig& config,
                            std::span<const FaultSite> faults, const CampaignOptions& options = {});

nlohmann::json to_json(const CoverageReport& report);
/// "tile_index,coverage" header plus one line per tile.
void write_curve_csv(std::ostream& out, const CoverageReport& report);

}  // namespace stsa

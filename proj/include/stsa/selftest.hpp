// SPDX-FileCopyrightText: © 2026 The stsa Authors
//
// SPDX-License-Identifier: Apache-2.0

// Four-vector online self-test run after every weight load.
//
//   test  vector        north sum  golden gv_j                expected
//   1     [1, ..., 1]    0          -sum_i w_ij               0
//   2     [-1, ..., -1]  -1         +sum_i w_ij               -1
//   3     [1, 2, .., M]  0          -sum_i (idx_ij + 1) w_ij  0
//   4     [1, 2, .., M]  0          -((j mod M) + 1) sum w_ij 0   (test_4 mask on)
//
// The golden value is added to each south output through the column's edge
// accumulator. Tests 1 and 2 produce bitwise-complementary column sums, which
// is what the fault localization below keys on.

#pragma once

#include "stsa/arith.hpp"
#include "stsa/array.hpp"
#include "stsa/sparsity.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace stsa {

inline constexpr unsigned kSessionTests = 4;

struct TestVector {
    std::vector<Word> block;
    Word top_sum;
    bool test4 = false;
};

std::array<TestVector, kSessionTests> test_vectors(const ArrayConfig& config);

/// Fault-free value of compared[t][j] for test t: 0, -1, 0, 0.
Word expected_compared(unsigned test, unsigned acc_width);

/// gv[t][j], computed from the packed tile alone.
struct GoldenReference {
    std::array<std::vector<Word>, kSessionTests> gv;
};

GoldenReference compute_golden(const SparseWeightTile& tile, const ArrayConfig& config);

enum class VerdictKind {
    Ok,
    WeightRegister,
    OutputRegister,
    ComparisonAdder,
    WeightIndexRegister,
    ActivationWindow,
    Unclassified,
};

std::string_view to_string(VerdictKind kind);

struct Verdict {
    VerdictKind kind = VerdictKind::Ok;
    // Suspect activation columns, inclusive; ActivationWindow only.
    unsigned window_first = 0;
    unsigned window_last = 0;

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct ActivationWindow {
    unsigned first = 0;
    unsigned last = 0;

    bool contains(unsigned col) const { return col >= first && col <= last; }
    friend bool operator==(const ActivationWindow&, const ActivationWindow&) = default;
};

using SessionOutputs = std::array<std::vector<Word>, kSessionTests>;

struct TestReport {
    std::size_t tile_id = 0;
    SessionOutputs raw;
    SessionOutputs compared;
    bool detected = false;
    std::vector<Verdict> verdicts;

    /// Columns whose compared output for `test` differs from the expectation.
    std::vector<unsigned> failing_columns(unsigned test) const;
};

/// Called after every simulated cycle of a session.
using SessionObserver = std::function<void(unsigned cycle, const SystolicArray&)>;

/// Runs the four tests back to back on the loaded array. The weights are
/// left untouched.
TestReport run_session(SystolicArray& array, const GoldenReference& golden, std::size_t tile_id = 0,
                       const SessionObserver& observer = {});

/// Per-column verdicts from the raw and compared outputs of a session.
std::vector<Verdict> classify(const SessionOutputs& raw, const SessionOutputs& compared, unsigned m);

/// Window of M columns ending at the first failing column, clipped at 0.
/// Empty if the failures are not all a multiple of M apart.
std::optional<ActivationWindow> locate_activation(std::span<const unsigned> failing_cols, unsigned m);

nlohmann::json to_json(const TestReport& report);

}  // namespace stsa

// SPDX-FileCopyrightText: © 2026 The stsa Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "stsa/selftest.hpp"

#include <algorithm>

namespace stsa {

std::array<TestVector, kSessionTests> test_vectors(const ArrayConfig& config)
{
    const unsigned dw = config.data_width;
    const unsigned aw = config.acc_width;
    std::vector<Word> ones(config.m, Word(dw, 1));
    std::vector<Word> minus_ones(config.m, Word(dw, -1));
    std::vector<Word> ramp;
    for (unsigned p = 0; p < config.m; ++p) {
        ramp.emplace_back(dw, static_cast<std::int64_t>(p) + 1);
    }
    return {{
        {std::move(ones), Word(aw, 0), false},
        {std::move(minus_ones), Word(aw, -1), false},
        {ramp, Word(aw, 0), false},
        {ramp, Word(aw, 0), true},
    }};
}

Word expected_compared(unsigned test, unsigned acc_width)
{
    return Word(acc_width, test == 1 ? -1 : 0);
}

GoldenReference compute_golden(const SparseWeightTile& tile, const ArrayConfig& config)
{
    if (tile.rows() != config.rows || tile.cols() != config.cols || tile.m() != config.m ||
        tile.n() != config.active_slots()) {
        throw UsageError("compute_golden: tile shape does not match the array configuration");
    }
    const unsigned aw = config.acc_width;
    GoldenReference g;
    for (unsigned j = 0; j < config.cols; ++j) {
        Word sum = Word::zero(aw);
        Word indexed = Word::zero(aw);
        for (unsigned i = 0; i < config.rows; ++i) {
            const SparseBlock& b = tile.block(i, j);
            for (unsigned k = 0; k < tile.n(); ++k) {
                const Word w = b.values[k].resized(aw);
                sum = wrap_add(sum, w);
                indexed = wrap_add(indexed, wrap_mul(w, Word(aw, b.indexes[k] + 1), aw));
            }
        }
        const Word forced_pick(aw, static_cast<std::int64_t>(j % config.m) + 1);
        g.gv[0].push_back(wrap_sub(Word::zero(aw), sum));
        g.gv[1].push_back(sum);
        g.gv[2].push_back(wrap_sub(Word::zero(aw), indexed));
        g.gv[3].push_back(wrap_sub(Word::zero(aw), wrap_mul(forced_pick, sum, aw)));
    }
    return g;
}

std::string_view to_string(VerdictKind kind)
{
    switch (kind) {
    case VerdictKind::Ok:
        return "OK";
    case VerdictKind::WeightRegister:
        return "WeightRegister";
    case VerdictKind::OutputRegister:
        return "OutputRegister";
    case VerdictKind::ComparisonAdder:
        return "ComparisonAdder";
    case VerdictKind::WeightIndexRegister:
        return "WeightIndexRegister";
    case VerdictKind::ActivationWindow:
        return "ActivationWindow";
    case VerdictKind::Unclassified:
        return "Unclassified";
    }
    return "?";
}

std::vector<unsigned> TestReport::failing_columns(unsigned test) const
{
    std::vector<unsigned> cols;
    for (unsigned j = 0; j < compared[test].size(); ++j) {
        if (compared[test][j] != expected_compared(test, compared[test][j].width())) {
            cols.push_back(j);
        }
    }
    return cols;
}

TestReport run_session(SystolicArray& array, const GoldenReference& golden, std::size_t tile_id,
                       const SessionObserver& observer)
{
    const ArrayConfig& cfg = array.config();
    const unsigned R = cfg.rows;
    const unsigned C = cfg.cols;
    for (const auto& gv : golden.gv) {
        if (gv.size() != C) {
            throw UsageError("run_session: golden reference does not match the array width");
        }
    }
    const auto vectors = test_vectors(cfg);

    TestReport report;
    report.tile_id = tile_id;
    for (auto& v : report.raw) {
        v.assign(C, Word::zero(cfg.acc_width));
    }
    report.compared = report.raw;

    // Test t enters row r at cycle t + r and column j's top adder at cycle
    // t + j, the same skew as ordinary input rows.
    WestInputs west(R, cfg.m, cfg.data_width);
    std::vector<Word> north(C, Word::zero(cfg.acc_width));
    const unsigned total = kSessionTests + R + C - 1;
    for (unsigned t = 0; t < total; ++t) {
        for (unsigned r = 0; r < R; ++r) {
            if (t >= r && t - r < kSessionTests) {
                const TestVector& v = vectors[t - r];
                west.set_block(r, v.block, v.test4);
            } else {
                west.set_bubble(r);
            }
        }
        for (unsigned c = 0; c < C; ++c) {
            north[c] = (t >= c && t - c < kSessionTests) ? vectors[t - c].top_sum : Word::zero(cfg.acc_width);
        }
        const std::vector<Word> south = array.step(west, north);
        if (observer) {
            observer(t, array);
        }
        for (unsigned c = 0; c < C; ++c) {
            if (t >= R + c && t - R - c < kSessionTests) {
                const unsigned test = t - R - c;
                report.raw[test][c] = south[c];
                report.compared[test][c] = array.edge_accumulate(c, south[c], golden.gv[test][c]);
            }
        }
    }

    for (unsigned t = 0; t < kSessionTests; ++t) {
        report.detected = report.detected || !report.failing_columns(t).empty();
    }
    report.verdicts = classify(report.raw, report.compared, cfg.m);
    return report;
}

std::optional<ActivationWindow> locate_activation(std::span<const unsigned> failing_cols, unsigned m)
{
    if (failing_cols.empty() || m == 0) {
        return std::nullopt;
    }
    const unsigned first = *std::min_element(failing_cols.begin(), failing_cols.end());
    for (unsigned c : failing_cols) {
        if ((c - first) % m != 0) {
            return std::nullopt;
        }
    }
    return ActivationWindow{first + 1 >= m ? first + 1 - m : 0, first};
}

std::vector<Verdict> classify(const SessionOutputs& raw, const SessionOutputs& compared, unsigned m)
{
    const std::size_t cols = compared[0].size();
    auto fails = [&](unsigned test, std::size_t j) {
        return compared[test][j] != expected_compared(test, compared[test][j].width());
    };

    std::vector<unsigned> test4_cols;
    for (unsigned j = 0; j < cols; ++j) {
        if (fails(3, j)) {
            test4_cols.push_back(j);
        }
    }
    const auto window = locate_activation(test4_cols, m);

    std::vector<Verdict> verdicts(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        Verdict& v = verdicts[j];
        if (fails(0, j) || fails(1, j)) {
            const bool raw_comp = is_bitwise_complement(raw[0][j], raw[1][j]);
            const bool cmp_comp = is_bitwise_complement(compared[0][j], compared[1][j]);
            if (raw_comp && cmp_comp) {
                v.kind = VerdictKind::WeightRegister;
            } else if (!raw_comp && !cmp_comp) {
                v.kind = VerdictKind::OutputRegister;
            } else if (raw_comp) {
                v.kind = VerdictKind::ComparisonAdder;
            } else {
                v.kind = VerdictKind::Unclassified;
            }
        } else if (fails(2, j)) {
            v.kind = VerdictKind::WeightIndexRegister;
        } else if (fails(3, j)) {
            if (window) {
                v = {VerdictKind::ActivationWindow, window->first, window->last};
            } else {
                v.kind = VerdictKind::Unclassified;
            }
        }
    }
    return verdicts;
}

nlohmann::json to_json(const TestReport& report)
{
    auto values = [](const SessionOutputs& outs) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& test : outs) {
            std::vector<std::int64_t> row;
            for (const Word& w : test) {
                row.push_back(w.value());
            }
            j.push_back(row);
        }
        return j;
    };
    nlohmann::json verdicts = nlohmann::json::array();
    for (std::size_t j = 0; j < report.verdicts.size(); ++j) {
        const Verdict& v = report.verdicts[j];
        nlohmann::json entry = {{"column", j}, {"verdict", to_string(v.kind)}};
        if (v.kind == VerdictKind::ActivationWindow) {
            entry["window"] = {v.window_first, v.window_last};
        }
        verdicts.push_back(std::move(entry));
    }
    return {{"tile_id", report.tile_id},
            {"raw", values(report.raw)},
            {"compared", values(report.compared)},
            {"detected", report.detected},
            {"verdicts", std::move(verdicts)}};
}

}  // namespace stsa

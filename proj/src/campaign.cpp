// SPDX-FileCopyrightText: © 2026 The stsa Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "stsa/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <ostream>
#include <random>
#include <thread>

namespace stsa {

std::vector<FaultSite> enumerate_faults(const ArrayConfig& config)
{
    config.validate();
    std::vector<FaultSite> sites;
    auto add = [&](RegClass reg, unsigned row, unsigned col, unsigned elements) {
        const unsigned width = register_width(reg, config);
        for (unsigned e = 0; e < elements; ++e) {
            for (unsigned b = 0; b < width; ++b) {
                for (unsigned stuck = 0; stuck < 2; ++stuck) {
                    sites.push_back({reg, row, col, e, b, stuck});
                }
            }
        }
    };
    for (unsigned r = 0; r < config.rows; ++r) {
        for (unsigned c = 0; c < config.cols; ++c) {
            add(RegClass::Activation, r, c, config.m);
            add(RegClass::Weight, r, c, config.n);
            add(RegClass::WeightIndex, r, c, config.n);
            add(RegClass::Output, r, c, 1);
        }
    }
    for (unsigned c = 0; c < config.cols; ++c) {
        add(RegClass::EdgeAccumulator, 0, c, 1);
    }
    return sites;
}

std::optional<bool> classification_matches(const FaultSite& site, const TestReport& report)
{
    if (!report.detected) {
        return std::nullopt;
    }
    // Every flagged column must carry `kind`, and the faulty column must be flagged.
    auto only_own_column = [&](VerdictKind kind) {
        for (std::size_t j = 0; j < report.verdicts.size(); ++j) {
            const VerdictKind got = report.verdicts[j].kind;
            if (j == site.col ? got != kind : got != VerdictKind::Ok) {
                return false;
            }
        }
        return true;
    };
    auto clean = [&](unsigned test) { return report.failing_columns(test).empty(); };

    switch (site.reg) {
    case RegClass::Weight:
        return only_own_column(VerdictKind::WeightRegister);
    case RegClass::Output:
        return only_own_column(VerdictKind::OutputRegister);
    case RegClass::EdgeAccumulator:
        return only_own_column(VerdictKind::ComparisonAdder);
    case RegClass::WeightIndex:
        if (!clean(0) || !clean(1) || !clean(3)) {
            return std::nullopt;
        }
        return only_own_column(VerdictKind::WeightIndexRegister);
    case RegClass::Activation: {
        if (!clean(0) || !clean(1) || !clean(2)) {
            return std::nullopt;
        }
        for (const Verdict& v : report.verdicts) {
            if (v.kind != VerdictKind::Ok &&
                (v.kind != VerdictKind::ActivationWindow || site.col < v.window_first || site.col > v.window_last)) {
                return false;
            }
        }
        return true;
    }
    }
    return std::nullopt;
}

namespace {

struct TileContext {
    const SparseWeightTile* tile;
    GoldenReference golden;
    std::vector<Matrix> trial_inputs;
    std::vector<Matrix> clean_outputs;
};

FaultOutcome evaluate_fault(const FaultSite& site, std::span<const TileContext> tiles, const ArrayConfig& config,
                            const CampaignOptions& options)
{
    FaultOutcome outcome{site, std::nullopt, std::nullopt, std::nullopt};
    SystolicArray array(config);
    array.inject(site);
    for (std::size_t t = 0; t < tiles.size(); ++t) {
        array.load_weights(*tiles[t].tile);
        const TestReport report = run_session(array, tiles[t].golden, t);
        if (report.detected) {
            outcome.detected_at = t;
            if (options.verify_classification) {
                outcome.classified_correctly = classification_matches(site, report);
            }
            return outcome;
        }
    }

    if (options.check_harmless) {
        bool harmless = true;
        for (std::size_t t = 0; t < tiles.size() && harmless; ++t) {
            array.load_weights(*tiles[t].tile);
            for (std::size_t trial = 0; trial < tiles[t].trial_inputs.size() && harmless; ++trial) {
                harmless = array.run_compute(tiles[t].trial_inputs[trial]).out == tiles[t].clean_outputs[trial];
            }
        }
        outcome.harmless = harmless;
    }
    return outcome;
}

}  // namespace

CampaignResult run_campaign(std::span<const SparseWeightTile> tiles, const ArrayConfig& config,
                            const CampaignOptions& options)
{
    const std::vector<FaultSite> faults = enumerate_faults(config);
    return run_campaign(tiles, config, faults, options);
}

CampaignResult run_campaign(std::span<const SparseWeightTile> tiles, const ArrayConfig& config,
                            std::span<const FaultSite> faults, const CampaignOptions& options)
{
    config.validate();
    if (tiles.empty()) {
        throw UsageError("run_campaign: need at least one tile");
    }
    for (const FaultSite& f : faults) {
        validate_site(f, config);
    }

    CampaignResult result;
    CoverageReport& report = result.report;

    // Fault-free reference per tile: golden values, a false-positive check,
    // and clean outputs for the harmlessness replays.
    std::mt19937_64 rng(options.seed);
    const std::int64_t act_max = (std::int64_t{1} << (config.data_width - 1)) - 1;
    std::uniform_int_distribution<std::int64_t> act_dist(-act_max - 1, act_max);
    std::vector<TileContext> contexts;
    SystolicArray clean(config);
    for (std::size_t t = 0; t < tiles.size(); ++t) {
        TileContext ctx{&tiles[t], compute_golden(tiles[t], config), {}, {}};
        clean.load_weights(tiles[t]);
        if (run_session(clean, ctx.golden, t).detected) {
            ++report.false_positives;
        }
        if (options.check_harmless) {
            for (unsigned trial = 0; trial < options.harmless_trials; ++trial) {
                Matrix a(options.harmless_rows, static_cast<std::size_t>(config.rows) * config.m);
                for (auto& v : a.data) {
                    v = act_dist(rng);
                }
                ctx.clean_outputs.push_back(clean.run_compute(a).out);
                ctx.trial_inputs.push_back(std::move(a));
            }
        }
        contexts.push_back(std::move(ctx));
    }

    result.outcomes.resize(faults.size());
    unsigned workers = options.threads ? options.threads : std::max(1U, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(faults.size(), 1)));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < faults.size(); i = next++) {
            result.outcomes[i] = evaluate_fault(faults[i], contexts, config, options);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
    }

    std::vector<std::uint64_t> first_detections(tiles.size(), 0);
    for (const FaultOutcome& o : result.outcomes) {
        ClassCoverage& cls = report.per_class[static_cast<std::size_t>(o.site.reg)];
        ++cls.total;
        if (o.detected_at) {
            ++cls.detected;
            ++first_detections[*o.detected_at];
        } else {
            ++cls.undetected;
        }
        if (o.harmless) {
            ++(*o.harmless ? cls.harmless_verified : cls.not_harmless);
        }
        if (o.classified_correctly) {
            ++cls.classification_checked;
            cls.classification_correct += *o.classified_correctly ? 1 : 0;
        }
    }
    report.total_faults = faults.size();
    std::uint64_t running = 0;
    for (std::uint64_t d : first_detections) {
        running += d;
        report.cumulative_curve.push_back(report.total_faults ? static_cast<double>(running) / report.total_faults
                                                              : 0.0);
    }
    report.detected = running;
    report.coverage = report.total_faults ? static_cast<double>(running) / report.total_faults : 0.0;
    return result;
}

nlohmann::json to_json(const CoverageReport& report)
{
    nlohmann::json classes = nlohmann::json::object();
    for (RegClass reg : kAllRegClasses) {
        const ClassCoverage& c = report.of(reg);
        classes[std::string(to_string(reg))] = {
            {"total", c.total},
            {"detected", c.detected},
            {"undetected", c.undetected},
            {"harmless_verified", c.harmless_verified},
            {"not_harmless", c.not_harmless},
            {"coverage", c.total ? static_cast<double>(c.detected) / c.total : 0.0},
            {"classification_checked", c.classification_checked},
            {"classification_correct", c.classification_correct},
        };
    }
    return {{"total_faults", report.total_faults},
            {"detected", report.detected},
            {"coverage", report.coverage},
            {"false_positives", report.false_positives},
            {"per_class", std::move(classes)},
            {"cumulative_curve", report.cumulative_curve}};
}

void write_curve_csv(std::ostream& out, const CoverageReport& report)
{
    out << "tile_index,coverage\n";
    for (std::size_t t = 0; t < report.cumulative_curve.size(); ++t) {
        out << t << ',' << report.cumulative_curve[t] << '\n';
    }
}

}  // namespace stsa

// SPDX-FileCopyrightText: © 2026 The stsa Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "stsa/cli.hpp"

#include "stsa/campaign.hpp"
#include "stsa/driver.hpp"
#include "stsa/matrix.hpp"
#include "stsa/selftest.hpp"
#include "stsa/sparsity.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

namespace stsa::cli {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

unsigned to_unsigned(std::string_view key, std::string_view text)
{
    unsigned v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw UsageError("setting '" + std::string(key) + "': expected an unsigned integer, got '" +
                         std::string(text) + "'");
    }
    return v;
}

bool to_switch(std::string_view key, std::string_view text)
{
    if (text == "on" || text == "true" || text == "1") {
        return true;
    }
    if (text == "off" || text == "false" || text == "0") {
        return false;
    }
    throw UsageError("setting '" + std::string(key) + "': expected on/off, got '" + std::string(text) + "'");
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j)
{
    std::ofstream out(path);
    if (!out) {
        throw UsageError("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

// Options shared by every subcommand. Explicit flags win over the config
// file, which wins over built-in defaults.
struct Common {
    std::string config_path;
    std::optional<unsigned> rows, cols, m, n, data_width, acc_width, seed, threads;
    std::optional<std::string> mode, testing;
    Settings settings;

    void add_to(CLI::App& app)
    {
        app.add_option("--config", config_path, "key=value settings file");
        app.add_option("--rows", rows, "array rows R");
        app.add_option("--cols", cols, "array columns C");
        app.add_option("--m", m, "block size M");
        app.add_option("--n", n, "weight slots per TPE N");
        app.add_option("--data-width", data_width, "input/weight width in bits");
        app.add_option("--acc-width", acc_width, "accumulator width in bits");
        app.add_option("--mode", mode, "active sparsity, e.g. 2:4 or 1:4");
        app.add_option("--seed", seed, "seed for all randomness");
    }

    void load()
    {
        if (!config_path.empty()) {
            settings = read_settings(config_path);
        }
    }

    std::optional<std::string> setting(std::string_view key) const
    {
        const auto it = settings.find(key);
        return it == settings.end() ? std::nullopt : std::optional<std::string>(it->second);
    }

    unsigned number(const std::optional<unsigned>& flag, std::string_view key, unsigned fallback) const
    {
        if (flag) {
            return *flag;
        }
        const auto s = setting(key);
        return s ? to_unsigned(key, *s) : fallback;
    }

    std::string text(const std::optional<std::string>& flag, std::string_view key, std::string fallback) const
    {
        if (flag) {
            return *flag;
        }
        return setting(key).value_or(std::move(fallback));
    }

    std::string path(const std::string& flag, std::string_view key, std::string fallback) const
    {
        if (!flag.empty()) {
            return flag;
        }
        return setting(key).value_or(std::move(fallback));
    }

    ArrayConfig array_config() const
    {
        ArrayConfig cfg;
        cfg.rows = number(rows, "rows", cfg.rows);
        cfg.cols = number(cols, "cols", cfg.cols);
        cfg.m = number(m, "m", cfg.m);
        cfg.n = number(n, "n", cfg.n);
        cfg.data_width = number(data_width, "data_width", cfg.data_width);
        cfg.acc_width = number(acc_width, "acc_width", cfg.acc_width);
        const std::string mode_text = text(mode, "mode", "");
        if (!mode_text.empty()) {
            apply_mode(cfg, mode_text, cfg.n);
        }
        cfg.validate();
        return cfg;
    }

    std::uint64_t rng_seed() const { return number(seed, "seed", 1); }
    bool testing_on() const { return to_switch("testing", text(testing, "testing", "on")); }
};

std::vector<FaultSite> parse_faults(const std::vector<std::string>& specs, const ArrayConfig& cfg)
{
    std::vector<FaultSite> faults;
    for (const std::string& s : specs) {
        FaultSite f = parse_fault_spec(s);
        validate_site(f, cfg);
        faults.push_back(f);
    }
    return faults;
}

int cmd_prune(const Common& common, const std::string& input, const std::string& out_flag,
              const std::string& dense_flag, std::ostream& out)
{
    const Matrix dense = read_csv(input);
    const unsigned m = common.number(common.m, "m", 4);
    unsigned n = common.number(common.n, "n", 2);
    if (const std::string mode = common.text(common.mode, "mode", ""); !mode.empty()) {
        ArrayConfig probe;
        probe.m = m;
        apply_mode(probe, mode, n);
        n = probe.active_slots();
        if (probe.m != m) {
            throw UsageError("--mode block size disagrees with --m");
        }
    }
    const unsigned dw = common.number(common.data_width, "data_width", 16);
    const SparseWeightTile tile = pack_tile(dense, m, n, dw);

    write_json(common.path(out_flag, "out", "tile.json"), to_json(tile));
    const Matrix pruned = densify(tile);
    if (const std::string dense_out = common.path(dense_flag, "dense_out", ""); !dense_out.empty()) {
        write_csv(dense_out, pruned);
    }

    std::size_t nz_in = 0;
    std::size_t nz_out = 0;
    for (std::size_t i = 0; i < dense.data.size(); ++i) {
        nz_in += dense.data[i] != 0;
        nz_out += pruned.data[i] != 0;
    }
    std::map<std::string, std::size_t> masks;
    for (unsigned i = 0; i < tile.rows(); ++i) {
        for (unsigned j = 0; j < tile.cols(); ++j) {
            ++masks[block_mask(tile.block(i, j), m)];
        }
    }
    out << "pruned " << dense.rows << "x" << dense.cols << " to " << n << ":" << m << ", non-zero ratio "
        << static_cast<double>(nz_out) / static_cast<double>(dense.data.size()) << " (" << nz_out << " of "
        << dense.data.size() << " kept, " << nz_in << " non-zero before)\n";
    for (const auto& [mask, count] : masks) {
        out << "  mask " << mask << ": " << count << " blocks\n";
    }
    return kExitClean;
}

int cmd_matmul(const Common& common, const std::string& a_path, const std::string& w_path,
               const std::vector<std::string>& fault_specs, const std::string& out_flag,
               const std::string& stats_flag, const std::string& reports_flag, std::ostream& out)
{
    const ArrayConfig cfg = common.array_config();
    const auto faults = parse_faults(fault_specs, cfg);
    const Workload wl{{Layer{read_csv(a_path), read_csv(w_path)}}};
    const bool testing = common.testing_on();

    const MatmulRun run = tiled_matmul(wl, cfg, testing ? Testing::On : Testing::Off, faults);
    write_csv(common.path(out_flag, "out", "C.csv"), run.results.front());

    nlohmann::json stats = to_json(run.stats);
    stats["testing"] = testing;
    if (testing) {
        const MatmulRun baseline = tiled_matmul(wl, cfg, Testing::Off, faults);
        const double overhead = overhead_report(run.stats, baseline.stats);
        stats["baseline_total_cycles"] = baseline.stats.total_cycles;
        stats["overhead"] = overhead;
        out << "overhead " << overhead * 100.0 << "% (" << run.stats.total_cycles << " vs "
            << baseline.stats.total_cycles << " cycles)\n";
    }
    write_json(common.path(stats_flag, "stats", "stats.json"), stats);

    bool detected = false;
    nlohmann::json reports = nlohmann::json::array();
    for (const TestReport& r : run.reports) {
        detected = detected || r.detected;
        reports.push_back(to_json(r));
    }
    if (const std::string path = common.path(reports_flag, "reports", ""); !path.empty()) {
        write_json(path, reports);
    }
    out << run.stats.tiles_executed << " tiles, " << run.stats.total_cycles << " cycles"
        << (detected ? ", fault detected\n" : "\n");
    return detected ? kExitDetected : kExitClean;
}

int cmd_selftest(const Common& common, const std::string& w_path, const std::vector<std::string>& fault_specs,
                 const std::string& report_flag, std::ostream& out)
{
    const ArrayConfig cfg = common.array_config();
    const auto faults = parse_faults(fault_specs, cfg);
    const Matrix w = read_csv(w_path);
    const Workload wl{{Layer{Matrix(1, w.rows), w}}};

    SystolicArray array(cfg);
    for (const FaultSite& f : faults) {
        array.inject(f);
    }
    nlohmann::json reports = nlohmann::json::array();
    bool detected = false;
    std::size_t tile_id = 0;
    for (const SparseWeightTile& tile : weight_tiles(wl, cfg)) {
        array.load_weights(tile);
        const TestReport report = run_session(array, compute_golden(tile, cfg), tile_id++);
        detected = detected || report.detected;
        reports.push_back(to_json(report));
        for (std::size_t j = 0; j < report.verdicts.size(); ++j) {
            const Verdict& v = report.verdicts[j];
            if (v.kind == VerdictKind::Ok) {
                continue;
            }
            out << "tile " << report.tile_id << " column " << j << ": " << to_string(v.kind);
            if (v.kind == VerdictKind::ActivationWindow) {
                out << " [" << v.window_first << ".." << v.window_last << "]";
            }
            out << '\n';
        }
    }
    write_json(common.path(report_flag, "report", "report.json"), {{"reports", reports}, {"detected", detected}});
    out << (detected ? "fault detected\n" : "clean\n");
    return detected ? kExitDetected : kExitClean;
}

int cmd_campaign(const Common& common, const std::vector<std::string>& weight_paths,
                 std::optional<unsigned> layers, std::optional<unsigned> rows_per_tile, bool no_harmless,
                 const std::string& coverage_flag, const std::string& curve_flag, std::ostream& out)
{
    const ArrayConfig cfg = common.array_config();
    Workload wl;
    if (!weight_paths.empty()) {
        for (const std::string& p : weight_paths) {
            const Matrix w = read_csv(p);
            wl.layers.push_back({Matrix(1, w.rows), w});
        }
    } else {
        SyntheticOptions opts;
        opts.layers = common.number(layers, "layers", 4);
        opts.rows_per_tile = common.number(rows_per_tile, "rows_per_tile", 1);
        wl = synthetic_workload(cfg, opts, common.rng_seed());
    }
    const std::vector<SparseWeightTile> tiles = weight_tiles(wl, cfg);

    CampaignOptions options;
    options.seed = common.rng_seed();
    options.threads = common.number(common.threads, "threads", 0);
    options.check_harmless = !no_harmless && to_switch("harmless", common.setting("harmless").value_or("on"));
    const CampaignResult result = run_campaign(tiles, cfg, options);
    const CoverageReport& rep = result.report;

    nlohmann::json j = to_json(rep);
    j["config"] = {{"rows", cfg.rows},           {"cols", cfg.cols},         {"m", cfg.m},
                   {"n", cfg.n},                 {"mode", mode_string(cfg)}, {"data_width", cfg.data_width},
                   {"acc_width", cfg.acc_width}, {"seed", options.seed},     {"tiles", tiles.size()}};
    write_json(common.path(coverage_flag, "coverage", "coverage.json"), j);
    {
        const std::string curve_path = common.path(curve_flag, "curve", "curve.csv");
        std::ofstream curve(curve_path);
        if (!curve) {
            throw UsageError("cannot write " + curve_path);
        }
        write_curve_csv(curve, rep);
    }

    out << tiles.size() << " tiles, " << rep.total_faults << " faults, coverage " << rep.coverage * 100.0 << "%\n";
    for (RegClass reg : kAllRegClasses) {
        const ClassCoverage& c = rep.of(reg);
        out << "  " << to_string(reg) << ": " << c.detected << "/" << c.total << " detected";
        if (options.check_harmless) {
            out << ", " << c.not_harmless << " undetected not harmless";
        }
        out << '\n';
    }
    if (rep.false_positives) {
        out << "  WARNING: " << rep.false_positives << " fault-free sessions flagged a fault\n";
    }
    return kExitClean;
}

}  // namespace

Settings parse_settings(std::string_view text)
{
    Settings s;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos || trim(line.substr(0, eq)).empty()) {
            throw UsageError("settings line " + std::to_string(line_no) + ": expected key=value");
        }
        std::string key(trim(line.substr(0, eq)));
        for (char& c : key) {
            if (c == '-') {
                c = '_';
            }
        }
        s[key] = std::string(trim(line.substr(eq + 1)));
    }
    return s;
}

Settings read_settings(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_settings(ss.str());
}

void apply_mode(ArrayConfig& config, std::string_view mode, unsigned physical_n)
{
    const auto colon = mode.find(':');
    if (colon == std::string_view::npos) {
        throw UsageError("mode must look like N:M, got '" + std::string(mode) + "'");
    }
    const unsigned active = to_unsigned("mode", mode.substr(0, colon));
    const unsigned m = to_unsigned("mode", mode.substr(colon + 1));
    config.m = m;
    if (active == 1 && physical_n > 1) {
        config.n = physical_n;
        config.mode = SparsityMode::OneOfM;
    } else {
        config.n = active;
        config.mode = SparsityMode::NofM;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Sparse systolic tensor array simulator with periodic online self-test", "stsa"};
    app.require_subcommand(1);

    Common common;
    std::string input, a_path, w_path, out_path, dense_out, stats_path, reports_path, report_path, coverage_path,
        curve_path;
    std::vector<std::string> fault_specs, weight_paths;
    std::optional<unsigned> layers, rows_per_tile;
    bool no_harmless = false;

    auto* prune = app.add_subcommand("prune", "N:M-prune a dense CSV matrix into a packed tile");
    common.add_to(*prune);
    prune->add_option("input", input, "dense weight CSV")->required();
    prune->add_option("-o,--out", out_path, "packed tile JSON (default tile.json)");
    prune->add_option("--dense-out", dense_out, "write the pruned dense matrix as CSV");

    auto* matmul = app.add_subcommand("matmul", "tiled A x W on the simulated array");
    common.add_to(*matmul);
    matmul->add_option("a", a_path, "activation CSV (X x K)")->required();
    matmul->add_option("w", w_path, "weight CSV (K x C)")->required();
    matmul->add_option("--testing", common.testing, "on|off, run a self-test session per tile");
    matmul->add_option("--fault", fault_specs, "inject class:row:col:element:bit:stuck");
    matmul->add_option("-o,--out", out_path, "result CSV (default C.csv)");
    matmul->add_option("--stats", stats_path, "cycle statistics JSON (default stats.json)");
    matmul->add_option("--reports", reports_path, "self-test reports JSON");

    auto* selftest = app.add_subcommand("selftest", "load weight tiles and run one session per tile");
    common.add_to(*selftest);
    selftest->add_option("w", w_path, "weight CSV")->required();
    selftest->add_option("--fault", fault_specs, "inject class:row:col:element:bit:stuck");
    selftest->add_option("-o,--report", report_path, "report JSON (default report.json)");

    auto* campaign = app.add_subcommand("campaign", "exhaustive single stuck-at fault campaign");
    common.add_to(*campaign);
    campaign->add_option("--weights", weight_paths, "weight CSV per layer (otherwise synthetic layers)");
    campaign->add_option("--layers", layers, "number of synthetic layers");
    campaign->add_option("--rows-per-tile", rows_per_tile, "rows of A per synthetic layer");
    campaign->add_option("--threads", common.threads, "worker threads (0 = all cores)");
    campaign->add_flag("--no-harmless", no_harmless, "skip replaying undetected faults");
    campaign->add_option("--coverage", coverage_path, "coverage JSON (default coverage.json)");
    campaign->add_option("--curve", curve_path, "cumulative coverage CSV (default curve.csv)");

    std::vector<const char*> argv{"stsa"};
    for (const std::string& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitClean;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitClean;
    } catch (const CLI::ParseError& e) {
        err << "stsa: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        common.load();
        if (prune->parsed()) {
            return cmd_prune(common, input, out_path, dense_out, out);
        }
        if (matmul->parsed()) {
            return cmd_matmul(common, a_path, w_path, fault_specs, out_path, stats_path, reports_path, out);
        }
        if (selftest->parsed()) {
            return cmd_selftest(common, w_path, fault_specs, report_path, out);
        }
        return cmd_campaign(common, weight_paths, layers, rows_per_tile, no_harmless, coverage_path, curve_path,
                            out);
    } catch (const UsageError& e) {
        err << "stsa: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace stsa::cli

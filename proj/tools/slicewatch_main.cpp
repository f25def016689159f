#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "slicewatch/config.hpp"
#include "slicewatch/csv.hpp"
#include "slicewatch/harness.hpp"
#include "slicewatch/sim.hpp"

namespace {

using namespace slicewatch;

// Exit codes: 0 success, 2 usage, 3 config parse, 4 unknown config key,
// 5 input/output failure, 1 anything else.
enum ExitCode {
    kOk = 0,
    kErrOther = 1,
    kErrUsage = 2,
    kErrConfig = 3,
    kErrUnknownKey = 4,
    kErrIo = 5,
};

std::string keys_help() {
    std::ostringstream out;
    out << "Config keys (config file and --set overrides):\n";
    for (const auto& key : Config::known_keys()) {
        out << "  " << key.name << " (default: "
            << (*key.default_value ? key.default_value : "<empty>") << ") — " << key.help
            << "\n";
    }
    return out.str();
}

std::vector<std::string> split_csv_list(const std::string& raw) {
    std::vector<std::string> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = item.find_last_not_of(" \t");
        out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

CsvColumnMapping mapping_from(const Config& config) {
    CsvColumnMapping m;
    m.time = config.get("csv.time");
    m.slice = config.get("csv.slice");
    m.sfc = config.get("csv.sfc");
    m.vn = config.get("csv.vn");
    m.pn = config.get("csv.pn");
    m.features = split_csv_list(config.get("csv.features"));
    m.pn_label = config.get("csv.pn_label");
    m.pl_label = config.get("csv.pl_label");
    return m;
}

SourceFactory single_trace_factory(const Config& config, const std::string& trace_path) {
    if (trace_path.empty()) {
        return scenario_factory(config);
    }
    auto trace = std::make_shared<IngestedTrace>(ingest_csv(trace_path, mapping_from(config)));
    return [trace](int) { return make_ingest_source(*trace); };
}

int run_detect(const Config& config, const std::string& trace_path, RunMode mode,
               const std::string& out_dir, const std::string& prefix) {
    const auto factory = single_trace_factory(config, trace_path);
    const ExperimentResult result = run_experiment(config, mode, 1, factory);
    const auto paths = emit_results(result, config, out_dir, prefix);
    for (const auto& p : paths) std::cout << p << '\n';
    return kOk;
}

int run_bench(const Config& config, const std::string& out_dir) {
    Config polluted = config;
    if (config.get_double("detector.artd") <= 0.0) {
        polluted.set("detector.artd", "0.1");
    }
    Config clean = config;
    clean.set("detector.artd", "0");

    struct BenchEntry {
        const Config& config;
        RunMode mode;
        std::string prefix;
    };
    const std::vector<BenchEntry> entries = {
        {clean, RunMode::PnConsensus, "pn_consensus_"},
        {clean, RunMode::PnSingleAgent, "pn_single_"},
        {polluted, RunMode::PnSingleAgent, "pn_single_artd_"},
        {clean, RunMode::PlRollback, "pl_rollback_"},
        {clean, RunMode::PlNoRollback, "pl_norollback_"},
        {polluted, RunMode::PlNoRollback, "pl_norollback_artd_"},
    };

    const int runs = static_cast<int>(config.get_long("runs"));
    nlohmann::json summary;
    summary["runs"] = runs;
    summary["config_hash"] = config.hash();
    summary["modes"] = nlohmann::json::object();

    for (const auto& entry : entries) {
        const auto factory = scenario_factory(entry.config);
        const ExperimentResult result = run_experiment(entry.config, entry.mode, runs, factory);
        const auto paths = emit_results(result, entry.config, out_dir, entry.prefix);
        for (const auto& p : paths) std::cout << p << '\n';

        nlohmann::json m;
        m["mode"] = result.report.mode;
        m["artd"] = entry.config.get_double("detector.artd");
        m["confusion"] = {{"tp", result.report.total.tp},
                          {"tn", result.report.total.tn},
                          {"fp", result.report.total.fp},
                          {"fn", result.report.total.fn}};
        const auto& metrics = result.report.metrics;
        m["metrics"]["accuracy"] =
            metrics.accuracy ? nlohmann::json(*metrics.accuracy) : nlohmann::json(nullptr);
        m["metrics"]["precision"] =
            metrics.precision ? nlohmann::json(*metrics.precision) : nlohmann::json(nullptr);
        m["metrics"]["recall"] =
            metrics.recall ? nlohmann::json(*metrics.recall) : nlohmann::json(nullptr);
        m["metrics"]["f1"] = metrics.f1 ? nlohmann::json(*metrics.f1) : nlohmann::json(nullptr);
        summary["modes"][entry.prefix.substr(0, entry.prefix.size() - 1)] = std::move(m);
    }

    std::filesystem::create_directories(out_dir);
    const std::string summary_path =
        (std::filesystem::path(out_dir) / "bench_summary.json").string();
    std::ofstream out(summary_path);
    if (!out) throw IoError("cannot write " + summary_path);
    out << summary.dump(2) << '\n';
    std::cout << summary_path << '\n';
    return kOk;
}

int run_ingest(const Config& config, const std::string& trace_path) {
    const IngestedTrace trace = ingest_csv(trace_path, mapping_from(config));
    std::cout << "rows ok: " << trace.times.size() * trace.vns.size() << '\n'
              << "time steps: " << trace.times.size() << '\n'
              << "virtual nodes: " << trace.vns.size() << '\n'
              << "features per vn: " << trace.num_features << '\n'
              << "pn labels: " << (trace.has_pn_labels ? "present" : "absent") << '\n'
              << "pl labels: " << (trace.has_pl_labels ? "present" : "absent") << '\n';
    const auto source = make_ingest_source(trace);
    std::cout << "pn groups: " << source->pn_groups().size() << '\n'
              << "pl groups: " << source->pl_groups().size() << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"slicewatch — distributed online anomaly detection for sliced substrate networks"};
    app.require_subcommand(1);
    app.footer(keys_help());

    std::string config_path;
    std::vector<std::string> overrides;
    const char* env_out = std::getenv("SLICEWATCH_OUT");
    std::string out_dir = env_out ? env_out : "out";
    app.add_option("--config", config_path, "key = value config file");
    app.add_option("--set", overrides, "override a config key (key=value), repeatable");
    app.add_option("--out", out_dir, "output directory (default: $SLICEWATCH_OUT or ./out)");

    auto* simulate = app.add_subcommand("simulate", "generate a scenario trace CSV");
    std::string simulate_path;
    simulate->add_option("--trace", simulate_path, "trace output path (default: <out>/trace.csv)");

    auto* detect_pn = app.add_subcommand("detect-pn", "run the physical-node detector");
    std::string pn_trace;
    bool pn_baseline = false;
    detect_pn->add_option("--trace", pn_trace, "ingest this trace CSV instead of simulating");
    detect_pn->add_flag("--baseline", pn_baseline, "single-agent baseline on concatenated vectors");

    auto* detect_pl = app.add_subcommand("detect-pl", "run the physical-link detector");
    std::string pl_trace;
    bool pl_no_rollback = false;
    detect_pl->add_option("--trace", pl_trace, "ingest this trace CSV instead of simulating");
    detect_pl->add_flag("--no-rollback", pl_no_rollback, "baseline that commits every update");

    auto* bench = app.add_subcommand("bench", "Monte Carlo comparison across detector modes");

    auto* ingest = app.add_subcommand("ingest", "validate a measurement CSV and print a summary");
    std::string ingest_path;
    ingest->add_option("--trace", ingest_path, "measurement CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kErrUsage;
    }

    try {
        Config config = config_path.empty() ? Config() : Config::from_file(config_path);
        for (const auto& assignment : overrides) config.apply_override(assignment);

        if (simulate->parsed()) {
            std::filesystem::create_directories(out_dir);
            const std::string path =
                simulate_path.empty()
                    ? (std::filesystem::path(out_dir) / "trace.csv").string()
                    : simulate_path;
            const Scenario scenario(scenario_config_from(config));
            export_trace_csv(scenario, path);
            std::cout << path << '\n';
            return kOk;
        }
        if (detect_pn->parsed()) {
            return run_detect(config, pn_trace,
                              pn_baseline ? RunMode::PnSingleAgent : RunMode::PnConsensus,
                              out_dir, pn_baseline ? "pn_single_" : "pn_consensus_");
        }
        if (detect_pl->parsed()) {
            return run_detect(config, pl_trace,
                              pl_no_rollback ? RunMode::PlNoRollback : RunMode::PlRollback,
                              out_dir, pl_no_rollback ? "pl_norollback_" : "pl_rollback_");
        }
        if (bench->parsed()) {
            return run_bench(config, out_dir);
        }
        if (ingest->parsed()) {
            return run_ingest(config, ingest_path);
        }
        std::cerr << "error: no command\n";
        return kErrUsage;
    } catch (const UnknownKeyError& e) {
        std::cerr << "error (unknown key): " << e.what() << '\n';
        return kErrUnknownKey;
    } catch (const ConfigError& e) {
        std::cerr << "error (config): " << e.what() << '\n';
        return kErrConfig;
    } catch (const CsvError& e) {
        std::cerr << "error (csv): " << e.what() << '\n';
        return kErrIo;
    } catch (const IoError& e) {
        std::cerr << "error (io): " << e.what() << '\n';
        return kErrIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kErrOther;
    }
}

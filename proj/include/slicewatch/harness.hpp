#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slicewatch/cca.hpp"
#include "slicewatch/config.hpp"
#include "slicewatch/csv.hpp"
#include "slicewatch/metrics.hpp"
#include "slicewatch/ocsvm.hpp"
#include "slicewatch/sim.hpp"

namespace slicewatch {

struct DetectorOptions {
    int rff_dim = 100;
    double kernel_width = 4.0;
    std::uint64_t rff_seed = 7;
    double eta = 10.0;
    double penalty = 1.0;
    long warmup_pn = 200;
    long t0 = 10;
    double t2_threshold = 1.0;
    bool quantile_calibration = false;
    double quantile = 0.99;
    long calibration_window = 200;
    double eig_floor = kEigFloor;
    double artd = 0.0;

    static DetectorOptions from_config(const Config& config);
};

enum class RunMode {
    PnConsensus,    // one agent per VN, consensus verdict
    PnSingleAgent,  // centralized online baseline on the concatenated PN vector
    PlRollback,     // incremental CCA with commit/rollback
    PlNoRollback,   // online CCA baseline, every update committed
};

const char* mode_name(RunMode mode);
bool is_pn_mode(RunMode mode);

struct PnTargetGroup {
    std::string name;
    int target_id = -1;  // scenario PN index, -1 for ingested traces
    std::vector<int> vns;
};

struct PlTargetGroup {
    std::string name;
    int target_id = -1;  // scenario PL index, -1 for ingested traces
    std::vector<std::pair<int, int>> vl_endpoints;  // (upstream vn, downstream vn)
};

// Uniform view over simulated and ingested measurement streams.
class TraceSource {
public:
    virtual ~TraceSource() = default;
    virtual long num_steps() const = 0;
    virtual int num_vns() const = 0;
    virtual int num_features() const = 0;
    virtual const std::vector<PnTargetGroup>& pn_groups() const = 0;
    virtual const std::vector<PlTargetGroup>& pl_groups() const = 0;
    virtual const Vec& features(long t, int vn) const = 0;
    virtual std::optional<bool> pn_label(long t, int group) const = 0;
    virtual std::optional<bool> pl_label(long t, int group) const = 0;

    // Training-pollution hook; only simulated sources can regenerate a step
    // under a forced capacity loss.
    virtual bool supports_pollution() const { return false; }
    virtual Vec polluted_features(long /*t*/, int vn, bool /*link_target*/, int /*target*/,
                                  double /*loss*/) const {
        return features(0, vn);
    }
};

// Scenario parameters assembled from the flat config keys.
ScenarioConfig scenario_config_from(const Config& config);

std::unique_ptr<TraceSource> make_scenario_source(const ScenarioConfig& config);
std::unique_ptr<TraceSource> make_ingest_source(IngestedTrace trace);

using SourceFactory = std::function<std::unique_ptr<TraceSource>(int run)>;

// Factory producing the configured scenario with every seed shifted by the
// run index.
SourceFactory scenario_factory(const Config& config);

// Streaming per-feature standardization; each sample is folded into the
// statistics before it is transformed.
class OnlineNormalizer {
public:
    void observe(const Vec& x);
    Vec transform(const Vec& x) const;
    long count() const { return n_; }

private:
    long n_ = 0;
    Vec mean_;
    Vec m2_;
};

struct Series {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;  // NaN marks an undefined value
};

struct TargetReport {
    std::string target;
    ConfusionMatrix cm;
    Metrics metrics;
};

struct ExperimentReport {
    std::string mode;
    int num_runs = 0;
    long scored_verdicts = 0;
    ConfusionMatrix total;
    Metrics metrics;
    std::vector<TargetReport> per_target;
};

struct ExperimentResult {
    ExperimentReport report;
    std::vector<Series> series;
};

// Streams every run through the mode's detectors, scores post-warm-up
// verdicts against labels, aggregates confusion matrices, and records the
// convergence and metric-versus-step series.
ExperimentResult run_experiment(const Config& config, RunMode mode, int num_runs,
                                const SourceFactory& factory);

// Writes <prefix>report.json plus one CSV per series into out_dir.
// Returns the created paths.
std::vector<std::string> emit_results(const ExperimentResult& result, const Config& config,
                                      const std::string& out_dir, const std::string& prefix);

}  // namespace slicewatch

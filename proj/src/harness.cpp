#include "slicewatch/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>

#include <json.hpp>

#include "slicewatch/rng.hpp"

namespace slicewatch {

namespace {

constexpr std::uint64_t kPollutionStream = 0x706f6cULL;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

DetectorOptions DetectorOptions::from_config(const Config& config) {
    DetectorOptions opt;
    opt.rff_dim = config.get_int("detector.rff_dim");
    opt.kernel_width = config.get_double("detector.kernel_width");
    opt.rff_seed = config.get_seed("detector.rff_seed");
    opt.eta = config.get_double("detector.eta");
    opt.penalty = config.get_double("detector.penalty");
    opt.warmup_pn = config.get_long("detector.warmup");
    opt.t0 = config.get_long("detector.t0");
    opt.t2_threshold = config.get_double("detector.t2_threshold");
    opt.quantile_calibration = config.get_bool("detector.quantile_calibration");
    opt.quantile = config.get_double("detector.quantile");
    opt.calibration_window = config.get_long("detector.calibration_window");
    opt.eig_floor = config.get_double("detector.eig_floor");
    opt.artd = config.get_double("detector.artd");
    if (opt.rff_dim < 1) throw ConfigError("detector.rff_dim must be >= 1");
    if (opt.t0 < 2) throw ConfigError("detector.t0 must be >= 2");
    if (opt.artd < 0.0 || opt.artd > 1.0) throw ConfigError("detector.artd must be in [0, 1]");
    return opt;
}

const char* mode_name(RunMode mode) {
    switch (mode) {
        case RunMode::PnConsensus: return "pn-consensus";
        case RunMode::PnSingleAgent: return "pn-single";
        case RunMode::PlRollback: return "pl-rollback";
        case RunMode::PlNoRollback: return "pl-norollback";
    }
    return "unknown";
}

bool is_pn_mode(RunMode mode) {
    return mode == RunMode::PnConsensus || mode == RunMode::PnSingleAgent;
}

// ---------------------------------------------------------------------------
// Trace sources

ScenarioConfig scenario_config_from(const Config& config) {
    ScenarioConfig sc;
    sc.num_pns = config.get_int("num_pns");
    sc.link_probability = config.get_double("link_probability");
    sc.num_sfcs = config.get_int("num_sfcs");
    sc.chain_min = config.get_int("chain_min");
    sc.chain_max = config.get_int("chain_max");
    sc.service_mix = config.get_double_list("service_mix");
    sc.horizon = config.get_long("horizon");
    const double base_rate = config.get_double("anomaly_rate");
    sc.anomaly_rate_pn =
        config.get("anomaly_rate_pn").empty() ? base_rate : config.get_double("anomaly_rate_pn");
    sc.anomaly_rate_pl =
        config.get("anomaly_rate_pl").empty() ? base_rate : config.get_double("anomaly_rate_pl");
    sc.anomaly_start = config.get_long("anomaly_start");
    sc.loss_mean = config.get_double("loss_mean");
    sc.loss_var = config.get_double("loss_var");
    sc.anomaly_mean_duration = config.get_double("anomaly_mean_duration");
    sc.noise_sigma = config.get_double("noise_sigma");
    sc.traffic_sigma = config.get_double("traffic_sigma");
    sc.node_capacity_min = config.get_double("node_capacity_min");
    sc.node_capacity_max = config.get_double("node_capacity_max");
    sc.link_bandwidth_min = config.get_double("link_bandwidth_min");
    sc.link_bandwidth_max = config.get_double("link_bandwidth_max");
    sc.alloc_headroom = config.get_double("alloc_headroom");
    sc.seeds.topology = config.get_seed("seeds.topology");
    sc.seeds.embedding = config.get_seed("seeds.embedding");
    sc.seeds.anomalies = config.get_seed("seeds.anomalies");
    sc.seeds.noise = config.get_seed("seeds.noise");
    return sc;
}

namespace {

class ScenarioSource final : public TraceSource {
public:
    explicit ScenarioSource(const ScenarioConfig& config) : scenario_(config) {
        const auto& sfcs = scenario_.sfcs();
        for (const auto& sfc : sfcs) {
            for (int i = 0; i < sfc.length(); ++i) {
                vn_of_.push_back({sfc.sfc_id, i});
            }
        }
        vn_index_.assign(sfcs.size(), {});
        int next = 0;
        for (const auto& sfc : sfcs) {
            vn_index_[sfc.sfc_id].resize(sfc.length());
            for (int i = 0; i < sfc.length(); ++i) vn_index_[sfc.sfc_id][i] = next++;
        }

        for (int q = 0; q < scenario_.network().num_nodes; ++q) {
            const auto& members = scenario_.vns_by_pn()[q];
            if (members.empty()) continue;
            PnTargetGroup group;
            group.name = "pn:" + std::to_string(q);
            group.target_id = q;
            for (const auto& ref : members) group.vns.push_back(vn_index_[ref.sfc][ref.pos]);
            pn_groups_.push_back(std::move(group));
        }
        for (int l = 0; l < scenario_.network().num_links(); ++l) {
            const auto& members = scenario_.vls_by_pl()[l];
            if (members.empty()) continue;
            PlTargetGroup group;
            const auto& link = scenario_.network().links[l];
            group.name = "pl:" + std::to_string(link.a) + "-" + std::to_string(link.b);
            group.target_id = l;
            for (const auto& ref : members) {
                group.vl_endpoints.emplace_back(vn_index_[ref.sfc][ref.pos],
                                                vn_index_[ref.sfc][ref.pos + 1]);
            }
            pl_groups_.push_back(std::move(group));
        }
    }

    long num_steps() const override { return scenario_.config().horizon; }
    int num_vns() const override { return static_cast<int>(vn_of_.size()); }
    int num_features() const override { return kNumVnFeatures; }
    const std::vector<PnTargetGroup>& pn_groups() const override { return pn_groups_; }
    const std::vector<PlTargetGroup>& pl_groups() const override { return pl_groups_; }

    const Vec& features(long t, int vn) const override {
        if (cached_t_ != t) {
            cache_ = scenario_.step(t);
            cached_t_ = t;
        }
        const auto& ref = vn_of_[vn];
        return cache_.features[ref.sfc][ref.pos];
    }

    std::optional<bool> pn_label(long t, int group) const override {
        features(t, 0);  // ensure cache
        return cache_.pn_anomalous[pn_groups_[group].target_id] != 0;
    }

    std::optional<bool> pl_label(long t, int group) const override {
        features(t, 0);
        return cache_.pl_anomalous[pl_groups_[group].target_id] != 0;
    }

    bool supports_pollution() const override { return true; }

    Vec polluted_features(long t, int vn, bool link_target, int target,
                          double loss) const override {
        if (forced_t_ != t || forced_link_ != link_target || forced_target_ != target ||
            forced_loss_ != loss) {
            forced_cache_ = link_target ? scenario_.step_forced(t, -1, target, loss)
                                        : scenario_.step_forced(t, target, -1, loss);
            forced_t_ = t;
            forced_link_ = link_target;
            forced_target_ = target;
            forced_loss_ = loss;
        }
        const auto& ref = vn_of_[vn];
        return forced_cache_.features[ref.sfc][ref.pos];
    }

    const Scenario& scenario() const { return scenario_; }

private:
    Scenario scenario_;
    std::vector<VnRef> vn_of_;
    std::vector<std::vector<int>> vn_index_;
    std::vector<PnTargetGroup> pn_groups_;
    std::vector<PlTargetGroup> pl_groups_;

    mutable long cached_t_ = -1;
    mutable StepSample cache_;
    mutable long forced_t_ = -1;
    mutable bool forced_link_ = false;
    mutable int forced_target_ = -1;
    mutable double forced_loss_ = 0.0;
    mutable StepSample forced_cache_;
};

class IngestSource final : public TraceSource {
public:
    explicit IngestSource(IngestedTrace trace) : trace_(std::move(trace)) {
        std::map<long, std::vector<int>> by_pn;
        for (std::size_t v = 0; v < trace_.vns.size(); ++v) {
            by_pn[trace_.vns[v].pn_id].push_back(static_cast<int>(v));
        }
        for (const auto& [pn, vns] : by_pn) {
            PnTargetGroup group;
            group.name = "pn:" + std::to_string(pn);
            group.vns = vns;
            pn_groups_.push_back(std::move(group));
        }

        // Consecutive VNs of an SFC (ascending vn_id; the ingest order) form
        // the virtual links; links sharing a PN endpoint pair share a group.
        std::map<std::pair<long, long>, std::vector<std::pair<int, int>>> by_pl;
        for (std::size_t v = 0; v + 1 < trace_.vns.size(); ++v) {
            const auto& a = trace_.vns[v];
            const auto& b = trace_.vns[v + 1];
            if (a.sfc_id != b.sfc_id) continue;
            const auto key = std::minmax(a.pn_id, b.pn_id);
            by_pl[{key.first, key.second}].emplace_back(static_cast<int>(v),
                                                        static_cast<int>(v + 1));
        }
        for (const auto& [key, endpoints] : by_pl) {
            PlTargetGroup group;
            group.name = "pl:" + std::to_string(key.first) + "-" + std::to_string(key.second);
            group.vl_endpoints = endpoints;
            pl_groups_.push_back(std::move(group));
        }
    }

    long num_steps() const override { return static_cast<long>(trace_.times.size()); }
    int num_vns() const override { return static_cast<int>(trace_.vns.size()); }
    int num_features() const override { return trace_.num_features; }
    const std::vector<PnTargetGroup>& pn_groups() const override { return pn_groups_; }
    const std::vector<PlTargetGroup>& pl_groups() const override { return pl_groups_; }

    const Vec& features(long t, int vn) const override { return trace_.features[t][vn]; }

    std::optional<bool> pn_label(long t, int group) const override {
        if (!trace_.has_pn_labels) return std::nullopt;
        for (int vn : pn_groups_[group].vns) {
            if (trace_.pn_labels[t][vn]) return true;
        }
        return false;
    }

    std::optional<bool> pl_label(long t, int group) const override {
        if (!trace_.has_pl_labels) return std::nullopt;
        for (const auto& [u, y] : pl_groups_[group].vl_endpoints) {
            if (trace_.pl_labels[t][u]) return true;
        }
        return false;
    }

private:
    IngestedTrace trace_;
    std::vector<PnTargetGroup> pn_groups_;
    std::vector<PlTargetGroup> pl_groups_;
};

}  // namespace

std::unique_ptr<TraceSource> make_scenario_source(const ScenarioConfig& config) {
    return std::make_unique<ScenarioSource>(config);
}

std::unique_ptr<TraceSource> make_ingest_source(IngestedTrace trace) {
    return std::make_unique<IngestSource>(std::move(trace));
}

SourceFactory scenario_factory(const Config& config) {
    const ScenarioConfig base = scenario_config_from(config);
    return [base](int run) -> std::unique_ptr<TraceSource> {
        ScenarioConfig sc = base;
        sc.seeds.topology += static_cast<std::uint64_t>(run);
        sc.seeds.embedding += static_cast<std::uint64_t>(run);
        sc.seeds.anomalies += static_cast<std::uint64_t>(run);
        sc.seeds.noise += static_cast<std::uint64_t>(run);
        return make_scenario_source(sc);
    };
}

// ---------------------------------------------------------------------------
// Normalizer

void OnlineNormalizer::observe(const Vec& x) {
    if (n_ == 0) {
        mean_ = x;
        m2_ = Vec::Zero(x.size());
        n_ = 1;
        return;
    }
    ++n_;
    const Vec delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta.cwiseProduct(x - mean_);
}

Vec OnlineNormalizer::transform(const Vec& x) const {
    if (n_ < 2) return Vec::Zero(x.size());
    Vec out(x.size());
    for (long i = 0; i < x.size(); ++i) {
        const double var = m2_(i) / static_cast<double>(n_ - 1);
        const double floor = 1e-9 * std::max(std::abs(mean_(i)), 1.0);
        out(i) = (x(i) - mean_(i)) / std::max(std::sqrt(var), floor);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Experiment driver

namespace {

struct MetricAccumulator {
    // One cumulative confusion snapshot per stride point, per run.
    std::vector<std::vector<ConfusionMatrix>> per_run_points;
    std::vector<long> steps;
};

double quantile_of(std::vector<double> values, double q) {
    if (values.empty()) return std::numeric_limits<double>::infinity();
    std::sort(values.begin(), values.end());
    const auto idx = std::min(values.size() - 1,
                              static_cast<std::size_t>(q * static_cast<double>(values.size())));
    return values[idx];
}

struct RunOutcome {
    ConfusionMatrix total;
    std::map<std::string, ConfusionMatrix> per_target;
    long scored = 0;
    std::vector<ConfusionMatrix> stride_snapshots;  // cumulative at each stride point
    std::vector<long> stride_steps;
    // convergence trace (first run, PN modes only)
    std::vector<std::vector<double>> convergence_rows;
};

// Picks the PN whose estimates are traced: the configured id when present,
// otherwise the first group with exactly three members, otherwise the
// largest group.
int designated_group(const std::vector<PnTargetGroup>& groups, int configured_pn) {
    if (groups.empty()) return -1;
    if (configured_pn >= 0) {
        for (std::size_t g = 0; g < groups.size(); ++g) {
            if (groups[g].target_id == configured_pn) return static_cast<int>(g);
        }
        throw ConfigError("convergence_pn " + std::to_string(configured_pn) +
                          " hosts no virtual nodes");
    }
    int best = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].vns.size() == 3) return static_cast<int>(g);
        if (groups[g].vns.size() > groups[best].vns.size()) best = static_cast<int>(g);
    }
    return best;
}

RunOutcome run_pn(const TraceSource& source, const DetectorOptions& opt, RunMode mode,
                  const Config& config, int run, bool record_convergence) {
    const auto& groups = source.pn_groups();
    const int p = source.num_features();
    const long stride = std::max(config.get_long("metric_stride"), 1L);
    const bool pollute = mode == RunMode::PnSingleAgent && opt.artd > 0.0 &&
                         source.supports_pollution();
    const std::uint64_t pollution_seed =
        derive_seed(config.get_seed("seeds.anomalies"), kPollutionStream);
    const double loss_mean = config.get_double("loss_mean");
    const double loss_std = std::sqrt(config.get_double("loss_var"));

    std::vector<PnDetector> detectors;
    detectors.reserve(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        PnDetectorConfig dc;
        dc.eta = opt.eta;
        dc.penalty = opt.penalty;
        const int input_dim = mode == RunMode::PnConsensus
                                  ? p
                                  : p * static_cast<int>(groups[g].vns.size());
        dc.num_agents = mode == RunMode::PnConsensus
                            ? static_cast<int>(groups[g].vns.size())
                            : 1;
        dc.rff = sample_rff_params(input_dim, opt.rff_dim, opt.kernel_width,
                                   derive_seed(opt.rff_seed, static_cast<std::uint64_t>(run),
                                               static_cast<std::uint64_t>(g)));
        detectors.emplace_back(std::move(dc));
    }

    std::vector<OnlineNormalizer> normalizers(source.num_vns());

    const int traced = record_convergence
                           ? designated_group(groups, config.get_int("convergence_pn"))
                           : -1;
    const int n_components =
        std::min<long>(config.get_long("convergence_components"), opt.rff_dim);

    RunOutcome outcome;
    const long steps = source.num_steps();
    for (long t = 0; t < steps; ++t) {
        for (int vn = 0; vn < source.num_vns(); ++vn) {
            normalizers[vn].observe(source.features(t, vn));
        }

        for (std::size_t g = 0; g < groups.size(); ++g) {
            const auto& group = groups[g];

            bool polluted = false;
            double loss = 0.0;
            if (pollute && t < opt.warmup_pn) {
                const std::uint64_t key =
                    derive_seed(pollution_seed, static_cast<std::uint64_t>(run),
                                static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(g));
                if (counter_uniform(key) < opt.artd) {
                    polluted = true;
                    loss = std::clamp(loss_mean + loss_std * counter_normal(mix64(key)), 1e-6,
                                      1.0 - 1e-6);
                }
            }

            auto raw_features = [&](int vn) {
                return polluted
                           ? source.polluted_features(t, vn, false, group.target_id, loss)
                           : source.features(t, vn);
            };

            std::vector<Vec> inputs;
            if (mode == RunMode::PnConsensus) {
                inputs.reserve(group.vns.size());
                for (int vn : group.vns) inputs.push_back(normalizers[vn].transform(raw_features(vn)));
            } else {
                Vec concat(p * static_cast<int>(group.vns.size()));
                long offset = 0;
                for (int vn : group.vns) {
                    concat.segment(offset, p) = normalizers[vn].transform(raw_features(vn));
                    offset += p;
                }
                inputs.push_back(std::move(concat));
            }

            const PnVerdict verdict = detectors[g].step(inputs);

            if (static_cast<int>(g) == traced) {
                std::vector<double> row;
                row.reserve(n_components + 2);
                row.push_back(static_cast<double>(t));
                const auto& agent = detectors[g].agents().front();
                for (int c = 0; c < n_components; ++c) row.push_back(agent.w(c));
                row.push_back(agent.rho);
                outcome.convergence_rows.push_back(std::move(row));
            }

            if (t >= opt.warmup_pn) {
                const auto label = source.pn_label(t, static_cast<int>(g));
                if (label) {
                    score_verdict(outcome.total, verdict.is_anomalous, *label);
                    score_verdict(outcome.per_target[group.name], verdict.is_anomalous, *label);
                    ++outcome.scored;
                }
            }
        }

        if (t >= opt.warmup_pn && (t - opt.warmup_pn) % stride == 0) {
            outcome.stride_snapshots.push_back(outcome.total);
            outcome.stride_steps.push_back(t);
        }
    }
    return outcome;
}

RunOutcome run_pl(const TraceSource& source, const DetectorOptions& opt, RunMode mode,
                  const Config& config, int run) {
    const auto& groups = source.pl_groups();
    const long stride = std::max(config.get_long("metric_stride"), 1L);
    const bool rollback = mode == RunMode::PlRollback;
    const bool pollute = mode == RunMode::PlNoRollback && opt.artd > 0.0 &&
                         source.supports_pollution();
    const std::uint64_t pollution_seed =
        derive_seed(config.get_seed("seeds.anomalies"), kPollutionStream, 1);
    const double loss_mean = config.get_double("loss_mean");
    const double loss_std = std::sqrt(config.get_double("loss_var"));

    const long scoring_start =
        opt.t0 + (opt.quantile_calibration ? opt.calibration_window : 0);

    struct GroupState {
        std::vector<Mat> u_init, y_init;  // t0 x p batches under construction
        long collected = 0;
        std::unique_ptr<PlDetector> detector;
        std::vector<double> calibration_scores;
        bool calibrated = false;
    };
    std::vector<GroupState> states(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto n_vls = groups[g].vl_endpoints.size();
        states[g].u_init.assign(n_vls, Mat(opt.t0, source.num_features()));
        states[g].y_init.assign(n_vls, Mat(opt.t0, source.num_features()));
    }

    std::vector<OnlineNormalizer> normalizers(source.num_vns());

    RunOutcome outcome;
    const long steps = source.num_steps();
    for (long t = 0; t < steps; ++t) {
        for (int vn = 0; vn < source.num_vns(); ++vn) {
            normalizers[vn].observe(source.features(t, vn));
        }

        for (std::size_t g = 0; g < groups.size(); ++g) {
            const auto& group = groups[g];
            auto& state = states[g];

            bool polluted = false;
            double loss = 0.0;
            if (pollute && t < scoring_start) {
                const std::uint64_t key =
                    derive_seed(pollution_seed, static_cast<std::uint64_t>(run),
                                static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(g));
                if (counter_uniform(key) < opt.artd) {
                    polluted = true;
                    loss = std::clamp(loss_mean + loss_std * counter_normal(mix64(key)), 1e-6,
                                      1.0 - 1e-6);
                }
            }
            auto sample_of = [&](int vn) {
                return normalizers[vn].transform(
                    polluted ? source.polluted_features(t, vn, true, group.target_id, loss)
                             : source.features(t, vn));
            };

            if (state.collected < opt.t0) {
                for (std::size_t i = 0; i < group.vl_endpoints.size(); ++i) {
                    state.u_init[i].row(state.collected) = sample_of(group.vl_endpoints[i].first);
                    state.y_init[i].row(state.collected) = sample_of(group.vl_endpoints[i].second);
                }
                if (++state.collected == opt.t0) {
                    std::vector<CovarianceTracker> trackers;
                    trackers.reserve(group.vl_endpoints.size());
                    for (std::size_t i = 0; i < group.vl_endpoints.size(); ++i) {
                        trackers.emplace_back(state.u_init[i], state.y_init[i]);
                    }
                    const double initial_threshold =
                        opt.quantile_calibration ? std::numeric_limits<double>::infinity()
                                                 : opt.t2_threshold;
                    state.detector = std::make_unique<PlDetector>(
                        std::move(trackers), initial_threshold, opt.eig_floor, rollback);
                }
                continue;  // no verdicts during tracker initialization
            }

            if (opt.quantile_calibration && !state.calibrated && t >= scoring_start) {
                state.detector->set_threshold(
                    quantile_of(state.calibration_scores, opt.quantile));
                state.calibrated = true;
            }

            std::vector<std::pair<Vec, Vec>> pairs;
            pairs.reserve(group.vl_endpoints.size());
            for (const auto& [u_vn, y_vn] : group.vl_endpoints) {
                pairs.emplace_back(sample_of(u_vn), sample_of(y_vn));
            }
            const PlVerdict verdict = state.detector->step(pairs);

            if (opt.quantile_calibration && !state.calibrated) {
                state.calibration_scores.insert(state.calibration_scores.end(),
                                                verdict.per_vl_scores.begin(),
                                                verdict.per_vl_scores.end());
            }

            if (t >= scoring_start) {
                const auto label = source.pl_label(t, static_cast<int>(g));
                if (label) {
                    score_verdict(outcome.total, verdict.is_anomalous, *label);
                    score_verdict(outcome.per_target[group.name], verdict.is_anomalous, *label);
                    ++outcome.scored;
                }
            }
        }

        if (t >= scoring_start && (t - scoring_start) % stride == 0) {
            outcome.stride_snapshots.push_back(outcome.total);
            outcome.stride_steps.push_back(t);
        }
    }
    return outcome;
}

std::optional<double> mean_defined(const std::vector<std::optional<double>>& values) {
    double sum = 0.0;
    long n = 0;
    for (const auto& v : values) {
        if (v) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

}  // namespace

ExperimentResult run_experiment(const Config& config, RunMode mode, int num_runs,
                                const SourceFactory& factory) {
    if (num_runs < 1) throw ConfigError("run_experiment: num_runs must be >= 1");
    const DetectorOptions opt = DetectorOptions::from_config(config);
    const long metric_window = config.get_long("metric_window");
    const long stride = std::max(config.get_long("metric_stride"), 1L);

    ExperimentResult result;
    result.report.mode = mode_name(mode);
    result.report.num_runs = num_runs;

    std::vector<RunOutcome> outcomes;
    outcomes.reserve(num_runs);
    for (int run = 0; run < num_runs; ++run) {
        const auto source = factory(run);
        RunOutcome outcome = is_pn_mode(mode)
                                 ? run_pn(*source, opt, mode, config, run, run == 0)
                                 : run_pl(*source, opt, mode, config, run);
        result.report.total += outcome.total;
        result.report.scored_verdicts += outcome.scored;
        outcomes.push_back(std::move(outcome));
    }
    result.report.metrics = compute_metrics(result.report.total);

    std::map<std::string, ConfusionMatrix> per_target;
    for (const auto& o : outcomes) {
        for (const auto& [name, cm] : o.per_target) per_target[name] += cm;
    }
    for (const auto& [name, cm] : per_target) {
        result.report.per_target.push_back({name, cm, compute_metrics(cm)});
    }

    // Convergence series from run 0 (PN modes).
    if (!outcomes.empty() && !outcomes[0].convergence_rows.empty()) {
        Series conv;
        conv.name = "convergence";
        conv.columns = {"step"};
        const std::size_t width = outcomes[0].convergence_rows.front().size();
        for (std::size_t c = 0; c + 2 < width; ++c) conv.columns.push_back("w_" + std::to_string(c));
        conv.columns.push_back("rho");
        conv.rows = outcomes[0].convergence_rows;
        result.series.push_back(std::move(conv));
    }

    // Metric-versus-step series averaged pointwise over runs.
    std::size_t n_points = std::numeric_limits<std::size_t>::max();
    for (const auto& o : outcomes) n_points = std::min(n_points, o.stride_snapshots.size());
    if (n_points != std::numeric_limits<std::size_t>::max() && n_points > 0) {
        Series ms;
        ms.name = "metrics_vs_step";
        ms.columns = {"step", "accuracy", "precision", "recall", "f1"};
        const long window_points = metric_window > 0 ? std::max(metric_window / stride, 1L) : 0;
        for (std::size_t k = 0; k < n_points; ++k) {
            std::vector<std::optional<double>> acc, prec, rec, f1;
            for (const auto& o : outcomes) {
                ConfusionMatrix cm = o.stride_snapshots[k];
                if (window_points > 0 && k >= static_cast<std::size_t>(window_points)) {
                    const auto& past = o.stride_snapshots[k - window_points];
                    cm.tp -= past.tp;
                    cm.tn -= past.tn;
                    cm.fp -= past.fp;
                    cm.fn -= past.fn;
                }
                const Metrics m = compute_metrics(cm);
                acc.push_back(m.accuracy);
                prec.push_back(m.precision);
                rec.push_back(m.recall);
                f1.push_back(m.f1);
            }
            const auto row_value = [](const std::optional<double>& v) {
                return v ? *v : kNan;
            };
            ms.rows.push_back({static_cast<double>(outcomes[0].stride_steps[k]),
                               row_value(mean_defined(acc)), row_value(mean_defined(prec)),
                               row_value(mean_defined(rec)), row_value(mean_defined(f1))});
        }
        result.series.push_back(std::move(ms));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Result emission

namespace {

nlohmann::json metrics_json(const Metrics& m) {
    nlohmann::json j;
    j["accuracy"] = m.accuracy ? nlohmann::json(*m.accuracy) : nlohmann::json(nullptr);
    j["precision"] = m.precision ? nlohmann::json(*m.precision) : nlohmann::json(nullptr);
    j["recall"] = m.recall ? nlohmann::json(*m.recall) : nlohmann::json(nullptr);
    j["f1"] = m.f1 ? nlohmann::json(*m.f1) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json confusion_json(const ConfusionMatrix& cm) {
    return {{"tp", cm.tp}, {"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}};
}

std::string format_series_value(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::vector<std::string> emit_results(const ExperimentResult& result, const Config& config,
                                      const std::string& out_dir, const std::string& prefix) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> paths;

    nlohmann::json report;
    report["mode"] = result.report.mode;
    report["runs"] = result.report.num_runs;
    report["scored_verdicts"] = result.report.scored_verdicts;
    report["confusion"] = confusion_json(result.report.total);
    report["metrics"] = metrics_json(result.report.metrics);
    report["per_target"] = nlohmann::json::array();
    for (const auto& target : result.report.per_target) {
        nlohmann::json t;
        t["target"] = target.target;
        t["confusion"] = confusion_json(target.cm);
        t["metrics"] = metrics_json(target.metrics);
        report["per_target"].push_back(std::move(t));
    }
    report["config"] = nlohmann::json::object();
    for (const auto& [key, value] : config.values()) report["config"][key] = value;
    report["config_hash"] = config.hash();

    const std::string report_path =
        (std::filesystem::path(out_dir) / (prefix + "report.json")).string();
    {
        std::ofstream out(report_path);
        if (!out) throw IoError("cannot write report: " + report_path);
        out << report.dump(2) << '\n';
    }
    paths.push_back(report_path);

    for (const auto& series : result.series) {
        const std::string path =
            (std::filesystem::path(out_dir) / (prefix + series.name + ".csv")).string();
        std::ofstream out(path);
        if (!out) throw IoError("cannot write series: " + path);
        for (std::size_t c = 0; c < series.columns.size(); ++c) {
            out << (c ? "," : "") << series.columns[c];
        }
        out << '\n';
        for (const auto& row : series.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                out << (c ? "," : "") << format_series_value(row[c]);
            }
            out << '\n';
        }
        if (!out) throw IoError("failed while writing series: " + path);
        paths.push_back(path);
    }
    return paths;
}

}  // namespace slicewatch

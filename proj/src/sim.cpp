#include "slicewatch/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <string>

#include "slicewatch/rng.hpp"

namespace slicewatch {

namespace {

// Stream tags for counter-based noise.
constexpr std::uint64_t kTrafficStream = 1;
constexpr std::uint64_t kObsNoiseStream = 2;

constexpr int kMaxTopologyTries = 1000;
constexpr double kQueueSaturation = 20.0;  // delay cap as a multiple of 1/mu

bool is_connected(int n, const std::vector<std::vector<int>>& adjacency) {
    if (n == 0) return false;
    std::vector<char> seen(n, 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    int visited = 1;
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int u : adjacency[v]) {
            if (!seen[u]) {
                seen[u] = 1;
                ++visited;
                queue.push_back(u);
            }
        }
    }
    return visited == n;
}

// BFS shortest path; neighbor lists are sorted so ties break toward the
// lowest PN id, keeping routes deterministic.
std::vector<int> shortest_path_nodes(const SubstrateNetwork& net, int from, int to) {
    std::vector<int> parent(net.num_nodes, -1);
    std::vector<char> seen(net.num_nodes, 0);
    std::deque<int> queue{from};
    seen[from] = 1;
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        if (v == to) break;
        for (int u : net.adjacency[v]) {
            if (!seen[u]) {
                seen[u] = 1;
                parent[u] = v;
                queue.push_back(u);
            }
        }
    }
    std::vector<int> path;
    for (int v = to; v != -1; v = parent[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
}

}  // namespace

void ScenarioConfig::validate() const {
    if (num_pns < 2) throw ConfigError("scenario: num_pns must be >= 2");
    if (!(link_probability > 0.0) || link_probability > 1.0) {
        throw ConfigError("scenario: link_probability must be in (0, 1]");
    }
    if (num_sfcs < 1) throw ConfigError("scenario: num_sfcs must be >= 1");
    if (chain_min < 2 || chain_max < chain_min) {
        throw ConfigError("scenario: chain length range invalid");
    }
    if (horizon < 1) throw ConfigError("scenario: horizon must be >= 1");
    if (anomaly_rate_pn < 0.0 || anomaly_rate_pn > 1.0 || anomaly_rate_pl < 0.0 ||
        anomaly_rate_pl > 1.0) {
        throw ConfigError("scenario: anomaly rates must lie in [0, 1]");
    }
    if (!(loss_var >= 0.0)) throw ConfigError("scenario: loss_var must be >= 0");
    if (!(noise_sigma >= 0.0)) throw ConfigError("scenario: noise_sigma must be >= 0");
    if (!(node_capacity_min > 0.0) || node_capacity_max < node_capacity_min) {
        throw ConfigError("scenario: node capacity range invalid");
    }
    if (!(link_bandwidth_min > 0.0) || link_bandwidth_max < link_bandwidth_min) {
        throw ConfigError("scenario: link bandwidth range invalid");
    }
    if (service_mix.empty() || service_mix.size() > 3) {
        throw ConfigError("scenario: service_mix needs 1..3 weights");
    }
    double mix_sum = 0.0;
    for (double w : service_mix) {
        if (w < 0.0) throw ConfigError("scenario: service_mix weights must be >= 0");
        mix_sum += w;
    }
    if (!(mix_sum > 0.0)) throw ConfigError("scenario: service_mix weights sum to zero");
}

int SubstrateNetwork::link_index(int a, int b) const {
    for (int i = 0; i < num_links(); ++i) {
        if ((links[i].a == a && links[i].b == b) || (links[i].a == b && links[i].b == a)) {
            return i;
        }
    }
    return -1;
}

SubstrateNetwork build_network(int num_pns, double link_probability, double cap_min,
                               double cap_max, double bw_min, double bw_max, std::uint64_t seed) {
    if (num_pns < 2) throw ConfigError("build_network: num_pns must be >= 2");
    if (!(link_probability > 0.0) || link_probability > 1.0) {
        throw ConfigError("build_network: link_probability must be in (0, 1]");
    }

    Rng rng(derive_seed(seed, 0x746f706fULL));
    for (int attempt = 0; attempt < kMaxTopologyTries; ++attempt) {
        SubstrateNetwork net;
        net.num_nodes = num_pns;
        net.adjacency.assign(num_pns, {});
        for (int i = 0; i < num_pns; ++i) {
            for (int j = i + 1; j < num_pns; ++j) {
                if (rng.uniform() < link_probability) {
                    net.links.push_back({i, j, 0.0});
                    net.adjacency[i].push_back(j);
                    net.adjacency[j].push_back(i);
                }
            }
        }
        if (!is_connected(num_pns, net.adjacency)) continue;

        net.node_capacity.resize(num_pns);
        for (int i = 0; i < num_pns; ++i) net.node_capacity[i] = rng.uniform(cap_min, cap_max);
        for (auto& link : net.links) link.bandwidth = rng.uniform(bw_min, bw_max);
        return net;
    }
    throw ConfigError("build_network: no connected topology after " +
                      std::to_string(kMaxTopologyTries) + " draws");
}

std::vector<SfcEmbedding> embed_sfcs(const SubstrateNetwork& net, int num_sfcs, int chain_min,
                                     int chain_max, const std::vector<double>& service_mix,
                                     std::uint64_t seed) {
    if (chain_max > net.num_nodes) {
        throw ConfigError("embed_sfcs: chain length " + std::to_string(chain_max) +
                          " exceeds the " + std::to_string(net.num_nodes) + " available PNs");
    }
    const double mix_total = std::accumulate(service_mix.begin(), service_mix.end(), 0.0);

    Rng rng(derive_seed(seed, 0x656d6264ULL));
    std::vector<SfcEmbedding> sfcs;
    sfcs.reserve(num_sfcs);
    for (int s = 0; s < num_sfcs; ++s) {
        SfcEmbedding sfc;
        sfc.sfc_id = s;

        const double pick = rng.uniform() * mix_total;
        double acc = 0.0;
        sfc.service_type = static_cast<int>(service_mix.size());
        for (std::size_t k = 0; k < service_mix.size(); ++k) {
            acc += service_mix[k];
            if (pick < acc) {
                sfc.service_type = static_cast<int>(k) + 1;
                break;
            }
        }

        const int length = static_cast<int>(rng.uniform_int(chain_min, chain_max));
        // Distinct hosts via partial Fisher-Yates.
        std::vector<int> pns(net.num_nodes);
        std::iota(pns.begin(), pns.end(), 0);
        for (int i = 0; i < length; ++i) {
            const long j = rng.uniform_int(i, net.num_nodes - 1);
            std::swap(pns[i], pns[j]);
            sfc.vn_to_pn.push_back(pns[i]);
        }

        for (int i = 0; i + 1 < length; ++i) {
            const auto nodes = shortest_path_nodes(net, sfc.vn_to_pn[i], sfc.vn_to_pn[i + 1]);
            std::vector<int> path;
            for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
                path.push_back(net.link_index(nodes[k], nodes[k + 1]));
            }
            sfc.vl_paths.push_back(std::move(path));
        }
        sfcs.push_back(std::move(sfc));
    }
    return sfcs;
}

AnomalySchedule schedule_anomalies(long horizon, double rate_pn, double rate_pl, int num_pns,
                                   int num_pls, long anomaly_start, double loss_mean,
                                   double loss_var, double mean_duration, std::uint64_t seed) {
    if (horizon < 1) throw ConfigError("schedule_anomalies: horizon must be >= 1");

    Rng rng(derive_seed(seed, 0x616e6f6dULL));
    AnomalySchedule schedule;
    std::vector<long> pn_busy_until(num_pns, 0);
    std::vector<long> pl_busy_until(num_pls, 0);
    const double loss_std = std::sqrt(loss_var);

    auto maybe_start = [&](bool is_link, int target, long t, double rate, long& busy_until) {
        if (t < busy_until || rng.uniform() >= rate) return;
        const long duration = rng.geometric(mean_duration);
        const double loss = std::clamp(rng.normal(loss_mean, loss_std), 1e-6, 1.0 - 1e-6);
        schedule.events.push_back({is_link, target, t, std::min(t + duration, horizon), loss});
        busy_until = t + duration;
    };

    for (long t = std::max(anomaly_start, 0L); t < horizon; ++t) {
        for (int q = 0; q < num_pns; ++q) maybe_start(false, q, t, rate_pn, pn_busy_until[q]);
        for (int l = 0; l < num_pls; ++l) maybe_start(true, l, t, rate_pl, pl_busy_until[l]);
    }
    return schedule;
}

Scenario::Scenario(const ScenarioConfig& config) : config_(config) {
    config_.validate();
    network_ = build_network(config_.num_pns, config_.link_probability, config_.node_capacity_min,
                             config_.node_capacity_max, config_.link_bandwidth_min,
                             config_.link_bandwidth_max, config_.seeds.topology);
    sfcs_ = embed_sfcs(network_, config_.num_sfcs, config_.chain_min, config_.chain_max,
                       config_.service_mix, config_.seeds.embedding);
    schedule_ = schedule_anomalies(config_.horizon, config_.anomaly_rate_pn,
                                   config_.anomaly_rate_pl, network_.num_nodes,
                                   network_.num_links(), config_.anomaly_start, config_.loss_mean,
                                   config_.loss_var, config_.anomaly_mean_duration,
                                   config_.seeds.anomalies);

    vns_by_pn_.assign(network_.num_nodes, {});
    vls_by_pl_.assign(network_.num_links(), {});
    pn_vn_count_.assign(network_.num_nodes, 0);
    link_flow_sum_.assign(network_.num_links(), 0.0);
    for (const auto& sfc : sfcs_) {
        const auto& svc = kServiceTable[sfc.service_type - 1];
        const double flow = svc.arrival_rate * svc.packet_kbit;
        for (int i = 0; i < sfc.length(); ++i) {
            vns_by_pn_[sfc.vn_to_pn[i]].push_back({sfc.sfc_id, i});
            ++pn_vn_count_[sfc.vn_to_pn[i]];
        }
        for (int i = 0; i + 1 < sfc.length(); ++i) {
            for (int link : sfc.vl_paths[i]) {
                vls_by_pl_[link].push_back({sfc.sfc_id, i});
                link_flow_sum_[link] += flow;
            }
        }
    }

    // Dense per-step loss tables; keeps step() pure in t.
    pn_loss_.assign(config_.horizon, std::vector<double>(network_.num_nodes, 0.0));
    pl_loss_.assign(config_.horizon, std::vector<double>(network_.num_links(), 0.0));
    for (const auto& ev : schedule_.events) {
        auto& table = ev.is_link ? pl_loss_ : pn_loss_;
        for (long t = ev.start; t < ev.end; ++t) table[t][ev.target] = ev.loss;
    }
}

StepSample Scenario::step(long t) const { return generate(t, -1, -1, 0.0); }

StepSample Scenario::step_forced(long t, int forced_pn, int forced_pl, double forced_loss) const {
    return generate(t, forced_pn, forced_pl, forced_loss);
}

StepSample Scenario::generate(long t, int forced_pn, int forced_pl, double forced_loss) const {
    if (t < 0 || t >= config_.horizon) {
        throw ConfigError("scenario step " + std::to_string(t) + " outside horizon");
    }

    std::vector<double> pn_loss = pn_loss_[t];
    std::vector<double> pl_loss = pl_loss_[t];
    if (forced_pn >= 0) pn_loss[forced_pn] = std::max(pn_loss[forced_pn], forced_loss);
    if (forced_pl >= 0) pl_loss[forced_pl] = std::max(pl_loss[forced_pl], forced_loss);

    StepSample sample;
    sample.t = t;
    sample.features.resize(sfcs_.size());
    sample.pn_anomalous.resize(network_.num_nodes);
    sample.pl_anomalous.resize(network_.num_links());
    for (int q = 0; q < network_.num_nodes; ++q) sample.pn_anomalous[q] = pn_loss_[t][q] > 0.0;
    for (int l = 0; l < network_.num_links(); ++l) sample.pl_anomalous[l] = pl_loss_[t][l] > 0.0;

    const std::uint64_t noise_seed = config_.seeds.noise;
    for (const auto& sfc : sfcs_) {
        const auto& svc = kServiceTable[sfc.service_type - 1];
        const double nominal_flow = svc.arrival_rate * svc.packet_kbit;

        const double xi = counter_normal(
            derive_seed(noise_seed, kTrafficStream, static_cast<std::uint64_t>(sfc.sfc_id),
                        static_cast<std::uint64_t>(t)));
        double rate = svc.arrival_rate * std::max(1.0 + config_.traffic_sigma * xi, 0.05);

        auto& chain_features = sample.features[sfc.sfc_id];
        chain_features.resize(sfc.length());
        double incoming_link_delay = 0.0;

        for (int i = 0; i < sfc.length(); ++i) {
            const int pn = sfc.vn_to_pn[i];
            const double mu_eff = network_.node_capacity[pn] * (1.0 - pn_loss[pn]) /
                                  std::max(pn_vn_count_[pn], 1);
            const double in_rate = rate;
            const double out_rate = std::min(in_rate, mu_eff);
            const double util = std::min(in_rate / mu_eff, 1.0);
            const double node_delay = 1.0 / std::max(mu_eff - in_rate, mu_eff / kQueueSaturation);

            const double occupancy = util / std::max(1.0 - util, 1.0 / (kQueueSaturation - 1.0));

            Vec f(kNumVnFeatures);
            f(kProcessingRate) = mu_eff;
            f(kDataFlow) = in_rate * svc.packet_kbit;
            f(kQueuingDelay) = node_delay + incoming_link_delay;
            f(kProcessingDelay) = 1.0 / mu_eff;
            f(kCpuUsage) = 0.05 + 0.9 * util;
            f(kMemUsage) = 0.1 + 0.8 * occupancy / (1.0 + occupancy);

            for (int k = 0; k < kNumVnFeatures; ++k) {
                const double nu = counter_normal(derive_seed(
                    noise_seed, kObsNoiseStream,
                    (static_cast<std::uint64_t>(sfc.sfc_id) << 16) |
                        (static_cast<std::uint64_t>(i) << 8) | static_cast<std::uint64_t>(k),
                    static_cast<std::uint64_t>(t)));
                f(k) *= 1.0 + config_.noise_sigma * nu;
            }
            chain_features[i] = std::move(f);

            // Traverse the virtual link toward the next VN in the chain.
            if (i + 1 < sfc.length()) {
                double cap = std::numeric_limits<double>::infinity();
                double link_delay = 0.0;
                for (int link : sfc.vl_paths[i]) {
                    const double headroom =
                        std::min(std::max(network_.links[link].bandwidth / link_flow_sum_[link],
                                          1.1),
                                 config_.alloc_headroom);
                    const double alloc_kbit = nominal_flow * headroom * (1.0 - pl_loss[link]);
                    const double link_cap = alloc_kbit / svc.packet_kbit;
                    cap = std::min(cap, link_cap);
                    const double link_util = std::min(out_rate / link_cap, 1.0);
                    link_delay += (1.0 / link_cap) /
                                  std::max(1.0 - link_util, 1.0 / kQueueSaturation);
                }
                rate = std::min(out_rate, cap);
                incoming_link_delay = link_delay;
            }
        }
    }
    return sample;
}

}  // namespace slicewatch

#pragma once

#include <cstdint>
#include <vector>

#include "slicewatch/types.hpp"

namespace slicewatch {

inline constexpr int kNumVnFeatures = 6;

// Feature order within every per-VN measurement vector.
enum VnFeature {
    kProcessingRate = 0,  // effective service capacity, packets/s
    kDataFlow = 1,        // incoming traffic volume, kbit/s
    kQueuingDelay = 2,    // node + incoming-link queueing, s
    kProcessingDelay = 3, // per-packet service time, s
    kCpuUsage = 4,
    kMemUsage = 5,
};

// (arrival rate pkt/s, packet size kbit) per service type.
struct ServiceSpec {
    double arrival_rate;
    double packet_kbit;
};
inline constexpr ServiceSpec kServiceTable[3] = {{10.0, 200.0}, {100.0, 10.0}, {500.0, 1.0}};

struct ScenarioConfig {
    int num_pns = 10;
    double link_probability = 0.4;
    int num_sfcs = 6;
    int chain_min = 4;
    int chain_max = 6;
    std::vector<double> service_mix = {1.0, 1.0, 1.0};
    long horizon = 2000;
    double anomaly_rate_pn = 0.002;   // per-step per-PN start probability
    double anomaly_rate_pl = 0.002;   // per-step per-PL start probability
    long anomaly_start = 300;         // first step an anomaly window may open
    double loss_mean = 0.5;
    double loss_var = 0.01;
    double anomaly_mean_duration = 20.0;
    double noise_sigma = 0.05;        // multiplicative observation noise
    double traffic_sigma = 0.2;       // per-step source-rate fluctuation
    double node_capacity_min = 5000.0;  // packets/s
    double node_capacity_max = 8000.0;
    double link_bandwidth_min = 8000.0;  // kbit/s
    double link_bandwidth_max = 16000.0;
    double alloc_headroom = 1.6;  // per-VL bandwidth allocation over nominal demand

    struct Seeds {
        std::uint64_t topology = 1;
        std::uint64_t embedding = 2;
        std::uint64_t anomalies = 3;
        std::uint64_t noise = 4;
    } seeds;

    void validate() const;
};

struct SubstrateNetwork {
    struct Link {
        int a;
        int b;
        double bandwidth;  // kbit/s
    };
    int num_nodes = 0;
    std::vector<double> node_capacity;       // packets/s
    std::vector<Link> links;
    std::vector<std::vector<int>> adjacency; // sorted neighbor lists

    int num_links() const { return static_cast<int>(links.size()); }
    int link_index(int a, int b) const;  // -1 when the PNs are not adjacent
};

// Connected Erdos-Renyi draw with bounded rejection; capacities uniform in
// the given ranges. Deterministic in seed.
SubstrateNetwork build_network(int num_pns, double link_probability, double cap_min,
                               double cap_max, double bw_min, double bw_max, std::uint64_t seed);

struct SfcEmbedding {
    int sfc_id = 0;
    int service_type = 1;                     // 1..3
    std::vector<int> vn_to_pn;                // chain position -> hosting PN
    std::vector<std::vector<int>> vl_paths;   // chain position -> PL indices to next VN

    int length() const { return static_cast<int>(vn_to_pn.size()); }
};

// Chains of 4..6 VNs placed on distinct PNs uniformly at random, virtual
// links routed along BFS shortest paths. Deterministic in seed.
std::vector<SfcEmbedding> embed_sfcs(const SubstrateNetwork& net, int num_sfcs, int chain_min,
                                     int chain_max, const std::vector<double>& service_mix,
                                     std::uint64_t seed);

struct AnomalyEvent {
    bool is_link = false;
    int target = 0;
    long start = 0;  // inclusive
    long end = 0;    // exclusive
    double loss = 0.0;
};

struct AnomalySchedule {
    std::vector<AnomalyEvent> events;
};

// Independent per-step window starts per target; capacity-loss fraction drawn
// once per window from N(loss_mean, loss_var) clamped into (0, 1); window
// lengths geometric. No new window opens while one is active on a target.
AnomalySchedule schedule_anomalies(long horizon, double rate_pn, double rate_pl, int num_pns,
                                   int num_pls, long anomaly_start, double loss_mean,
                                   double loss_var, double mean_duration, std::uint64_t seed);

struct VnRef {
    int sfc = 0;
    int pos = 0;
};

struct VlRef {
    int sfc = 0;
    int pos = 0;  // virtual link from chain position pos to pos+1
};

struct StepSample {
    long t = 0;
    std::vector<std::vector<Vec>> features;  // [sfc][pos] -> kNumVnFeatures vector
    std::vector<char> pn_anomalous;
    std::vector<char> pl_anomalous;
};

// Deterministic discrete-time generator; every step is a pure function of
// (config, seeds, t).
class Scenario {
public:
    explicit Scenario(const ScenarioConfig& config);

    const ScenarioConfig& config() const { return config_; }
    const SubstrateNetwork& network() const { return network_; }
    const std::vector<SfcEmbedding>& sfcs() const { return sfcs_; }
    const AnomalySchedule& schedule() const { return schedule_; }
    const std::vector<std::vector<VnRef>>& vns_by_pn() const { return vns_by_pn_; }
    const std::vector<std::vector<VlRef>>& vls_by_pl() const { return vls_by_pl_; }

    StepSample step(long t) const;

    // Variant with one extra capacity loss forced onto a PN or PL (pass -1 to
    // skip either). Used to pollute baseline training streams; ground-truth
    // labels still reflect only the schedule.
    StepSample step_forced(long t, int forced_pn, int forced_pl, double forced_loss) const;

private:
    StepSample generate(long t, int forced_pn, int forced_pl, double forced_loss) const;

    ScenarioConfig config_;
    SubstrateNetwork network_;
    std::vector<SfcEmbedding> sfcs_;
    AnomalySchedule schedule_;
    std::vector<std::vector<VnRef>> vns_by_pn_;
    std::vector<std::vector<VlRef>> vls_by_pl_;
    std::vector<int> pn_vn_count_;
    std::vector<double> link_flow_sum_;      // kbit/s of nominal demand per PL
    std::vector<std::vector<double>> pn_loss_;  // [t][pn] scheduled loss (0 = none)
    std::vector<std::vector<double>> pl_loss_;
};

}  // namespace slicewatch

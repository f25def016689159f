#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "slicewatch/rff.hpp"
#include "slicewatch/types.hpp"

namespace slicewatch {

// One-class SVM consensus detector for a physical node. Each virtual node
// mapped to the PN runs one agent; agents agree on a shared hyperplane via
// ADMM multiplier exchange and the PN-level verdict commits or rolls back the
// whole round.
struct PnDetectorConfig {
    double eta = 1.0;      // augmented-Lagrange parameter, > 0
    double penalty = 1.0;  // slack penalty C, > 0
    int num_agents = 1;    // |J_q|, >= 1
    RffParams rff;

    double scale() const { return eta * num_agents + 1.0; }  // A = eta*|J_q| + 1
    double lambda_cap() const { return num_agents * penalty; }
    void validate() const;
};

struct VnAgentState {
    Vec w;              // local hyperplane normal, length D
    double rho = 0.0;   // offset
    Vec alpha;          // consensus multiplier for w, length D
    double beta = 0.0;  // consensus multiplier for rho
    double lambda = 0.0;
};

struct PnVerdict {
    long time = 0;
    std::vector<int> per_agent_signs;  // +1 / -1
    bool is_anomalous = false;
    bool committed = false;
};

// All-zero agent states; validates the config.
std::vector<VnAgentState> init_pn_detector(const PnDetectorConfig& config);

// Closed-form maximizer of the dual quadratic over [0, |J_q|C]. `snapshot`
// holds every agent of the PN (self included) at the previous committed time.
double update_lambda(std::size_t agent, const std::vector<VnAgentState>& snapshot, const Vec& z,
                     const PnDetectorConfig& config);

// KKT updates for (w, rho) given the fresh lambda and the time-t snapshot.
std::pair<Vec, double> update_primal(std::size_t agent, const std::vector<VnAgentState>& snapshot,
                                     const Vec& z, double lambda_new,
                                     const PnDetectorConfig& config);

// Multiplier ascent on the consensus disagreement of the freshly updated
// primal variables. `snapshot` supplies the previous (alpha, beta),
// `updated` the new (w, rho) of all agents.
std::pair<Vec, double> update_multipliers(std::size_t agent,
                                          const std::vector<VnAgentState>& snapshot,
                                          const std::vector<VnAgentState>& updated,
                                          const PnDetectorConfig& config);

// +1 when z."w - rho >= 0 (normal), else -1.
int discriminant(const VnAgentState& agent, const Vec& z);

class PnDetector {
public:
    explicit PnDetector(PnDetectorConfig config);

    // One synchronous round over all agents: map samples, update lambda and
    // primal variables against the committed snapshot, then multipliers.
    // Commits the round when every per-agent sign is +1, otherwise restores
    // the snapshot bit-exactly.
    PnVerdict step(const std::vector<Vec>& samples);

    // Same round driven by pre-mapped feature vectors.
    PnVerdict step_features(const std::vector<Vec>& features);

    const std::vector<VnAgentState>& agents() const { return agents_; }
    const PnDetectorConfig& config() const { return config_; }
    long time() const { return time_; }

private:
    PnDetectorConfig config_;
    std::vector<VnAgentState> agents_;
    long time_ = 0;
};

}  // namespace slicewatch

#include "slicewatch/ocsvm.hpp"

#include <algorithm>
#include <string>

namespace slicewatch {

void PnDetectorConfig::validate() const {
    if (num_agents < 1) {
        throw ConfigError("PnDetectorConfig: num_agents must be >= 1");
    }
    if (!(eta > 0.0)) {
        throw ConfigError("PnDetectorConfig: eta must be positive");
    }
    if (!(penalty > 0.0)) {
        throw ConfigError("PnDetectorConfig: penalty must be positive");
    }
    if (rff.dim_out < 1) {
        throw ConfigError("PnDetectorConfig: rff parameters not initialized");
    }
}

std::vector<VnAgentState> init_pn_detector(const PnDetectorConfig& config) {
    config.validate();
    std::vector<VnAgentState> agents(config.num_agents);
    for (auto& a : agents) {
        a.w = Vec::Zero(config.rff.dim_out);
        a.alpha = Vec::Zero(config.rff.dim_out);
        a.rho = 0.0;
        a.beta = 0.0;
        a.lambda = 0.0;
    }
    return agents;
}

namespace {

// Sum over i of (w_j + w_i) with i ranging over all agents, self included.
Vec pair_sum_w(std::size_t j, const std::vector<VnAgentState>& states) {
    Vec sum = static_cast<double>(states.size()) * states[j].w;
    for (const auto& s : states) sum += s.w;
    return sum;
}

double pair_sum_rho(std::size_t j, const std::vector<VnAgentState>& states) {
    double sum = static_cast<double>(states.size()) * states[j].rho;
    for (const auto& s : states) sum += s.rho;
    return sum;
}

}  // namespace

double update_lambda(std::size_t agent, const std::vector<VnAgentState>& snapshot, const Vec& z,
                     const PnDetectorConfig& config) {
    const double A = config.scale();
    const auto& self = snapshot[agent];

    const Vec l = 2.0 * self.alpha - 0.5 * config.eta * pair_sum_w(agent, snapshot);
    const double h = 2.0 * self.beta - 0.5 * config.eta * pair_sum_rho(agent, snapshot);

    // Concave quadratic -a*lambda^2 + b*lambda; a > 0 since A > 1.
    const double a = z.dot(z) / A + 1.0 / (A - 1.0);
    const double b = z.dot(l) / A + (1.0 - h) / (A - 1.0);
    const double vertex = b / (2.0 * a);
    return std::clamp(vertex, 0.0, config.lambda_cap());
}

std::pair<Vec, double> update_primal(std::size_t agent, const std::vector<VnAgentState>& snapshot,
                                     const Vec& z, double lambda_new,
                                     const PnDetectorConfig& config) {
    const double A = config.scale();
    const auto& self = snapshot[agent];

    Vec w = (z * lambda_new - 2.0 * self.alpha + 0.5 * config.eta * pair_sum_w(agent, snapshot)) / A;
    double rho = (1.0 - lambda_new - 2.0 * self.beta +
                  0.5 * config.eta * pair_sum_rho(agent, snapshot)) /
                 (A - 1.0);
    return {std::move(w), rho};
}

std::pair<Vec, double> update_multipliers(std::size_t agent,
                                          const std::vector<VnAgentState>& snapshot,
                                          const std::vector<VnAgentState>& updated,
                                          const PnDetectorConfig& config) {
    const auto n = static_cast<double>(updated.size());
    Vec w_diff = n * updated[agent].w;
    double rho_diff = n * updated[agent].rho;
    for (const auto& s : updated) {
        w_diff -= s.w;
        rho_diff -= s.rho;
    }
    Vec alpha = snapshot[agent].alpha + 0.5 * config.eta * w_diff;
    double beta = snapshot[agent].beta + 0.5 * config.eta * rho_diff;
    return {std::move(alpha), beta};
}

int discriminant(const VnAgentState& agent, const Vec& z) {
    if (z.size() != agent.w.size()) {
        throw DimensionError("discriminant: feature length does not match agent state");
    }
    return z.dot(agent.w) - agent.rho >= 0.0 ? +1 : -1;
}

PnDetector::PnDetector(PnDetectorConfig config) : config_(std::move(config)) {
    agents_ = init_pn_detector(config_);
}

PnVerdict PnDetector::step(const std::vector<Vec>& samples) {
    if (samples.size() != agents_.size()) {
        throw DimensionError("pn_step: expected " + std::to_string(agents_.size()) +
                             " samples, got " + std::to_string(samples.size()));
    }
    std::vector<Vec> features;
    features.reserve(samples.size());
    for (const auto& x : samples) features.push_back(map_features(config_.rff, x));
    return step_features(features);
}

PnVerdict PnDetector::step_features(const std::vector<Vec>& features) {
    if (features.size() != agents_.size()) {
        throw DimensionError("pn_step: expected " + std::to_string(agents_.size()) +
                             " feature vectors, got " + std::to_string(features.size()));
    }

    const std::vector<VnAgentState> snapshot = agents_;
    std::vector<VnAgentState> next(agents_.size());

    // Every agent reads the same committed snapshot, so the per-agent updates
    // are order-independent.
    for (std::size_t j = 0; j < agents_.size(); ++j) {
        const double lambda = update_lambda(j, snapshot, features[j], config_);
        auto [w, rho] = update_primal(j, snapshot, features[j], lambda, config_);
        next[j].w = std::move(w);
        next[j].rho = rho;
        next[j].lambda = lambda;
    }
    for (std::size_t j = 0; j < agents_.size(); ++j) {
        auto [alpha, beta] = update_multipliers(j, snapshot, next, config_);
        next[j].alpha = std::move(alpha);
        next[j].beta = beta;
    }

    PnVerdict verdict;
    verdict.time = ++time_;
    verdict.per_agent_signs.resize(agents_.size());
    for (std::size_t j = 0; j < agents_.size(); ++j) {
        verdict.per_agent_signs[j] = discriminant(next[j], features[j]);
        if (verdict.per_agent_signs[j] < 0) verdict.is_anomalous = true;
    }

    verdict.committed = !verdict.is_anomalous;
    if (verdict.committed) {
        agents_ = std::move(next);
    }
    // On an anomalous round the candidate states are discarded and agents_
    // keeps the committed snapshot untouched.
    return verdict;
}

}  // namespace slicewatch

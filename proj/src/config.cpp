#include "slicewatch/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace slicewatch {

namespace {

const std::vector<ConfigKeyInfo> kKeys = {
    // scenario
    {"num_pns", "10", "number of physical nodes"},
    {"link_probability", "0.4", "Erdos-Renyi link probability (rejected until connected)"},
    {"num_sfcs", "6", "number of embedded service function chains"},
    {"chain_min", "4", "minimum VNs per SFC"},
    {"chain_max", "6", "maximum VNs per SFC"},
    {"service_mix", "1,1,1", "relative weights of service types 1..3"},
    {"horizon", "2000", "steps per run"},
    {"anomaly_rate", "0.002", "per-step window-start probability (PNs and PLs)"},
    {"anomaly_rate_pn", "", "PN-only override of anomaly_rate (empty = inherit)"},
    {"anomaly_rate_pl", "", "PL-only override of anomaly_rate (empty = inherit)"},
    {"anomaly_start", "300", "first step at which an anomaly window may open"},
    {"loss_mean", "0.5", "mean of the capacity-loss fraction"},
    {"loss_var", "0.01", "variance of the capacity-loss fraction"},
    {"anomaly_mean_duration", "20", "mean anomaly window length (geometric)"},
    {"noise_sigma", "0.05", "multiplicative observation-noise std"},
    {"traffic_sigma", "0.2", "per-step source-rate fluctuation std"},
    {"node_capacity_min", "5000", "PN processing capacity range low (packets/s)"},
    {"node_capacity_max", "8000", "PN processing capacity range high (packets/s)"},
    {"link_bandwidth_min", "8000", "PL bandwidth range low (kbit/s)"},
    {"link_bandwidth_max", "16000", "PL bandwidth range high (kbit/s)"},
    {"alloc_headroom", "1.6", "per-VL bandwidth allocation over nominal demand"},
    {"seeds.topology", "1", "substrate graph seed"},
    {"seeds.embedding", "2", "SFC placement seed"},
    {"seeds.anomalies", "3", "anomaly schedule seed"},
    {"seeds.noise", "4", "traffic and observation noise seed"},
    // detectors
    {"detector.rff_dim", "100", "random feature space dimension D"},
    {"detector.kernel_width", "4.0", "Gaussian kernel width sigma (on normalized inputs)"},
    {"detector.rff_seed", "7", "random feature basis seed"},
    {"detector.eta", "10.0", "augmented-Lagrange parameter"},
    {"detector.penalty", "1.0", "slack penalty C"},
    {"detector.warmup", "200", "PN-detector steps excluded from scoring"},
    {"detector.t0", "10", "initial labeled samples per virtual link"},
    {"detector.t2_threshold", "1.0", "fixed T^2 control limit"},
    {"detector.quantile_calibration", "false", "calibrate the control limit from a warm-up window"},
    {"detector.quantile", "0.99", "calibration quantile"},
    {"detector.calibration_window", "200", "steps of T^2 collection before scoring"},
    {"detector.eig_floor", "1e-8", "eigenvalue/variance floor"},
    {"detector.artd", "0", "anomaly ratio polluting baseline-mode training streams"},
    // harness
    {"runs", "20", "Monte Carlo repetitions"},
    {"metric_stride", "50", "steps between metric-series samples"},
    {"metric_window", "0", "metric-series window (0 = cumulative)"},
    {"convergence_pn", "-1", "PN whose estimates are traced (-1 = auto)"},
    {"convergence_components", "5", "number of traced w components"},
    // csv ingest column mapping
    {"csv.time", "time", "time column"},
    {"csv.slice", "slice_id", "slice id column"},
    {"csv.sfc", "sfc_id", "SFC id column"},
    {"csv.vn", "vn_id", "VN id column"},
    {"csv.pn", "pn_id", "PN id column"},
    {"csv.features", "", "feature columns, comma separated (empty = all feature_*)"},
    {"csv.pn_label", "pn_label", "PN ground-truth column (empty = absent)"},
    {"csv.pl_label", "pl_label", "PL ground-truth column (empty = absent)"},
};

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

const std::vector<ConfigKeyInfo>& Config::known_keys() { return kKeys; }

Config::Config() {
    for (const auto& k : kKeys) values_[k.name] = k.default_value;
}

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);

    Config config;
    std::string line;
    long line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(line_number) +
                              ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            config.set(key, value);
        } catch (const UnknownKeyError&) {
            throw ConfigError(path + ":" + std::to_string(line_number) + ": unknown key '" +
                              key + "'");
        }
    }
    return config;
}

void Config::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw UnknownKeyError("override '" + assignment + "' is not of the form key=value");
    }
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& value) {
    if (values_.find(key) == values_.end()) {
        throw UnknownKeyError("unknown config key '" + key + "'");
    }
    values_[key] = value;
}

const std::string& Config::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw UnknownKeyError("unknown config key '" + key + "'");
    return it->second;
}

double Config::get_double(const std::string& key) const {
    const std::string& raw = get(key);
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + raw + "' is not a number");
    }
}

long Config::get_long(const std::string& key) const {
    const std::string& raw = get(key);
    try {
        std::size_t used = 0;
        const long v = std::stol(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + raw + "' is not an integer");
    }
}

int Config::get_int(const std::string& key) const { return static_cast<int>(get_long(key)); }

std::uint64_t Config::get_seed(const std::string& key) const {
    const std::string& raw = get(key);
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + raw + "' is not a seed");
    }
}

bool Config::get_bool(const std::string& key) const {
    std::string raw = get(key);
    std::transform(raw.begin(), raw.end(), raw.begin(), ::tolower);
    if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return true;
    if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return false;
    throw ConfigError("config key '" + key + "': '" + get(key) + "' is not a boolean");
}

std::vector<double> Config::get_double_list(const std::string& key) const {
    const std::string& raw = get(key);
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': '" + item + "' is not a number");
        }
    }
    return out;
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) {  // std::map iterates in key order
        out += k;
        out += " = ";
        out += v;
        out += '\n';
    }
    return out;
}

std::string Config::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : canonical()) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace slicewatch

#include "slicewatch/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace slicewatch {

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_double(const std::string& cell, const std::string& column, long row) {
    if (cell.empty()) throw CsvError("missing value in column '" + column + "'", row);
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw CsvError("non-numeric value '" + cell + "' in column '" + column + "'", row);
    }
}

long parse_long(const std::string& cell, const std::string& column, long row) {
    if (cell.empty()) throw CsvError("missing value in column '" + column + "'", row);
    try {
        std::size_t used = 0;
        const long v = std::stol(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw CsvError("non-integer value '" + cell + "' in column '" + column + "'", row);
    }
}

int column_of(const std::vector<std::string>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

int require_column(const std::vector<std::string>& header, const std::string& name) {
    const int idx = column_of(header, name);
    if (idx < 0) throw CsvError("missing column '" + name + "'", 1);
    return idx;
}

// Round-trip exact formatting for doubles.
std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

IngestedTrace ingest_csv(const std::string& path, const CsvColumnMapping& mapping) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trace file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw CsvError("empty file", 1);
    const auto header = split_row(line);

    const int time_col = require_column(header, mapping.time);
    const int slice_col = require_column(header, mapping.slice);
    const int sfc_col = require_column(header, mapping.sfc);
    const int vn_col = require_column(header, mapping.vn);
    const int pn_col = require_column(header, mapping.pn);

    std::vector<std::string> feature_names = mapping.features;
    if (feature_names.empty()) {
        for (const auto& h : header) {
            if (h.rfind("feature_", 0) == 0) feature_names.push_back(h);
        }
        if (feature_names.empty()) throw CsvError("no feature_* columns found", 1);
    }
    std::vector<int> feature_cols;
    for (const auto& name : feature_names) feature_cols.push_back(require_column(header, name));

    const int pn_label_col = mapping.pn_label.empty() ? -1 : column_of(header, mapping.pn_label);
    const int pl_label_col = mapping.pl_label.empty() ? -1 : column_of(header, mapping.pl_label);

    struct RawRow {
        long time, slice, sfc, vn, pn, row;
        Vec features;
        char pn_label, pl_label;
    };
    std::vector<RawRow> rows;
    long row_number = 1;
    long last_time = std::numeric_limits<long>::min();
    while (std::getline(in, line)) {
        ++row_number;
        if (line.empty()) continue;
        const auto cells = split_row(line);
        if (cells.size() < header.size()) {
            throw CsvError("expected " + std::to_string(header.size()) + " cells, found " +
                           std::to_string(cells.size()), row_number);
        }
        RawRow r;
        r.row = row_number;
        r.time = parse_long(cells[time_col], mapping.time, row_number);
        if (r.time < last_time) {
            throw CsvError("time column not in ascending order", row_number);
        }
        last_time = r.time;
        r.slice = parse_long(cells[slice_col], mapping.slice, row_number);
        r.sfc = parse_long(cells[sfc_col], mapping.sfc, row_number);
        r.vn = parse_long(cells[vn_col], mapping.vn, row_number);
        r.pn = parse_long(cells[pn_col], mapping.pn, row_number);
        r.features.resize(static_cast<long>(feature_cols.size()));
        for (std::size_t k = 0; k < feature_cols.size(); ++k) {
            r.features(static_cast<long>(k)) =
                parse_double(cells[feature_cols[k]], feature_names[k], row_number);
        }
        r.pn_label = pn_label_col >= 0 &&
                     parse_long(cells[pn_label_col], mapping.pn_label, row_number) != 0;
        r.pl_label = pl_label_col >= 0 &&
                     parse_long(cells[pl_label_col], mapping.pl_label, row_number) != 0;
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw CsvError("no measurement rows", row_number);

    IngestedTrace trace;
    trace.num_features = static_cast<int>(feature_cols.size());
    trace.has_pn_labels = pn_label_col >= 0;
    trace.has_pl_labels = pl_label_col >= 0;

    // VN table keyed by (sfc, vn); the PN assignment must be static.
    std::map<std::pair<long, long>, int> vn_index;
    for (const auto& r : rows) {
        const auto key = std::make_pair(r.sfc, r.vn);
        const auto it = vn_index.find(key);
        if (it == vn_index.end()) {
            vn_index[key] = static_cast<int>(trace.vns.size());
            trace.vns.push_back({r.slice, r.sfc, r.vn, r.pn});
        } else if (trace.vns[it->second].pn_id != r.pn) {
            throw CsvError("vn " + std::to_string(r.vn) + " of sfc " + std::to_string(r.sfc) +
                           " changes pn_id", r.row);
        }
    }
    // std::map ordering gives the (sfc, vn) sort, but indices were assigned in
    // appearance order; remap to the sorted order.
    std::vector<int> remap(trace.vns.size());
    {
        std::vector<IngestedTrace::VnInfo> sorted;
        sorted.reserve(trace.vns.size());
        int next = 0;
        for (auto& [key, old_index] : vn_index) {
            sorted.push_back(trace.vns[old_index]);
            remap[old_index] = next++;
        }
        for (auto& [key, old_index] : vn_index) old_index = remap[old_index];
        trace.vns = std::move(sorted);
    }

    std::map<long, int> time_index;
    for (const auto& r : rows) {
        if (time_index.emplace(r.time, static_cast<int>(time_index.size())).second) {
            trace.times.push_back(r.time);
        }
    }

    const auto n_vns = trace.vns.size();
    trace.features.assign(trace.times.size(), std::vector<Vec>(n_vns));
    trace.pn_labels.assign(trace.times.size(), std::vector<char>(n_vns, 0));
    trace.pl_labels.assign(trace.times.size(), std::vector<char>(n_vns, 0));
    for (const auto& r : rows) {
        const int ti = time_index.at(r.time);
        const int vi = vn_index.at({r.sfc, r.vn});
        if (trace.features[ti][vi].size() != 0) {
            throw CsvError("duplicate row for vn " + std::to_string(r.vn) + " of sfc " +
                           std::to_string(r.sfc) + " at time " + std::to_string(r.time), r.row);
        }
        trace.features[ti][vi] = r.features;
        trace.pn_labels[ti][vi] = r.pn_label;
        trace.pl_labels[ti][vi] = r.pl_label;
    }
    for (std::size_t ti = 0; ti < trace.times.size(); ++ti) {
        for (std::size_t vi = 0; vi < n_vns; ++vi) {
            if (trace.features[ti][vi].size() == 0) {
                throw CsvError("no row for vn " + std::to_string(trace.vns[vi].vn_id) +
                               " of sfc " + std::to_string(trace.vns[vi].sfc_id) + " at time " +
                               std::to_string(trace.times[ti]), row_number);
            }
        }
    }
    return trace;
}

void export_trace_csv(const Scenario& scenario, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trace file: " + path);

    out << "time,slice_id,sfc_id,vn_id,pn_id";
    for (int k = 1; k <= kNumVnFeatures; ++k) out << ",feature_" << k;
    out << ",pn_label,pl_label\n";

    // Global VN ids ascend along each chain so that ingest recovers the chain
    // order from vn_id.
    std::vector<long> first_vn_id(scenario.sfcs().size());
    long next_id = 0;
    for (const auto& sfc : scenario.sfcs()) {
        first_vn_id[sfc.sfc_id] = next_id;
        next_id += sfc.length();
    }

    for (long t = 0; t < scenario.config().horizon; ++t) {
        const StepSample sample = scenario.step(t);
        for (const auto& sfc : scenario.sfcs()) {
            for (int i = 0; i < sfc.length(); ++i) {
                out << t << ',' << sfc.sfc_id << ',' << sfc.sfc_id << ','
                    << first_vn_id[sfc.sfc_id] + i << ',' << sfc.vn_to_pn[i];
                const Vec& f = sample.features[sfc.sfc_id][i];
                for (int k = 0; k < kNumVnFeatures; ++k) out << ',' << format_double(f(k));
                const bool pn_label = sample.pn_anomalous[sfc.vn_to_pn[i]];
                bool pl_label = false;
                if (i + 1 < sfc.length()) {
                    for (int link : sfc.vl_paths[i]) {
                        if (sample.pl_anomalous[link]) pl_label = true;
                    }
                }
                out << ',' << (pn_label ? 1 : 0) << ',' << (pl_label ? 1 : 0) << '\n';
            }
        }
    }
    if (!out) throw IoError("failed while writing trace file: " + path);
}

}  // namespace slicewatch

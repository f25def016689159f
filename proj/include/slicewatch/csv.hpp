#pragma once

#include <string>
#include <vector>

#include "slicewatch/sim.hpp"
#include "slicewatch/types.hpp"

namespace slicewatch {

// Column mapping for measurement CSVs. An empty label name marks the column
// as absent; empty `features` selects every column named feature_<k>.
struct CsvColumnMapping {
    std::string time = "time";
    std::string slice = "slice_id";
    std::string sfc = "sfc_id";
    std::string vn = "vn_id";
    std::string pn = "pn_id";
    std::vector<std::string> features;
    std::string pn_label = "pn_label";
    std::string pl_label = "pl_label";
};

// Measurement streams grouped by (time, vn) with times strictly ascending.
// VNs are keyed by (sfc_id, vn_id) and carry their static PN assignment;
// chain order within an SFC follows ascending vn_id.
struct IngestedTrace {
    struct VnInfo {
        long slice_id = 0;
        long sfc_id = 0;
        long vn_id = 0;
        long pn_id = 0;
    };

    std::vector<VnInfo> vns;                  // sorted by (sfc_id, vn_id)
    std::vector<long> times;                  // ascending
    std::vector<std::vector<Vec>> features;   // [time index][vn index]
    bool has_pn_labels = false;
    bool has_pl_labels = false;
    std::vector<std::vector<char>> pn_labels;  // [time index][vn index]
    std::vector<std::vector<char>> pl_labels;  // label of the VN's outgoing VL
    int num_features = 0;
};

IngestedTrace ingest_csv(const std::string& path, const CsvColumnMapping& mapping);

// Writes a full scenario trace in the measurement CSV format, including the
// pn_label column and the pl_label column of each VN's outgoing virtual link.
void export_trace_csv(const Scenario& scenario, const std::string& path);

}  // namespace slicewatch

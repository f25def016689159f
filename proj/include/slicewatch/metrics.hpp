#pragma once

#include <optional>

namespace slicewatch {

struct ConfusionMatrix {
    long tp = 0;
    long tn = 0;
    long fp = 0;
    long fn = 0;

    long total() const { return tp + tn + fp + fn; }

    ConfusionMatrix& operator+=(const ConfusionMatrix& other) {
        tp += other.tp;
        tn += other.tn;
        fp += other.fp;
        fn += other.fn;
        return *this;
    }
};

// Increments exactly one counter.
void score_verdict(ConfusionMatrix& cm, bool predicted_anomalous, bool actual_anomalous);

// A metric with a zero denominator is reported as nullopt, never 0 or NaN.
struct Metrics {
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

Metrics compute_metrics(const ConfusionMatrix& cm);

}  // namespace slicewatch

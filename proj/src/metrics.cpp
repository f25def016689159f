#include "slicewatch/metrics.hpp"

namespace slicewatch {

void score_verdict(ConfusionMatrix& cm, bool predicted_anomalous, bool actual_anomalous) {
    if (predicted_anomalous) {
        actual_anomalous ? ++cm.tp : ++cm.fp;
    } else {
        actual_anomalous ? ++cm.fn : ++cm.tn;
    }
}

Metrics compute_metrics(const ConfusionMatrix& cm) {
    Metrics m;
    if (cm.total() > 0) {
        m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    }
    if (cm.tp + cm.fp > 0) {
        m.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    }
    if (cm.tp + cm.fn > 0) {
        m.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    }
    if (m.precision && m.recall && *m.precision + *m.recall > 0.0) {
        m.f1 = 2.0 * (*m.precision) * (*m.recall) / (*m.precision + *m.recall);
    }
    return m;
}

}  // namespace slicewatch

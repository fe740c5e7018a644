#include "crossclone/metrics.hpp"

#include "crossclone/errors.hpp"

namespace crossclone {

MetricsTuple compute_metrics(const std::vector<int>& predictions,
                             const std::vector<int>& labels) {
    if (predictions.empty()) throw ValidationError("metrics: empty prediction list");
    if (predictions.size() != labels.size()) {
        throw ValidationError("metrics: predictions and labels differ in length");
    }
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int p = predictions[i];
        const int y = labels[i];
        if ((p != 0 && p != 1) || (y != 0 && y != 1)) {
            throw ValidationError("metrics: values must be 0 or 1");
        }
        if (p == 1 && y == 1) ++tp;
        else if (p == 0 && y == 0) ++tn;
        else if (p == 1 && y == 0) ++fp;
        else ++fn;
    }
    MetricsTuple m;
    const double n = static_cast<double>(predictions.size());
    m.accuracy = static_cast<double>(tp + tn) / n;
    m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

} // namespace crossclone

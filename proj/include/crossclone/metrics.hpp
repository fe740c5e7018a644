#pragma once

#include <vector>

namespace crossclone {

// Binary classification metrics with clone (label 1) as the positive class.
struct MetricsTuple {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// predictions and labels hold 0/1 values, equal length >= 1. Precision and
// recall are defined as 0 when their denominators are empty, and F1 is 0
// when precision + recall is 0.
MetricsTuple compute_metrics(const std::vector<int>& predictions,
                             const std::vector<int>& labels);

} // namespace crossclone

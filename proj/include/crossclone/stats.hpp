#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crossclone/metrics.hpp"

namespace crossclone {

enum class Alternative { less, greater, two_sided };

enum class PValueMethod { exact, normal_approx };

// Outcome of a Wilcoxon signed-rank test. The statistic is W+, the sum of
// ranks of positive differences. rank_biserial = (W+ - W-) / (W+ + W-) is a
// signed effect size in [-1, 1], positive when positive differences dominate.
struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    PValueMethod method = PValueMethod::exact;
    Alternative alternative = Alternative::two_sided;
    std::size_t n = 0; // non-zero differences used
    double rank_biserial = 0.0;
};

// One-sample Wilcoxon signed-rank test of the values against mu0. Zero
// differences are dropped; ties receive average ranks. With n <= 25 non-zero
// differences the p-value is exact (full enumeration of sign assignments via
// dynamic programming), otherwise a normal approximation with tie-corrected
// variance is used. All differences being zero is an error.
TestResult wilcoxon_signed_rank(const std::vector<double>& values, double mu0,
                                Alternative alternative);

// Paired two-sample form: signed-rank test of x[i] - y[i] against zero.
TestResult wilcoxon_paired(const std::vector<double>& x, const std::vector<double>& y,
                           Alternative alternative);

// One item's prediction for the k-fold comparison; ids pair the two systems.
struct ItemResult {
    std::string id;
    int prediction = 0;
    int label = 0;
};

// Per-fold F1 scores of two systems over a shared item set, plus the paired
// signed-rank test on the k (F1_a, F1_b) pairs. Folds where a side has no
// positive predictions and no positive labels are flagged; the 0 convention
// from compute_metrics applies to their F1.
struct KfoldComparison {
    std::vector<double> f1_a;
    std::vector<double> f1_b;
    std::vector<bool> degenerate_fold;
    TestResult test;
};

// Assigns items to k folds by a seeded shuffle of the sorted ids (fold sizes
// differ by at most one), computes per-fold F1 for both systems, and runs the
// paired test. The two systems must cover the same ids with the same labels.
KfoldComparison kfold_f1_compare(const std::vector<ItemResult>& a,
                                 const std::vector<ItemResult>& b, std::size_t k,
                                 std::uint64_t seed, Alternative alternative);

} // namespace crossclone

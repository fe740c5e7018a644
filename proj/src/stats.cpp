#include "crossclone/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "crossclone/errors.hpp"
#include "crossclone/rng.hpp"

namespace crossclone {

namespace {

constexpr std::size_t kExactLimit = 25; // exact enumeration up to here

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Signed-rank decomposition of a difference vector: average ranks of |d|
// stored doubled so that tied (half-integer) ranks become exact integers.
struct RankedDiffs {
    std::vector<long long> doubled_ranks; // per non-zero difference
    std::vector<int> signs;               // +1 / -1, aligned with doubled_ranks
    double tie_correction = 0.0;          // sum over tie groups of (t^3 - t)
};

RankedDiffs rank_differences(const std::vector<double>& diffs) {
    std::vector<double> nonzero;
    for (const double d : diffs) {
        if (d != 0.0) nonzero.push_back(d);
    }
    if (nonzero.empty()) {
        throw DataError("wilcoxon: all differences are zero");
    }
    std::vector<std::size_t> order(nonzero.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(nonzero[a]) < std::fabs(nonzero[b]);
    });
    RankedDiffs out;
    out.doubled_ranks.resize(nonzero.size());
    out.signs.resize(nonzero.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() &&
               std::fabs(nonzero[order[j]]) == std::fabs(nonzero[order[i]])) {
            ++j;
        }
        // Positions i..j-1 share |d|; average rank = (i+1 + j) / 2, doubled
        // to stay integral.
        const long long doubled = static_cast<long long>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            out.doubled_ranks[order[k]] = doubled;
            out.signs[order[k]] = nonzero[order[k]] > 0.0 ? 1 : -1;
        }
        const double t = static_cast<double>(j - i);
        out.tie_correction += t * t * t - t;
        i = j;
    }
    return out;
}

// Distribution of the doubled W+ statistic under the null (each sign
// equally likely), as subset counts over the doubled ranks. With n <= 25
// every count is below 2^25, so doubles hold them exactly.
std::vector<double> doubled_wplus_counts(const std::vector<long long>& doubled_ranks) {
    long long max_sum = 0;
    for (const long long r : doubled_ranks) max_sum += r;
    std::vector<double> dp(static_cast<std::size_t>(max_sum) + 1, 0.0);
    dp[0] = 1.0;
    for (const long long r : doubled_ranks) {
        for (long long s = max_sum; s >= r; --s) {
            dp[static_cast<std::size_t>(s)] += dp[static_cast<std::size_t>(s - r)];
        }
    }
    return dp;
}

TestResult signed_rank_from_diffs(const std::vector<double>& diffs, Alternative alternative) {
    const RankedDiffs ranked = rank_differences(diffs);
    const std::size_t n = ranked.doubled_ranks.size();
    long long doubled_wplus = 0;
    long long doubled_total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        doubled_total += ranked.doubled_ranks[i];
        if (ranked.signs[i] > 0) doubled_wplus += ranked.doubled_ranks[i];
    }
    TestResult result;
    result.alternative = alternative;
    result.n = n;
    result.statistic = static_cast<double>(doubled_wplus) / 2.0;
    const double wplus = result.statistic;
    const double wminus = static_cast<double>(doubled_total - doubled_wplus) / 2.0;
    result.rank_biserial = (wplus - wminus) / (wplus + wminus);

    double p_less;
    double p_greater;
    if (n <= kExactLimit) {
        result.method = PValueMethod::exact;
        const std::vector<double> counts = doubled_wplus_counts(ranked.doubled_ranks);
        const double total = std::ldexp(1.0, static_cast<int>(n)); // 2^n
        double below_or_equal = 0.0;
        double above_or_equal = 0.0;
        for (long long s = 0; s < static_cast<long long>(counts.size()); ++s) {
            if (s <= doubled_wplus) below_or_equal += counts[static_cast<std::size_t>(s)];
            if (s >= doubled_wplus) above_or_equal += counts[static_cast<std::size_t>(s)];
        }
        p_less = below_or_equal / total;
        p_greater = above_or_equal / total;
    } else {
        result.method = PValueMethod::normal_approx;
        const double nd = static_cast<double>(n);
        const double mean = nd * (nd + 1.0) / 4.0;
        const double variance =
            nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - ranked.tie_correction / 48.0;
        const double z = (wplus - mean) / std::sqrt(variance);
        p_less = normal_cdf(z);
        p_greater = 1.0 - p_less;
    }
    switch (alternative) {
        case Alternative::less:
            result.p_value = p_less;
            break;
        case Alternative::greater:
            result.p_value = p_greater;
            break;
        case Alternative::two_sided:
            result.p_value = std::min(1.0, 2.0 * std::min(p_less, p_greater));
            break;
    }
    return result;
}

} // namespace

TestResult wilcoxon_signed_rank(const std::vector<double>& values, double mu0,
                                Alternative alternative) {
    if (values.empty()) throw ValidationError("wilcoxon: empty sample");
    std::vector<double> diffs(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) diffs[i] = values[i] - mu0;
    return signed_rank_from_diffs(diffs, alternative);
}

TestResult wilcoxon_paired(const std::vector<double>& x, const std::vector<double>& y,
                           Alternative alternative) {
    if (x.empty()) throw ValidationError("wilcoxon: empty sample");
    if (x.size() != y.size()) throw ValidationError("wilcoxon: paired samples differ in length");
    std::vector<double> diffs(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) diffs[i] = x[i] - y[i];
    return signed_rank_from_diffs(diffs, alternative);
}

KfoldComparison kfold_f1_compare(const std::vector<ItemResult>& a,
                                 const std::vector<ItemResult>& b, std::size_t k,
                                 std::uint64_t seed, Alternative alternative) {
    if (a.empty()) throw ValidationError("kfold: empty result set");
    if (a.size() != b.size()) throw ValidationError("kfold: result sets differ in size");
    if (k < 2) throw ValidationError("kfold: need at least 2 folds");
    if (k > a.size()) throw ValidationError("kfold: more folds than items");

    std::unordered_map<std::string, const ItemResult*> b_by_id;
    for (const auto& item : b) {
        if (!b_by_id.emplace(item.id, &item).second) {
            throw ValidationError("kfold: duplicate item id '" + item.id + "'");
        }
    }
    std::unordered_map<std::string, const ItemResult*> a_by_id;
    for (const auto& item : a) {
        if (!a_by_id.emplace(item.id, &item).second) {
            throw ValidationError("kfold: duplicate item id '" + item.id + "'");
        }
        const auto it = b_by_id.find(item.id);
        if (it == b_by_id.end()) {
            throw ValidationError("kfold: item '" + item.id + "' missing from second system");
        }
        if (it->second->label != item.label) {
            throw ValidationError("kfold: label mismatch for item '" + item.id + "'");
        }
    }

    // Deterministic fold assignment: shuffle the sorted ids, then cut into k
    // nearly equal folds (the first n % k folds get one extra item).
    std::vector<std::string> ids;
    ids.reserve(a.size());
    for (const auto& item : a) ids.push_back(item.id);
    std::sort(ids.begin(), ids.end());
    Rng rng(seed);
    rng.shuffle(ids);

    KfoldComparison cmp;
    const std::size_t base = a.size() / k;
    const std::size_t extra = a.size() % k;
    std::size_t cursor = 0;
    for (std::size_t fold = 0; fold < k; ++fold) {
        const std::size_t fold_size = base + (fold < extra ? 1 : 0);
        std::vector<int> preds_a, preds_b, labels;
        for (std::size_t i = 0; i < fold_size; ++i, ++cursor) {
            const ItemResult* ia = a_by_id.at(ids[cursor]);
            const ItemResult* ib = b_by_id.at(ids[cursor]);
            preds_a.push_back(ia->prediction);
            preds_b.push_back(ib->prediction);
            labels.push_back(ia->label);
        }
        const MetricsTuple ma = compute_metrics(preds_a, labels);
        const MetricsTuple mb = compute_metrics(preds_b, labels);
        cmp.f1_a.push_back(ma.f1);
        cmp.f1_b.push_back(mb.f1);
        cmp.degenerate_fold.push_back((ma.precision + ma.recall) == 0.0 ||
                                      (mb.precision + mb.recall) == 0.0);
    }
    cmp.test = wilcoxon_paired(cmp.f1_a, cmp.f1_b, alternative);
    return cmp;
}

} // namespace crossclone

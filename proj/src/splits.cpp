#include "crossclone/splits.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "crossclone/errors.hpp"
#include "crossclone/rng.hpp"

namespace crossclone {

SplitPlan split_random(const PairCorpus& corpus, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ValidationError("split: train_fraction must lie strictly between 0 and 1");
    }
    if (corpus.pairs.empty()) throw DataError("split: corpus has no pairs");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
        by_class[corpus.pairs[i].label].push_back(i);
    }
    SplitPlan plan;
    plan.kind = SplitKind::random_split;
    plan.id = "random";
    Rng rng(seed);
    for (auto& indices : by_class) {
        if (indices.empty()) continue;
        const std::size_t n_train = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(indices.size())));
        const auto picked = rng.sample_indices(indices.size(), std::min(n_train, indices.size()));
        std::vector<char> in_train(indices.size(), 0);
        for (const std::size_t p : picked) in_train[p] = 1;
        for (std::size_t p = 0; p < indices.size(); ++p) {
            (in_train[p] != 0 ? plan.train : plan.test).push_back(indices[p]);
        }
    }
    std::sort(plan.train.begin(), plan.train.end());
    std::sort(plan.test.begin(), plan.test.end());
    if (plan.train.empty() || plan.test.empty()) {
        throw ValidationError("split: train_fraction leaves an empty side");
    }
    return plan;
}

std::vector<SplitPlan> split_one_vs_rest(const PairCorpus& corpus) {
    if (corpus.pairs.empty()) throw DataError("split: corpus has no pairs");
    std::map<std::string, std::vector<std::size_t>> by_functionality;
    for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
        by_functionality[corpus.pairs[i].functionality].push_back(i);
    }
    if (by_functionality.size() < 2) {
        throw DataError("split: one-vs-rest needs at least two functionalities");
    }
    std::vector<SplitPlan> plans;
    for (const auto& [functionality, test_indices] : by_functionality) {
        SplitPlan plan;
        plan.kind = SplitKind::one_vs_rest;
        plan.id = "holdout:" + functionality;
        plan.held_out_functionality = functionality;
        plan.test = test_indices;
        for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
            if (corpus.pairs[i].functionality != functionality) plan.train.push_back(i);
        }
        plans.push_back(std::move(plan));
    }
    return plans;
}

SplitPlan split_cross_dataset(const PairCorpus& train_corpus, const PairCorpus& test_corpus) {
    if (train_corpus.pairs.empty()) throw DataError("split: training corpus has no pairs");
    if (test_corpus.pairs.empty()) throw DataError("split: test corpus has no pairs");
    SplitPlan plan;
    plan.kind = SplitKind::cross_dataset;
    plan.id = "cross:" + train_corpus.name + "->" + test_corpus.name;
    plan.train.resize(train_corpus.pairs.size());
    plan.test.resize(test_corpus.pairs.size());
    for (std::size_t i = 0; i < plan.train.size(); ++i) plan.train[i] = i;
    for (std::size_t i = 0; i < plan.test.size(); ++i) plan.test[i] = i;
    return plan;
}

} // namespace crossclone

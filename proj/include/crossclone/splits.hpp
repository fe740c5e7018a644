#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crossclone/corpus.hpp"

namespace crossclone {

enum class SplitKind { random_split, one_vs_rest, cross_dataset };

// Train/test assignment as pair indices. For cross-dataset plans the two
// index lists refer to different corpora (train into the first, test into
// the second); otherwise both index the same corpus.
struct SplitPlan {
    SplitKind kind = SplitKind::random_split;
    std::string id; // experiment identifier, e.g. "random" or "holdout:fn03"
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::string held_out_functionality; // one_vs_rest only
};

// Stratified random split: within each label class, round(fraction * n)
// pairs go to training, sampled without replacement under the given seed.
// Fraction must lie in (0, 1); an empty train or test side is an error.
SplitPlan split_random(const PairCorpus& corpus, double train_fraction, std::uint64_t seed);

// One plan per functionality: its pairs form the test set, all other pairs
// the training set. Requires at least two functionalities. Plans are ordered
// by functionality name.
std::vector<SplitPlan> split_one_vs_rest(const PairCorpus& corpus);

// All pairs of one corpus train, all pairs of another test.
SplitPlan split_cross_dataset(const PairCorpus& train_corpus, const PairCorpus& test_corpus);

} // namespace crossclone

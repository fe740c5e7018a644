#pragma once

#include <string>
#include <vector>

#include "crossclone/contrastive.hpp"
#include "crossclone/report.hpp"
#include "crossclone/splits.hpp"

namespace crossclone {

// How to build and train the model for an experiment. When `imported` is
// non-null its vectors replace the trainable embedding encoder.
struct ExperimentConfig {
    ModelVariant variant = ModelVariant::contrastive;
    ProjectionKind head_kind = ProjectionKind::batchnorm;
    EncoderConfig encoder;
    ContrastiveConfig train;
    const ImportedEncoder* imported = nullptr;
};

// Result of one experiment: the report row plus raw per-pair predictions in
// test-set order (for statistical comparisons downstream).
struct ExperimentOutcome {
    ReportRow row;
    std::vector<std::size_t> test_indices;
    std::vector<int> predictions;
    std::vector<int> labels;
};

// Trains a model on the training snippets/pairs only (the vocabulary never
// sees test snippets) and returns it.
ContrastiveModel fit_contrastive(const PairCorpus& corpus,
                                 const std::vector<std::size_t>& train_indices,
                                 const ExperimentConfig& cfg);
BaselineModel fit_baseline(const PairCorpus& corpus,
                           const std::vector<std::size_t>& train_indices,
                           const ExperimentConfig& cfg);

// Runs one split plan end to end: fit on the plan's training side, classify
// its test side, compute metrics. For cross-dataset plans train_corpus and
// test_corpus differ; otherwise pass the same corpus twice.
ExperimentOutcome run_plan(const PairCorpus& train_corpus, const PairCorpus& test_corpus,
                           const SplitPlan& plan, const ExperimentConfig& cfg);

// Runs independent plans over one corpus, each with its own model, up to
// max_parallel at a time (0 = hardware concurrency). Outcomes keep plan
// order regardless of scheduling.
std::vector<ExperimentOutcome> run_plans(const PairCorpus& corpus,
                                         const std::vector<SplitPlan>& plans,
                                         const ExperimentConfig& cfg,
                                         std::size_t max_parallel = 0);

// Protocol name used in report rows for a split kind.
std::string protocol_name(SplitKind kind);
std::string variant_name(ModelVariant variant);

} // namespace crossclone

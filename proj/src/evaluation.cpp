#include "crossclone/evaluation.hpp"

#include <atomic>
#include <mutex>
#include <thread>
#include <tuple>

#include "crossclone/errors.hpp"

namespace crossclone {

namespace {

Encoder make_encoder(const PairCorpus& corpus, const std::vector<std::size_t>& train_indices,
                     const ExperimentConfig& cfg) {
    if (cfg.imported != nullptr) return Encoder(*cfg.imported);
    return Encoder(EmbeddingEncoder::build(snippets_for_pairs(corpus, train_indices), cfg.encoder));
}

} // namespace

ContrastiveModel fit_contrastive(const PairCorpus& corpus,
                                 const std::vector<std::size_t>& train_indices,
                                 const ExperimentConfig& cfg) {
    ContrastiveModel model;
    model.config = cfg.train;
    model.encoder = make_encoder(corpus, train_indices, cfg);
    model.head = cfg.head_kind == ProjectionKind::identity
                     ? ProjectionHead::identity()
                     : ProjectionHead::batchnorm(model.encoder.dim());
    train_contrastive(model, corpus, train_indices);
    return model;
}

BaselineModel fit_baseline(const PairCorpus& corpus,
                           const std::vector<std::size_t>& train_indices,
                           const ExperimentConfig& cfg) {
    BaselineModel model;
    model.config = cfg.train;
    model.encoder = make_encoder(corpus, train_indices, cfg);
    train_baseline(model, corpus, train_indices);
    return model;
}

ExperimentOutcome run_plan(const PairCorpus& train_corpus, const PairCorpus& test_corpus,
                           const SplitPlan& plan, const ExperimentConfig& cfg) {
    if (plan.train.empty()) throw ValidationError("experiment: empty training side");
    if (plan.test.empty()) throw ValidationError("experiment: empty test side");
    ExperimentOutcome outcome;
    outcome.test_indices = plan.test;
    if (cfg.variant == ModelVariant::contrastive) {
        const ContrastiveModel model = fit_contrastive(train_corpus, plan.train, cfg);
        std::tie(outcome.predictions, outcome.labels) =
            predict_pairs(model, test_corpus, plan.test);
    } else {
        const BaselineModel model = fit_baseline(train_corpus, plan.train, cfg);
        std::tie(outcome.predictions, outcome.labels) =
            predict_pairs(model, test_corpus, plan.test);
    }
    outcome.row.experiment_id = plan.id;
    outcome.row.protocol = protocol_name(plan.kind);
    outcome.row.model_variant = variant_name(cfg.variant);
    outcome.row.metrics = compute_metrics(outcome.predictions, outcome.labels);
    return outcome;
}

std::vector<ExperimentOutcome> run_plans(const PairCorpus& corpus,
                                         const std::vector<SplitPlan>& plans,
                                         const ExperimentConfig& cfg,
                                         std::size_t max_parallel) {
    if (max_parallel == 0) {
        max_parallel = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    }
    std::vector<ExperimentOutcome> outcomes(plans.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= plans.size()) break;
            try {
                outcomes[i] = run_plan(corpus, corpus, plans[i], cfg);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    const std::size_t n_workers = std::min(max_parallel, plans.size());
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return outcomes;
}

std::string protocol_name(SplitKind kind) {
    switch (kind) {
        case SplitKind::random_split: return "random";
        case SplitKind::one_vs_rest: return "one-vs-rest";
        case SplitKind::cross_dataset: return "cross-dataset";
    }
    return "unknown";
}

std::string variant_name(ModelVariant variant) {
    return variant == ModelVariant::contrastive ? "contrastive" : "baseline";
}

} // namespace crossclone

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "crossclone/corpus.hpp"
#include "crossclone/encoder.hpp"
#include "crossclone/metrics.hpp"
#include "crossclone/projection.hpp"

namespace crossclone {

// Cosine similarity of two vectors (or other same-shaped expressions),
// defined as 0 when either operand has zero norm.
template <typename A, typename B>
double cosine_similarity(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

enum class ModelVariant { contrastive, baseline };

struct ContrastiveConfig {
    double margin = 0.5;
    double tau = 0.5; // cosine threshold at inference
    double learning_rate = 0.01;
    std::size_t batch_size = 32;
    std::size_t epochs = 30;
    std::uint64_t seed = 0;

    void validate() const;
};

// Margin-based contrastive loss over projected pair batches. Rows i of r and
// rp hold the two sides of pair i; y[i] is 1 for clones, 0 otherwise:
//   L = 1/(2N) * sum_i [ y_i * d_i^2 + (1 - y_i) * max(0, margin - d_i)^2 ]
// with d_i the Euclidean distance between the rows.
double contrastive_loss(const Eigen::MatrixXd& r, const Eigen::MatrixXd& rp,
                        const std::vector<int>& y, double margin);

// Analytic gradients of the loss with respect to r and rp. For clones
// dL/dr_i = (r_i - rp_i)/N; for non-clones inside the margin
// dL/dr_i = -(margin - d_i)/(N * d_i) * (r_i - rp_i), zero once d_i >= margin.
// The non-clone gradient at d_i = 0 uses the zero subgradient.
void contrastive_loss_grad(const Eigen::MatrixXd& r, const Eigen::MatrixXd& rp,
                           const std::vector<int>& y, double margin,
                           Eigen::MatrixXd& dr, Eigen::MatrixXd& drp);

struct ContrastiveModel {
    Encoder encoder;
    ProjectionHead head;
    ContrastiveConfig config;
};

// Logistic classifier over |q - q'|, trained with binary cross-entropy on
// the same encoded vectors; serves as the non-metric-learning reference.
struct BaselineModel {
    Encoder encoder;
    Eigen::VectorXd w;
    double b = 0.0;
    ContrastiveConfig config; // margin/tau unused
};

struct Prediction {
    bool is_clone = false;
    double score = 0.0;     // cosine similarity (contrastive) or probability (baseline)
    bool degenerate = false; // a zero-norm projected vector forced score 0
};

Prediction predict(const ContrastiveModel& model, const CodeSnippet& left,
                   const CodeSnippet& right);
Prediction predict(const BaselineModel& model, const CodeSnippet& left,
                   const CodeSnippet& right);

// Mean loss per epoch, in order.
struct TrainTrace {
    std::vector<double> epoch_mean_loss;
};

// Mini-batch SGD over the given pair indices using model.config. Both sides
// of a batch are projected jointly (one 2N-row batch) so batch statistics
// cover the full batch. Gradients flow into the projection head and, for
// trainable encoders, the embedding table. Throws DivergenceError when the
// loss stops being finite.
TrainTrace train_contrastive(ContrastiveModel& model, const PairCorpus& corpus,
                             const std::vector<std::size_t>& pair_indices);
TrainTrace train_baseline(BaselineModel& model, const PairCorpus& corpus,
                          const std::vector<std::size_t>& pair_indices);

// Classifies each listed pair and returns (predictions, labels) in order.
std::pair<std::vector<int>, std::vector<int>> predict_pairs(
    const ContrastiveModel& model, const PairCorpus& corpus,
    const std::vector<std::size_t>& pair_indices);
std::pair<std::vector<int>, std::vector<int>> predict_pairs(
    const BaselineModel& model, const PairCorpus& corpus,
    const std::vector<std::size_t>& pair_indices);

// One grid cell: a (margin, projection kind) combination and its validation
// metrics after training.
struct GridCell {
    double margin = 0.0;
    ProjectionKind kind = ProjectionKind::identity;
    MetricsTuple metrics;
};

struct GridResult {
    std::vector<GridCell> cells;
    std::size_t best = 0; // index into cells
};

// Trains one contrastive model per (margin, kind) cell on the training pairs
// and scores validation F1. Best cell maximises F1; ties prefer the smaller
// margin, then identity over batchnorm.
GridResult grid_search(const PairCorpus& corpus, const std::vector<std::size_t>& train_indices,
                       const std::vector<std::size_t>& val_indices,
                       const std::vector<double>& margins,
                       const std::vector<ProjectionKind>& kinds,
                       const EncoderConfig& encoder_cfg, const ContrastiveConfig& base_cfg);

} // namespace crossclone

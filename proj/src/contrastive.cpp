#include "crossclone/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "crossclone/errors.hpp"
#include "crossclone/rng.hpp"

namespace crossclone {

void ContrastiveConfig::validate() const {
    if (margin < 0.0) throw ValidationError("config: margin must be non-negative");
    if (tau < -1.0 || tau > 1.0) throw ValidationError("config: tau must lie in [-1, 1]");
    if (learning_rate <= 0.0) throw ValidationError("config: learning_rate must be positive");
    if (batch_size == 0) throw ValidationError("config: batch_size must be >= 1");
    if (epochs == 0) throw ValidationError("config: epochs must be >= 1");
}

double contrastive_loss(const Eigen::MatrixXd& r, const Eigen::MatrixXd& rp,
                        const std::vector<int>& y, double margin) {
    if (r.rows() != rp.rows() || r.cols() != rp.cols()) {
        throw ValidationError("loss: r and rp must have matching shapes");
    }
    if (static_cast<std::size_t>(r.rows()) != y.size()) {
        throw ValidationError("loss: label count must match row count");
    }
    if (r.rows() == 0) throw ValidationError("loss: empty batch");
    if (margin < 0.0) throw ValidationError("loss: margin must be non-negative");
    for (const int label : y) {
        if (label != 0 && label != 1) throw ValidationError("loss: labels must be 0 or 1");
    }
    const Eigen::Index n = r.rows();
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = (r.row(i) - rp.row(i)).norm();
        if (y[static_cast<std::size_t>(i)] == 1) {
            total += d * d;
        } else {
            const double hinge = std::max(0.0, margin - d);
            total += hinge * hinge;
        }
    }
    return total / (2.0 * static_cast<double>(n));
}

void contrastive_loss_grad(const Eigen::MatrixXd& r, const Eigen::MatrixXd& rp,
                           const std::vector<int>& y, double margin,
                           Eigen::MatrixXd& dr, Eigen::MatrixXd& drp) {
    if (r.rows() != rp.rows() || r.cols() != rp.cols()) {
        throw ValidationError("loss: r and rp must have matching shapes");
    }
    if (static_cast<std::size_t>(r.rows()) != y.size()) {
        throw ValidationError("loss: label count must match row count");
    }
    if (r.rows() == 0) throw ValidationError("loss: empty batch");
    if (margin < 0.0) throw ValidationError("loss: margin must be non-negative");
    for (const int label : y) {
        if (label != 0 && label != 1) throw ValidationError("loss: labels must be 0 or 1");
    }
    const Eigen::Index n = r.rows();
    const double scale = 1.0 / static_cast<double>(n);
    dr = Eigen::MatrixXd::Zero(n, r.cols());
    drp = Eigen::MatrixXd::Zero(n, r.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::RowVectorXd diff = r.row(i) - rp.row(i);
        if (y[static_cast<std::size_t>(i)] == 1) {
            dr.row(i) = scale * diff;
        } else {
            const double d = diff.norm();
            // Outside the margin the hinge is flat; at d = 0 the distance is
            // not differentiable and we take the zero subgradient.
            if (d > 0.0 && d < margin) {
                dr.row(i) = -scale * (margin - d) / d * diff;
            }
        }
        drp.row(i) = -dr.row(i);
    }
}

namespace {

// Per-snippet encoding cache for one training run. Trainable encoders keep
// token rows (vectors must be recomputed as the table changes); imported
// encoders keep the fixed vectors.
struct EncodeCache {
    bool trainable = false;
    int dim = 0;
    std::unordered_map<std::string, std::vector<std::size_t>> rows;
    std::unordered_map<std::string, Eigen::VectorXd> vectors;

    static EncodeCache build(const Encoder& encoder, const PairCorpus& corpus,
                             const std::vector<std::size_t>& pair_indices) {
        EncodeCache cache;
        cache.trainable = encoder.trainable();
        cache.dim = encoder.dim();
        for (const std::size_t idx : pair_indices) {
            const LabeledPair& pair = corpus.pairs[idx];
            for (const std::string& id : {pair.left, pair.right}) {
                if (cache.trainable) {
                    if (cache.rows.count(id) == 0) {
                        cache.rows.emplace(id, encoder.embedding().token_rows(corpus.snippet(id).code));
                    }
                } else if (cache.vectors.count(id) == 0) {
                    cache.vectors.emplace(id, encoder.encode(corpus.snippet(id)));
                }
            }
        }
        return cache;
    }

    Eigen::VectorXd encode(const Encoder& encoder, const std::string& id) const {
        if (!trainable) return vectors.at(id);
        const auto& r = rows.at(id);
        Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
        for (const std::size_t row : r) {
            v += encoder.embedding().table.row(static_cast<Eigen::Index>(row));
        }
        if (!r.empty()) v /= static_cast<double>(r.size());
        return v;
    }
};

void check_pair_indices(const PairCorpus& corpus, const std::vector<std::size_t>& pair_indices) {
    if (pair_indices.empty()) throw ValidationError("train: no pairs given");
    for (const std::size_t idx : pair_indices) {
        if (idx >= corpus.pairs.size()) {
            throw ValidationError("train: pair index " + std::to_string(idx) + " out of range");
        }
    }
}

// Scatters dq rows back into the embedding table with SGD. Each snippet
// contributes 1/|tokens| of its pooled gradient to every token row it uses.
class SparseTableUpdate {
public:
    SparseTableUpdate(Eigen::Index rows, Eigen::Index cols)
        : grad_(rows, cols), is_touched_(static_cast<std::size_t>(rows), 0) {}

    void add(const std::vector<std::size_t>& rows, const Eigen::RowVectorXd& dq) {
        if (rows.empty()) return;
        const double coef = 1.0 / static_cast<double>(rows.size());
        for (const std::size_t r : rows) {
            if (is_touched_[r] == 0) {
                is_touched_[r] = 1;
                touched_.push_back(r);
                grad_.row(static_cast<Eigen::Index>(r)).setZero();
            }
            grad_.row(static_cast<Eigen::Index>(r)) += coef * dq;
        }
    }

    void apply(Eigen::MatrixXd& table, double learning_rate) {
        for (const std::size_t r : touched_) {
            table.row(static_cast<Eigen::Index>(r)) -=
                learning_rate * grad_.row(static_cast<Eigen::Index>(r));
            is_touched_[r] = 0;
        }
        touched_.clear();
    }

private:
    Eigen::MatrixXd grad_;
    std::vector<char> is_touched_;
    std::vector<std::size_t> touched_;
};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

TrainTrace train_contrastive(ContrastiveModel& model, const PairCorpus& corpus,
                             const std::vector<std::size_t>& pair_indices) {
    const ContrastiveConfig& cfg = model.config;
    cfg.validate();
    check_pair_indices(corpus, pair_indices);
    const int d = model.encoder.dim();
    if (model.head.kind == ProjectionKind::batchnorm && model.head.dim() != d) {
        throw ValidationError("train: projection dimension does not match encoder");
    }
    const EncodeCache cache = EncodeCache::build(model.encoder, corpus, pair_indices);
    SparseTableUpdate table_update(
        cache.trainable ? model.encoder.embedding().table.rows() : 0, d);

    std::vector<std::size_t> order = pair_indices;
    Rng rng(cfg.seed);
    TrainTrace trace;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t nb = std::min(cfg.batch_size, order.size() - start);
            const Eigen::Index n = static_cast<Eigen::Index>(nb);
            Eigen::MatrixXd q(2 * n, d);
            std::vector<int> y(nb);
            for (std::size_t i = 0; i < nb; ++i) {
                const LabeledPair& pair = corpus.pairs[order[start + i]];
                q.row(static_cast<Eigen::Index>(i)) = cache.encode(model.encoder, pair.left);
                q.row(n + static_cast<Eigen::Index>(i)) = cache.encode(model.encoder, pair.right);
                y[i] = pair.label;
            }
            ProjectionHead::Cache head_cache;
            const Eigen::MatrixXd r2 = model.head.forward(q, RunMode::train, &head_cache);
            const Eigen::MatrixXd r = r2.topRows(n);
            const Eigen::MatrixXd rp = r2.bottomRows(n);
            const double loss = contrastive_loss(r, rp, y, cfg.margin);
            if (!std::isfinite(loss)) {
                throw DivergenceError("train: non-finite loss at epoch " + std::to_string(epoch));
            }
            loss_sum += loss;
            ++batches;

            Eigen::MatrixXd dr, drp;
            contrastive_loss_grad(r, rp, y, cfg.margin, dr, drp);
            Eigen::MatrixXd dr2(2 * n, d);
            dr2.topRows(n) = dr;
            dr2.bottomRows(n) = drp;
            Eigen::VectorXd dgamma = Eigen::VectorXd::Zero(d);
            Eigen::VectorXd dbeta = Eigen::VectorXd::Zero(d);
            const Eigen::MatrixXd dq = model.head.backward(dr2, head_cache, dgamma, dbeta);
            if (model.head.kind == ProjectionKind::batchnorm) {
                model.head.gamma -= cfg.learning_rate * dgamma;
                model.head.beta -= cfg.learning_rate * dbeta;
            }
            if (cache.trainable) {
                for (std::size_t i = 0; i < nb; ++i) {
                    const LabeledPair& pair = corpus.pairs[order[start + i]];
                    table_update.add(cache.rows.at(pair.left),
                                     dq.row(static_cast<Eigen::Index>(i)));
                    table_update.add(cache.rows.at(pair.right),
                                     dq.row(n + static_cast<Eigen::Index>(i)));
                }
                table_update.apply(model.encoder.embedding().table, cfg.learning_rate);
            }
        }
        trace.epoch_mean_loss.push_back(batches > 0 ? loss_sum / static_cast<double>(batches)
                                                    : 0.0);
    }
    return trace;
}

TrainTrace train_baseline(BaselineModel& model, const PairCorpus& corpus,
                          const std::vector<std::size_t>& pair_indices) {
    const ContrastiveConfig& cfg = model.config;
    cfg.validate();
    check_pair_indices(corpus, pair_indices);
    const int d = model.encoder.dim();
    if (model.w.size() != d) {
        model.w = Eigen::VectorXd::Zero(d);
        model.b = 0.0;
    }
    const EncodeCache cache = EncodeCache::build(model.encoder, corpus, pair_indices);
    SparseTableUpdate table_update(
        cache.trainable ? model.encoder.embedding().table.rows() : 0, d);

    std::vector<std::size_t> order = pair_indices;
    Rng rng(cfg.seed);
    TrainTrace trace;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t nb = std::min(cfg.batch_size, order.size() - start);
            const double scale = 1.0 / static_cast<double>(nb);
            double loss = 0.0;
            Eigen::VectorXd dw = Eigen::VectorXd::Zero(d);
            double db = 0.0;
            for (std::size_t i = 0; i < nb; ++i) {
                const LabeledPair& pair = corpus.pairs[order[start + i]];
                const Eigen::VectorXd q = cache.encode(model.encoder, pair.left);
                const Eigen::VectorXd qp = cache.encode(model.encoder, pair.right);
                const Eigen::VectorXd diff = q - qp;
                const Eigen::VectorXd z = diff.cwiseAbs();
                const double p = sigmoid(model.w.dot(z) + model.b);
                const double yi = static_cast<double>(pair.label);
                // Clamped log keeps the loss finite at saturated probabilities.
                const double p_safe = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
                loss += -(yi * std::log(p_safe) + (1.0 - yi) * std::log(1.0 - p_safe));
                const double dlogit = scale * (p - yi);
                dw += dlogit * z;
                db += dlogit;
                if (cache.trainable) {
                    // d|z|/dq is the sign of q - q', with sign(0) taken as 0.
                    const Eigen::VectorXd sign =
                        diff.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
                    const Eigen::RowVectorXd dq =
                        (dlogit * model.w.cwiseProduct(sign)).transpose();
                    table_update.add(cache.rows.at(pair.left), dq);
                    table_update.add(cache.rows.at(pair.right), -dq);
                }
            }
            loss *= scale;
            if (!std::isfinite(loss)) {
                throw DivergenceError("train: non-finite loss at epoch " + std::to_string(epoch));
            }
            loss_sum += loss;
            ++batches;
            model.w -= cfg.learning_rate * dw;
            model.b -= cfg.learning_rate * db;
            if (cache.trainable) {
                table_update.apply(model.encoder.embedding().table, cfg.learning_rate);
            }
        }
        trace.epoch_mean_loss.push_back(batches > 0 ? loss_sum / static_cast<double>(batches)
                                                    : 0.0);
    }
    return trace;
}

Prediction predict(const ContrastiveModel& model, const CodeSnippet& left,
                   const CodeSnippet& right) {
    const int d = model.encoder.dim();
    Eigen::MatrixXd q(2, d);
    q.row(0) = model.encoder.encode(left);
    q.row(1) = model.encoder.encode(right);
    // Inference normalises with running statistics, so projecting the two
    // rows jointly or separately is equivalent.
    const Eigen::MatrixXd r = model.head.infer(q);
    Prediction out;
    if (r.row(0).norm() == 0.0 || r.row(1).norm() == 0.0) {
        out.degenerate = true;
        out.score = 0.0;
        out.is_clone = false;
        return out;
    }
    out.score = cosine_similarity(r.row(0).transpose(), r.row(1).transpose());
    out.is_clone = out.score >= model.config.tau;
    return out;
}

Prediction predict(const BaselineModel& model, const CodeSnippet& left,
                   const CodeSnippet& right) {
    if (model.w.size() != model.encoder.dim()) {
        throw ValidationError("predict: baseline classifier is untrained");
    }
    const Eigen::VectorXd z =
        (model.encoder.encode(left) - model.encoder.encode(right)).cwiseAbs();
    Prediction out;
    out.score = sigmoid(model.w.dot(z) + model.b);
    out.is_clone = out.score >= 0.5;
    return out;
}

namespace {

template <typename Model>
std::pair<std::vector<int>, std::vector<int>> predict_pairs_impl(
    const Model& model, const PairCorpus& corpus,
    const std::vector<std::size_t>& pair_indices) {
    check_pair_indices(corpus, pair_indices);
    std::vector<int> preds;
    std::vector<int> labels;
    preds.reserve(pair_indices.size());
    labels.reserve(pair_indices.size());
    for (const std::size_t idx : pair_indices) {
        const LabeledPair& pair = corpus.pairs[idx];
        const Prediction p = predict(model, corpus.snippet(pair.left), corpus.snippet(pair.right));
        preds.push_back(p.is_clone ? 1 : 0);
        labels.push_back(pair.label);
    }
    return {std::move(preds), std::move(labels)};
}

} // namespace

std::pair<std::vector<int>, std::vector<int>> predict_pairs(
    const ContrastiveModel& model, const PairCorpus& corpus,
    const std::vector<std::size_t>& pair_indices) {
    return predict_pairs_impl(model, corpus, pair_indices);
}

std::pair<std::vector<int>, std::vector<int>> predict_pairs(
    const BaselineModel& model, const PairCorpus& corpus,
    const std::vector<std::size_t>& pair_indices) {
    return predict_pairs_impl(model, corpus, pair_indices);
}

GridResult grid_search(const PairCorpus& corpus, const std::vector<std::size_t>& train_indices,
                       const std::vector<std::size_t>& val_indices,
                       const std::vector<double>& margins,
                       const std::vector<ProjectionKind>& kinds,
                       const EncoderConfig& encoder_cfg, const ContrastiveConfig& base_cfg) {
    if (margins.empty() || kinds.empty()) throw ValidationError("grid: empty grid");
    check_pair_indices(corpus, train_indices);
    check_pair_indices(corpus, val_indices);

    // Cell order encodes the tie-break: margins ascending, identity before
    // batchnorm; the first strict maximum of F1 wins.
    std::vector<double> sorted_margins = margins;
    std::sort(sorted_margins.begin(), sorted_margins.end());
    std::vector<ProjectionKind> sorted_kinds = kinds;
    std::sort(sorted_kinds.begin(), sorted_kinds.end(), [](ProjectionKind a, ProjectionKind b) {
        return static_cast<int>(a) < static_cast<int>(b);
    });

    // Training snippets: everything referenced by a training pair, in corpus
    // order, so every cell builds the identical vocabulary and initial table.
    const std::vector<CodeSnippet> train_snippets = snippets_for_pairs(corpus, train_indices);

    GridResult result;
    for (const double margin : sorted_margins) {
        for (const ProjectionKind kind : sorted_kinds) {
            ContrastiveModel model;
            model.config = base_cfg;
            model.config.margin = margin;
            model.encoder = Encoder(EmbeddingEncoder::build(train_snippets, encoder_cfg));
            model.head = kind == ProjectionKind::identity
                             ? ProjectionHead::identity()
                             : ProjectionHead::batchnorm(encoder_cfg.dim);
            train_contrastive(model, corpus, train_indices);
            const auto [preds, labels] = predict_pairs(model, corpus, val_indices);
            GridCell cell;
            cell.margin = margin;
            cell.kind = kind;
            cell.metrics = compute_metrics(preds, labels);
            if (!result.cells.empty() && cell.metrics.f1 > result.cells[result.best].metrics.f1) {
                result.best = result.cells.size();
            }
            result.cells.push_back(cell);
        }
    }
    return result;
}

} // namespace crossclone

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "crossclone/contrastive.hpp"
#include "crossclone/corpus.hpp"
#include "crossclone/errors.hpp"
#include "crossclone/rng.hpp"

using namespace crossclone;

namespace {

Eigen::MatrixXd random_batch(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(rows, cols);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
    return x;
}

std::vector<int> random_labels(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng.below(2));
    return y;
}

} // namespace

TEST_CASE("cosine similarity on worked examples") {
    Eigen::Vector3d a(1, 0, 0), b(0, 1, 0);
    CHECK(cosine_similarity(a, b) == doctest::Approx(0.0));
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0));
    Eigen::Vector2d c(1, 1), d(1, 0);
    CHECK(cosine_similarity(c, d) == doctest::Approx(1.0 / std::sqrt(2.0)));
    Eigen::Vector2d e(1, 2), f(-1, -2);
    CHECK(cosine_similarity(e, f) == doctest::Approx(-1.0));
    Eigen::Vector2d zero(0, 0);
    CHECK(cosine_similarity(zero, d) == 0.0);
}

TEST_CASE("cosine similarity is invariant to positive scaling") {
    Rng rng(21);
    for (int t = 0; t < 1000; ++t) {
        Eigen::VectorXd a(4), b(4);
        for (int j = 0; j < 4; ++j) {
            a(j) = rng.normal();
            b(j) = rng.normal();
        }
        const double s1 = 0.001 + 10.0 * rng.real01();
        const double s2 = 0.001 + 10.0 * rng.real01();
        const double base = cosine_similarity(a, b);
        const double scaled = cosine_similarity((s1 * a).eval(), (s2 * b).eval());
        CHECK(scaled == doctest::Approx(base).epsilon(1e-9));
        CHECK(base >= -1.0 - 1e-12);
        CHECK(base <= 1.0 + 1e-12);
    }
}

TEST_CASE("loss is zero for coincident clones and distant non-clones") {
    Eigen::MatrixXd r(2, 3), rp(2, 3);
    r << 1, 2, 3, /**/ 4, 5, 6;
    rp << 1, 2, 3, /**/ -4, -5, -6;
    // Pair 0: clone at distance 0. Pair 1: non-clone far outside margin 0.5.
    CHECK(contrastive_loss(r, rp, {1, 0}, 0.5) == 0.0);
}

TEST_CASE("loss matches hand-computed values") {
    // Clone at distance 1 with N=2: 1/(2*2) * 1^2 = 0.25; the second pair is
    // a coincident non-clone: 1/(2*2) * max(0, 0.5 - 0)^2 = 0.0625.
    Eigen::MatrixXd r(2, 2), rp(2, 2);
    r << 0, 0, /**/ 1, 1;
    rp << 1, 0, /**/ 1, 1;
    CHECK(contrastive_loss(r, rp, {1, 0}, 0.5) == doctest::Approx(0.25 + 0.0625));

    // One clone pair at distance 1, N=1: 1/2 * 1 = 0.5.
    Eigen::MatrixXd r1(1, 2), rp1(1, 2);
    r1 << 0, 0;
    rp1 << 0, 1;
    CHECK(contrastive_loss(r1, rp1, {1}, 0.5) == doctest::Approx(0.5));

    // One non-clone pair at distance 0, margin 0.5, N=1: 1/2 * 0.25 = 0.125.
    CHECK(contrastive_loss(r1, r1, {0}, 0.5) == doctest::Approx(0.125));
}

TEST_CASE("loss validates shapes and labels") {
    const Eigen::MatrixXd r = random_batch(3, 2, 1);
    const Eigen::MatrixXd rp = random_batch(3, 2, 2);
    const Eigen::MatrixXd bad = random_batch(2, 2, 3);
    CHECK_THROWS_AS((void)contrastive_loss(r, bad, {1, 0, 1}, 0.5), ValidationError);
    CHECK_THROWS_AS((void)contrastive_loss(r, rp, {1, 0}, 0.5), ValidationError);
    CHECK_THROWS_AS((void)contrastive_loss(r, rp, {1, 0, 2}, 0.5), ValidationError);
    CHECK_THROWS_AS((void)contrastive_loss(r, rp, {1, 0, 1}, -1.0), ValidationError);
    const Eigen::MatrixXd empty(0, 2);
    CHECK_THROWS_AS((void)contrastive_loss(empty, empty, {}, 0.5), ValidationError);
}

TEST_CASE("analytic pair gradients match central finite differences") {
    const double h = 1e-6;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t n = 4 + seed % 3;
        Eigen::MatrixXd r = random_batch(n, 3, 100 + seed);
        Eigen::MatrixXd rp = random_batch(n, 3, 200 + seed);
        const std::vector<int> y = random_labels(n, 300 + seed);
        // Margins both above and below typical distances exercise the hinge.
        const double margin = (seed % 2 == 0) ? 0.5 : 5.0;

        Eigen::MatrixXd dr, drp;
        contrastive_loss_grad(r, rp, y, margin, dr, drp);

        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
            for (Eigen::Index j = 0; j < 3; ++j) {
                Eigen::MatrixXd p = r, m = r;
                p(i, j) += h;
                m(i, j) -= h;
                const double num =
                    (contrastive_loss(p, rp, y, margin) - contrastive_loss(m, rp, y, margin)) /
                    (2.0 * h);
                CHECK(dr(i, j) == doctest::Approx(num).epsilon(1e-4));

                Eigen::MatrixXd pp = rp, mm = rp;
                pp(i, j) += h;
                mm(i, j) -= h;
                const double nump =
                    (contrastive_loss(r, pp, y, margin) - contrastive_loss(r, mm, y, margin)) /
                    (2.0 * h);
                CHECK(drp(i, j) == doctest::Approx(nump).epsilon(1e-4));
            }
        }
    }
}

TEST_CASE("non-clone gradient is zero outside the margin and at distance zero") {
    Eigen::MatrixXd r(2, 2), rp(2, 2);
    r << 0, 0, /**/ 1, 1;
    rp << 5, 5, /**/ 1, 1; // pair 0 far outside margin, pair 1 coincident
    Eigen::MatrixXd dr, drp;
    contrastive_loss_grad(r, rp, {0, 0}, 0.5, dr, drp);
    CHECK(dr.norm() == 0.0);
    CHECK(drp.norm() == 0.0);
}

TEST_CASE("training reduces the loss on a separable corpus") {
    const PairCorpus corpus = synthesize_corpus(4, 12, 0.8, 3);
    std::vector<std::size_t> all(corpus.pairs.size());
    std::iota(all.begin(), all.end(), std::size_t{0});

    EncoderConfig ecfg;
    ecfg.dim = 32;
    ecfg.seed = 3;
    ContrastiveModel model;
    model.config.epochs = 10;
    model.config.seed = 3;
    model.encoder = Encoder(EmbeddingEncoder::build(snippets_for_pairs(corpus, all), ecfg));
    model.head = ProjectionHead::batchnorm(32);

    const TrainTrace trace = train_contrastive(model, corpus, all);
    REQUIRE(trace.epoch_mean_loss.size() == 10);
    CHECK(trace.epoch_mean_loss.back() < 0.5 * trace.epoch_mean_loss.front());

    const auto [pred, labels] = predict_pairs(model, corpus, all);
    const MetricsTuple m = compute_metrics(pred, labels);
    CHECK(m.f1 > 0.8);
}

TEST_CASE("training is deterministic in the seed") {
    const PairCorpus corpus = synthesize_corpus(3, 8, 0.8, 5);
    std::vector<std::size_t> all(corpus.pairs.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    EncoderConfig ecfg;
    ecfg.dim = 16;
    ecfg.seed = 9;

    auto build = [&]() {
        ContrastiveModel model;
        model.config.epochs = 4;
        model.config.seed = 9;
        model.encoder = Encoder(EmbeddingEncoder::build(snippets_for_pairs(corpus, all), ecfg));
        model.head = ProjectionHead::batchnorm(16);
        train_contrastive(model, corpus, all);
        return model;
    };
    const ContrastiveModel m1 = build();
    const ContrastiveModel m2 = build();
    CHECK((m1.encoder.embedding().table - m2.encoder.embedding().table).norm() == 0.0);
    CHECK((m1.head.gamma - m2.head.gamma).norm() == 0.0);
    CHECK((m1.head.running_mean - m2.head.running_mean).norm() == 0.0);
}

TEST_CASE("an absurd learning rate raises a divergence error") {
    const PairCorpus corpus = synthesize_corpus(2, 8, 0.8, 1);
    std::vector<std::size_t> all(corpus.pairs.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    EncoderConfig ecfg;
    ecfg.dim = 8;
    ContrastiveModel model;
    model.config.learning_rate = 1e18;
    model.config.epochs = 50;
    // With the identity head the clone term overshoots by ~lr each step, so
    // the distances square their magnitude every epoch until they overflow.
    model.encoder = Encoder(EmbeddingEncoder::build(snippets_for_pairs(corpus, all), ecfg));
    model.head = ProjectionHead::identity();
    CHECK_THROWS_AS((void)train_contrastive(model, corpus, all), DivergenceError);
}

TEST_CASE("prediction thresholds cosine at tau and flags degenerate vectors") {
    const PairCorpus corpus = synthesize_corpus(2, 6, 0.8, 7);
    std::vector<std::size_t> all(corpus.pairs.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    EncoderConfig ecfg;
    ecfg.dim = 8;
    ContrastiveModel model;
    model.config.epochs = 3;
    model.encoder = Encoder(EmbeddingEncoder::build(snippets_for_pairs(corpus, all), ecfg));
    model.head = ProjectionHead::identity();
    train_contrastive(model, corpus, all);

    const auto& l = corpus.snippet(corpus.pairs[0].left);
    const auto& r = corpus.snippet(corpus.pairs[0].right);
    const Prediction p = predict(model, l, r);
    CHECK(p.is_clone == (p.score >= model.config.tau));
    CHECK(!p.degenerate);

    // A snippet with no tokens encodes to the zero vector; under the identity
    // head it stays zero, which forces score 0 and the degenerate flag.
    CodeSnippet blank{"blank", "/* only a comment */", "A", "c"};
    const Prediction pd = predict(model, blank, r);
    CHECK(pd.degenerate);
    CHECK(pd.score == 0.0);
    CHECK(!pd.is_clone);
}

TEST_CASE("baseline trains to a usable classifier and validates before predict") {
    const PairCorpus corpus = synthesize_corpus(3, 12, 0.8, 11);
    std::vector<std::size_t> all(corpus.pairs.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    EncoderConfig ecfg;
    ecfg.dim = 16;
    ecfg.seed = 11;

    BaselineModel model;
    model.config.epochs = 60;
    model.config.learning_rate = 0.5;
    model.config.seed = 11;
    model.encoder = Encoder(EmbeddingEncoder::build(snippets_for_pairs(corpus, all), ecfg));

    BaselineModel untrained = model;
    const auto& l = corpus.snippet(corpus.pairs[0].left);
    const auto& r = corpus.snippet(corpus.pairs[0].right);
    CHECK_THROWS_AS((void)predict(untrained, l, r), ValidationError);

    train_baseline(model, corpus, all);
    const auto [pred, labels] = predict_pairs(model, corpus, all);
    const MetricsTuple m = compute_metrics(pred, labels);
    CHECK(m.accuracy > 0.7);

    const Prediction p = predict(model, l, r);
    CHECK(p.score >= 0.0);
    CHECK(p.score <= 1.0);
    CHECK(p.is_clone == (p.score >= 0.5));
}

TEST_CASE("grid search ranks by validation F1 with deterministic tie-breaks") {
    const PairCorpus corpus = synthesize_corpus(3, 14, 0.8, 13);
    std::vector<std::size_t> train, val;
    for (std::size_t i = 0; i < corpus.pairs.size(); ++i)
        (i % 4 == 0 ? val : train).push_back(i);

    EncoderConfig ecfg;
    ecfg.dim = 16;
    ecfg.seed = 13;
    ContrastiveConfig cfg;
    cfg.epochs = 4;
    cfg.seed = 13;

    const std::vector<double> margins{0.5, 5.0};
    const std::vector<ProjectionKind> kinds{ProjectionKind::identity,
                                            ProjectionKind::batchnorm};
    const GridResult grid = grid_search(corpus, train, val, margins, kinds, ecfg, cfg);
    REQUIRE(grid.cells.size() == 4);
    // Cells enumerate margins ascending, identity before batchnorm.
    CHECK(grid.cells[0].margin == 0.5);
    CHECK(grid.cells[0].kind == ProjectionKind::identity);
    CHECK(grid.cells[1].margin == 0.5);
    CHECK(grid.cells[1].kind == ProjectionKind::batchnorm);
    CHECK(grid.cells[2].margin == 5.0);
    // The winner is the first cell attaining the maximum F1.
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        if (i < grid.best) CHECK(grid.cells[i].metrics.f1 < grid.cells[grid.best].metrics.f1);
        CHECK(grid.cells[i].metrics.f1 <= grid.cells[grid.best].metrics.f1);
    }

    // Determinism: the same inputs reproduce the same table.
    const GridResult again = grid_search(corpus, train, val, margins, kinds, ecfg, cfg);
    CHECK(again.best == grid.best);
    for (std::size_t i = 0; i < grid.cells.size(); ++i)
        CHECK(again.cells[i].metrics.f1 == grid.cells[i].metrics.f1);
}

TEST_CASE("config validation rejects nonsense settings") {
    ContrastiveConfig cfg;
    cfg.margin = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = ContrastiveConfig{};
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = ContrastiveConfig{};
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = ContrastiveConfig{};
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = ContrastiveConfig{};
    cfg.tau = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

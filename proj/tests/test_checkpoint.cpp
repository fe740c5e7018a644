#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include "crossclone/checkpoint.hpp"
#include "crossclone/contrastive.hpp"
#include "crossclone/corpus.hpp"
#include "crossclone/errors.hpp"

using namespace crossclone;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) { return fs::temp_directory_path() / name; }

ContrastiveModel trained_contrastive(const PairCorpus& corpus, ProjectionKind kind) {
    std::vector<std::size_t> all(corpus.pairs.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    EncoderConfig ecfg;
    ecfg.dim = 12;
    ecfg.seed = 4;
    ContrastiveModel model;
    model.config.epochs = 4;
    model.config.seed = 4;
    model.encoder = Encoder(EmbeddingEncoder::build(snippets_for_pairs(corpus, all), ecfg));
    model.head =
        kind == ProjectionKind::identity ? ProjectionHead::identity() : ProjectionHead::batchnorm(12);
    train_contrastive(model, corpus, all);
    return model;
}

} // namespace

TEST_CASE("contrastive checkpoints restore predictions bit-exactly") {
    const PairCorpus corpus = synthesize_corpus(3, 10, 0.8, 17);
    for (const ProjectionKind kind : {ProjectionKind::identity, ProjectionKind::batchnorm}) {
        const ContrastiveModel model = trained_contrastive(corpus, kind);
        const fs::path path = temp_file("crossclone-ckpt-cl.json");
        save_checkpoint(model, path);
        CHECK(peek_checkpoint_variant(path) == ModelVariant::contrastive);
        const ContrastiveModel back = load_contrastive_checkpoint(path);

        CHECK(back.config.margin == model.config.margin);
        CHECK(back.config.seed == model.config.seed);
        CHECK(back.head.kind == model.head.kind);
        CHECK((back.encoder.embedding().table - model.encoder.embedding().table).norm() == 0.0);
        CHECK(back.encoder.embedding().vocab.tokens() == model.encoder.embedding().vocab.tokens());

        for (const auto& pair : corpus.pairs) {
            const auto& l = corpus.snippet(pair.left);
            const auto& r = corpus.snippet(pair.right);
            const Prediction a = predict(model, l, r);
            const Prediction b = predict(back, l, r);
            CHECK(a.score == b.score); // bit-exact, not approximate
            CHECK(a.is_clone == b.is_clone);
        }
        fs::remove(path);
    }
}

TEST_CASE("baseline checkpoints restore the classifier bit-exactly") {
    const PairCorpus corpus = synthesize_corpus(2, 10, 0.8, 19);
    std::vector<std::size_t> all(corpus.pairs.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    EncoderConfig ecfg;
    ecfg.dim = 10;
    BaselineModel model;
    model.config.epochs = 8;
    model.encoder = Encoder(EmbeddingEncoder::build(snippets_for_pairs(corpus, all), ecfg));
    train_baseline(model, corpus, all);

    const fs::path path = temp_file("crossclone-ckpt-base.json");
    save_checkpoint(model, path);
    CHECK(peek_checkpoint_variant(path) == ModelVariant::baseline);
    const BaselineModel back = load_baseline_checkpoint(path);
    CHECK(back.b == model.b);
    CHECK((back.w - model.w).norm() == 0.0);
    for (const auto& pair : corpus.pairs) {
        const Prediction a = predict(model, corpus.snippet(pair.left), corpus.snippet(pair.right));
        const Prediction b = predict(back, corpus.snippet(pair.left), corpus.snippet(pair.right));
        CHECK(a.score == b.score);
    }
    fs::remove(path);
}

TEST_CASE("imported-encoder models survive the round trip") {
    ImportedEncoder imp;
    imp.dimension = 3;
    imp.vectors["s1"] = Eigen::Vector3d(0.25, -1.5, 3.0);
    imp.vectors["s2"] = Eigen::Vector3d(1.0 / 3.0, 0.1, -0.7); // non-representable decimals
    ContrastiveModel model;
    model.encoder = Encoder(std::move(imp));
    model.head = ProjectionHead::batchnorm(3);
    model.head.running_mean << 0.1, 0.2, 0.3;
    model.head.running_var << 1.5, 2.5, 0.5;

    const fs::path path = temp_file("crossclone-ckpt-imported.json");
    save_checkpoint(model, path);
    const ContrastiveModel back = load_contrastive_checkpoint(path);
    CHECK(!back.encoder.trainable());
    CHECK(back.encoder.imported().dimension == 3);
    CHECK((back.encoder.imported().vectors.at("s2") - model.encoder.imported().vectors.at("s2"))
              .norm() == 0.0);
    CHECK((back.head.running_var - model.head.running_var).norm() == 0.0);
    fs::remove(path);
}

TEST_CASE("loaders reject the wrong variant and malformed documents") {
    const PairCorpus corpus = synthesize_corpus(2, 6, 0.8, 23);
    const ContrastiveModel model = trained_contrastive(corpus, ProjectionKind::identity);
    const fs::path path = temp_file("crossclone-ckpt-wrong.json");
    save_checkpoint(model, path);
    CHECK_THROWS_AS((void)load_baseline_checkpoint(path), DataError);
    fs::remove(path);

    const fs::path bad = temp_file("crossclone-ckpt-bad.json");
    {
        std::ofstream f(bad, std::ios::binary);
        f << "{\"format\": \"something else\"}\n";
    }
    CHECK_THROWS_AS((void)load_contrastive_checkpoint(bad), DataError);
    CHECK_THROWS_AS((void)peek_checkpoint_variant(bad), DataError);
    fs::remove(bad);

    const fs::path garbage = temp_file("crossclone-ckpt-garbage.json");
    {
        std::ofstream f(garbage, std::ios::binary);
        f << "not json at all";
    }
    CHECK_THROWS_AS((void)load_contrastive_checkpoint(garbage), DataError);
    CHECK_THROWS_AS((void)load_contrastive_checkpoint(temp_file("missing-ckpt.json")), DataError);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "crossclone/encoder.hpp"
#include "crossclone/errors.hpp"
#include "crossclone/rng.hpp"

using namespace crossclone;
namespace fs = std::filesystem;

namespace {

CodeSnippet snip(std::string id, std::string code) {
    return CodeSnippet{std::move(id), std::move(code), "A", "c"};
}

fs::path write_vectors(const std::string& name, const std::string& body) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream f(p, std::ios::binary);
    f << body;
    return p;
}

} // namespace

TEST_CASE("vocabulary orders tokens by frequency then name") {
    const std::vector<std::vector<std::string>> seqs{
        {"b", "a", "b"}, {"a", "c", "b"}, {"c", "d"}};
    // counts: b=3, a=2, c=2, d=1
    const Vocabulary v = Vocabulary::build(seqs, 1, 4);
    REQUIRE(v.size() == 4);
    CHECK(v.tokens() == std::vector<std::string>{"b", "a", "c", "d"});
    CHECK(v.index_of("b") == 0);
    CHECK(v.index_of("a") == 1);
    CHECK(v.index_of("c") == 2);
    CHECK(v.index_of("d") == 3);
    CHECK(v.row_count() == 8);
}

TEST_CASE("vocabulary drops tokens under the frequency floor") {
    const std::vector<std::vector<std::string>> seqs{{"x", "x", "y"}};
    const Vocabulary v = Vocabulary::build(seqs, 2, 2);
    CHECK(v.size() == 1);
    CHECK(v.contains("x"));
    CHECK(!v.contains("y"));
}

TEST_CASE("out-of-vocabulary tokens hash stably into the bucket range") {
    const Vocabulary v = Vocabulary::build({{"x"}}, 1, 16);
    const std::size_t i1 = v.index_of("never-seen-token");
    const std::size_t i2 = v.index_of("never-seen-token");
    CHECK(i1 == i2);
    CHECK(i1 >= v.size());
    CHECK(i1 < v.row_count());
    CHECK(i1 == v.size() + fnv1a64("never-seen-token") % 16);
}

TEST_CASE("vocabulary reload rejects duplicate tokens") {
    CHECK_THROWS_AS((void)Vocabulary::from_tokens({"a", "b", "a"}, 4), DataError);
    const Vocabulary v = Vocabulary::from_tokens({"a", "b"}, 4);
    CHECK(v.index_of("a") == 0);
    CHECK(v.index_of("b") == 1);
}

TEST_CASE("embedding encoder averages token rows") {
    EncoderConfig cfg;
    cfg.dim = 8;
    cfg.oov_buckets = 4;
    cfg.seed = 11;
    const std::vector<CodeSnippet> train{snip("s1", "alpha beta"), snip("s2", "alpha gamma")};
    const EmbeddingEncoder enc = EmbeddingEncoder::build(train, cfg);
    CHECK(enc.dim() == 8);
    CHECK(enc.vocab.size() == 3); // alpha, beta, gamma
    CHECK(enc.table.rows() == 3 + 4);

    const auto rows = enc.token_rows("beta alpha");
    REQUIRE(rows.size() == 2);
    const Eigen::VectorXd expected =
        (enc.table.row(rows[0]) + enc.table.row(rows[1])).transpose() / 2.0;
    const Eigen::VectorXd got = enc.encode("beta alpha");
    CHECK((expected - got).norm() == doctest::Approx(0.0));
}

TEST_CASE("an empty snippet encodes to the zero vector") {
    EncoderConfig cfg;
    cfg.dim = 6;
    const EmbeddingEncoder enc = EmbeddingEncoder::build({snip("s1", "x y")}, cfg);
    const Eigen::VectorXd z = enc.encode("   /* nothing but a comment */  ");
    CHECK(z.size() == 6);
    CHECK(z.norm() == 0.0);
}

TEST_CASE("table init is seed-deterministic with the configured scale") {
    EncoderConfig cfg;
    cfg.dim = 16;
    cfg.seed = 5;
    const std::vector<CodeSnippet> train{snip("s1", "a b c d e f g h")};
    const EmbeddingEncoder e1 = EmbeddingEncoder::build(train, cfg);
    const EmbeddingEncoder e2 = EmbeddingEncoder::build(train, cfg);
    CHECK((e1.table - e2.table).norm() == 0.0);

    cfg.seed = 6;
    const EmbeddingEncoder e3 = EmbeddingEncoder::build(train, cfg);
    CHECK((e1.table - e3.table).norm() != 0.0);

    // Sample stddev of the entries should sit near init_scale.
    const double n = static_cast<double>(e1.table.size());
    const double sd = std::sqrt((e1.table.array() - e1.table.mean()).square().sum() / n);
    CHECK(sd == doctest::Approx(cfg.init_scale).epsilon(0.35));
}

TEST_CASE("encoder config is validated") {
    EncoderConfig cfg;
    cfg.dim = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = EncoderConfig{};
    cfg.oov_buckets = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = EncoderConfig{};
    cfg.init_scale = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("imported vectors load and resolve by id") {
    const fs::path p = write_vectors("crossclone-vec-ok.jsonl",
                                     R"({"id":"s1","vector":[1.0,2.0]})"
                                     "\n"
                                     R"({"id":"s2","vector":[3.5,-1.0]})"
                                     "\n");
    const ImportedEncoder enc = import_embeddings(p);
    CHECK(enc.dim() == 2);
    CHECK(enc.encode_id("s2")(0) == 3.5);
    CHECK_THROWS_AS((void)enc.encode_id("missing"), DataError);
    fs::remove(p);
}

TEST_CASE("imported vector files are validated per line") {
    SUBCASE("dimension mismatch") {
        const fs::path p = write_vectors("crossclone-vec-dim.jsonl",
                                         R"({"id":"s1","vector":[1.0,2.0]})"
                                         "\n"
                                         R"({"id":"s2","vector":[1.0]})"
                                         "\n");
        CHECK_THROWS_AS((void)import_embeddings(p), DataError);
        fs::remove(p);
    }
    SUBCASE("duplicate id") {
        const fs::path p = write_vectors("crossclone-vec-dup.jsonl",
                                         R"({"id":"s1","vector":[1.0]})"
                                         "\n"
                                         R"({"id":"s1","vector":[2.0]})"
                                         "\n");
        CHECK_THROWS_AS((void)import_embeddings(p), DataError);
        fs::remove(p);
    }
    SUBCASE("empty vector") {
        const fs::path p = write_vectors("crossclone-vec-empty.jsonl",
                                         R"({"id":"s1","vector":[]})"
                                         "\n");
        CHECK_THROWS_AS((void)import_embeddings(p), DataError);
        fs::remove(p);
    }
    SUBCASE("malformed line") {
        const fs::path p = write_vectors("crossclone-vec-bad.jsonl", "not json\n");
        CHECK_THROWS_AS((void)import_embeddings(p), DataError);
        fs::remove(p);
    }
    SUBCASE("empty file") {
        const fs::path p = write_vectors("crossclone-vec-none.jsonl", "");
        CHECK_THROWS_AS((void)import_embeddings(p), DataError);
        fs::remove(p);
    }
}

TEST_CASE("the unified encoder dispatches by kind") {
    EncoderConfig cfg;
    cfg.dim = 4;
    Encoder trained(EmbeddingEncoder::build({snip("s1", "p q")}, cfg));
    CHECK(trained.trainable());
    CHECK(trained.dim() == 4);
    const CodeSnippet s = snip("sX", "p q");
    CHECK(trained.encode(s).size() == 4);

    ImportedEncoder imp;
    imp.dimension = 3;
    imp.vectors["sX"] = Eigen::Vector3d(1, 2, 3);
    Encoder fixed(std::move(imp));
    CHECK(!fixed.trainable());
    CHECK(fixed.dim() == 3);
    CHECK(fixed.encode(s)(2) == 3.0);
    const CodeSnippet missing = snip("sY", "p q");
    CHECK_THROWS_AS((void)fixed.encode(missing), DataError);
}

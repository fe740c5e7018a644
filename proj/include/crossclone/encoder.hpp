#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "crossclone/corpus.hpp"
#include "crossclone/tokenizer.hpp"
#include "crossclone/vocabulary.hpp"

namespace crossclone {

// Settings for building a trainable embedding encoder.
struct EncoderConfig {
    int dim = 128;
    std::size_t min_frequency = 1;
    std::size_t oov_buckets = 16;
    TokenizerConfig tokenizer;
    double init_scale = 0.1; // stddev of the Gaussian embedding init
    std::uint64_t seed = 0;

    void validate() const;
};

// Mean-of-token-embeddings encoder. The table has one row per vocabulary
// entry plus the OOV buckets; encode() averages the rows of a snippet's
// tokens and returns the zero vector when the snippet has no tokens.
struct EmbeddingEncoder {
    TokenizerConfig tokenizer;
    Vocabulary vocab;
    Eigen::MatrixXd table; // row_count() x dim

    // Builds vocabulary and a seeded Gaussian-initialised table from
    // training snippets only.
    static EmbeddingEncoder build(const std::vector<CodeSnippet>& training_snippets,
                                  const EncoderConfig& cfg);

    int dim() const { return static_cast<int>(table.cols()); }
    std::vector<std::size_t> token_rows(const std::string& code) const;
    Eigen::VectorXd encode(const std::string& code) const;
};

// Encoder backed by precomputed vectors keyed by snippet id, e.g. exported
// from an external model. All vectors share one dimension.
struct ImportedEncoder {
    int dimension = 0;
    std::unordered_map<std::string, Eigen::VectorXd> vectors;

    int dim() const { return dimension; }
    const Eigen::VectorXd& encode_id(const std::string& id) const;
};

// Loads {"id": ..., "vector": [...]} JSONL. Rejects empty files, duplicate
// ids, empty vectors, and rows whose dimension disagrees.
ImportedEncoder import_embeddings(const std::filesystem::path& path);

// Either encoder behind one interface; models hold this.
class Encoder {
public:
    Encoder() : impl_(EmbeddingEncoder{}) {}
    explicit Encoder(EmbeddingEncoder enc) : impl_(std::move(enc)) {}
    explicit Encoder(ImportedEncoder enc) : impl_(std::move(enc)) {}

    bool trainable() const { return std::holds_alternative<EmbeddingEncoder>(impl_); }
    EmbeddingEncoder& embedding() { return std::get<EmbeddingEncoder>(impl_); }
    const EmbeddingEncoder& embedding() const { return std::get<EmbeddingEncoder>(impl_); }
    const ImportedEncoder& imported() const { return std::get<ImportedEncoder>(impl_); }

    int dim() const;
    // Embedding encoders read snippet.code; imported encoders look up
    // snippet.id and throw DataError when it is missing.
    Eigen::VectorXd encode(const CodeSnippet& snippet) const;

private:
    std::variant<EmbeddingEncoder, ImportedEncoder> impl_;
};

} // namespace crossclone

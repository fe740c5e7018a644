#include "crossclone/encoder.hpp"

#include <fstream>

#include <json.hpp>

#include "crossclone/errors.hpp"
#include "crossclone/rng.hpp"

namespace crossclone {

void EncoderConfig::validate() const {
    if (dim <= 0) throw ValidationError("encoder: dim must be positive");
    if (oov_buckets == 0) throw ValidationError("encoder: oov_buckets must be >= 1");
    if (init_scale < 0.0) throw ValidationError("encoder: init_scale must be non-negative");
}

EmbeddingEncoder EmbeddingEncoder::build(const std::vector<CodeSnippet>& training_snippets,
                                         const EncoderConfig& cfg) {
    cfg.validate();
    std::vector<std::vector<std::string>> sequences;
    sequences.reserve(training_snippets.size());
    for (const auto& snippet : training_snippets) {
        sequences.push_back(tokenize(cfg.tokenizer, snippet.code));
    }
    EmbeddingEncoder enc;
    enc.tokenizer = cfg.tokenizer;
    enc.vocab = Vocabulary::build(sequences, cfg.min_frequency, cfg.oov_buckets);
    enc.table.resize(static_cast<Eigen::Index>(enc.vocab.row_count()), cfg.dim);
    Rng rng(cfg.seed);
    for (Eigen::Index r = 0; r < enc.table.rows(); ++r) {
        for (Eigen::Index c = 0; c < enc.table.cols(); ++c) {
            enc.table(r, c) = cfg.init_scale * rng.normal();
        }
    }
    return enc;
}

std::vector<std::size_t> EmbeddingEncoder::token_rows(const std::string& code) const {
    std::vector<std::size_t> rows;
    for (const auto& token : tokenize(tokenizer, code)) {
        rows.push_back(vocab.index_of(token));
    }
    return rows;
}

Eigen::VectorXd EmbeddingEncoder::encode(const std::string& code) const {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.cols());
    const auto rows = token_rows(code);
    if (rows.empty()) return sum;
    for (const std::size_t r : rows) sum += table.row(static_cast<Eigen::Index>(r));
    return sum / static_cast<double>(rows.size());
}

const Eigen::VectorXd& ImportedEncoder::encode_id(const std::string& id) const {
    const auto it = vectors.find(id);
    if (it == vectors.end()) {
        throw DataError("imported encoder: no vector for snippet id '" + id + "'");
    }
    return it->second;
}

ImportedEncoder import_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    ImportedEncoder enc;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        nlohmann::json row = nlohmann::json::parse(line, nullptr, false);
        if (row.is_discarded() || !row.is_object()) {
            throw DataError(where + ": malformed vector line");
        }
        if (!row.contains("id") || !row["id"].is_string()) {
            throw DataError(where + ": missing string field 'id'");
        }
        if (!row.contains("vector") || !row["vector"].is_array()) {
            throw DataError(where + ": missing array field 'vector'");
        }
        const std::string id = row["id"].get<std::string>();
        const auto& values = row["vector"];
        if (values.empty()) throw DataError(where + ": empty vector for id '" + id + "'");
        Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!values[i].is_number()) throw DataError(where + ": non-numeric vector entry");
            v(static_cast<Eigen::Index>(i)) = values[i].get<double>();
        }
        if (enc.dimension == 0) {
            enc.dimension = static_cast<int>(v.size());
        } else if (static_cast<int>(v.size()) != enc.dimension) {
            throw DataError(where + ": vector for id '" + id + "' has dimension " +
                            std::to_string(v.size()) + ", expected " +
                            std::to_string(enc.dimension));
        }
        if (!enc.vectors.emplace(id, std::move(v)).second) {
            throw DataError(where + ": duplicate vector for id '" + id + "'");
        }
    }
    if (enc.vectors.empty()) throw DataError(path.string() + ": no vectors found");
    return enc;
}

int Encoder::dim() const {
    if (trainable()) return embedding().dim();
    return imported().dim();
}

Eigen::VectorXd Encoder::encode(const CodeSnippet& snippet) const {
    if (trainable()) return embedding().encode(snippet.code);
    return imported().encode_id(snippet.id);
}

} // namespace crossclone

#include "crossclone/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "crossclone/errors.hpp"

namespace crossclone {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "crossclone-checkpoint";
constexpr int kVersion = 1;

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Eigen::VectorXd vector_from_json(const json& arr, const char* what) {
    if (!arr.is_array()) throw DataError(std::string("checkpoint: ") + what + " must be an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) {
            throw DataError(std::string("checkpoint: non-numeric entry in ") + what);
        }
        v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    }
    return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

Eigen::MatrixXd matrix_from_json(const json& arr, const char* what) {
    if (!arr.is_array()) throw DataError(std::string("checkpoint: ") + what + " must be an array");
    const Eigen::Index rows = static_cast<Eigen::Index>(arr.size());
    Eigen::Index cols = 0;
    if (rows > 0) {
        if (!arr[0].is_array()) throw DataError(std::string("checkpoint: ragged ") + what);
        cols = static_cast<Eigen::Index>(arr[0].size());
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = arr[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw DataError(std::string("checkpoint: ragged ") + what);
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

json config_to_json(const ContrastiveConfig& cfg) {
    return json{{"margin", cfg.margin},
                {"tau", cfg.tau},
                {"learning_rate", cfg.learning_rate},
                {"batch_size", cfg.batch_size},
                {"epochs", cfg.epochs},
                {"seed", cfg.seed}};
}

ContrastiveConfig config_from_json(const json& j) {
    ContrastiveConfig cfg;
    cfg.margin = j.at("margin").get<double>();
    cfg.tau = j.at("tau").get<double>();
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.batch_size = j.at("batch_size").get<std::size_t>();
    cfg.epochs = j.at("epochs").get<std::size_t>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

json encoder_to_json(const Encoder& encoder) {
    json out;
    if (encoder.trainable()) {
        const EmbeddingEncoder& e = encoder.embedding();
        out["kind"] = "embedding";
        out["tokenizer"] = json{{"split_identifiers", e.tokenizer.split_identifiers},
                                {"replace_literals", e.tokenizer.replace_literals},
                                {"lowercase", e.tokenizer.lowercase}};
        out["oov_buckets"] = e.vocab.oov_buckets();
        out["tokens"] = e.vocab.tokens();
        out["table"] = matrix_to_json(e.table);
    } else {
        const ImportedEncoder& e = encoder.imported();
        out["kind"] = "imported";
        out["dim"] = e.dimension;
        json vectors = json::object();
        for (const auto& [id, v] : e.vectors) vectors[id] = vector_to_json(v);
        out["vectors"] = std::move(vectors);
    }
    return out;
}

Encoder encoder_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "embedding") {
        EmbeddingEncoder e;
        const json& tok = j.at("tokenizer");
        e.tokenizer.split_identifiers = tok.at("split_identifiers").get<bool>();
        e.tokenizer.replace_literals = tok.at("replace_literals").get<bool>();
        e.tokenizer.lowercase = tok.at("lowercase").get<bool>();
        e.vocab = Vocabulary::from_tokens(j.at("tokens").get<std::vector<std::string>>(),
                                          j.at("oov_buckets").get<std::size_t>());
        e.table = matrix_from_json(j.at("table"), "embedding table");
        if (static_cast<std::size_t>(e.table.rows()) != e.vocab.row_count()) {
            throw DataError("checkpoint: embedding table row count does not match vocabulary");
        }
        return Encoder(std::move(e));
    }
    if (kind == "imported") {
        ImportedEncoder e;
        e.dimension = j.at("dim").get<int>();
        for (const auto& [id, arr] : j.at("vectors").items()) {
            Eigen::VectorXd v = vector_from_json(arr, "imported vector");
            if (static_cast<int>(v.size()) != e.dimension) {
                throw DataError("checkpoint: imported vector dimension mismatch for id '" + id + "'");
            }
            e.vectors.emplace(id, std::move(v));
        }
        return Encoder(std::move(e));
    }
    throw DataError("checkpoint: unknown encoder kind '" + kind + "'");
}

json head_to_json(const ProjectionHead& head) {
    if (head.kind == ProjectionKind::identity) {
        return json{{"kind", "identity"}};
    }
    return json{{"kind", "batchnorm"},
                {"gamma", vector_to_json(head.gamma)},
                {"beta", vector_to_json(head.beta)},
                {"running_mean", vector_to_json(head.running_mean)},
                {"running_var", vector_to_json(head.running_var)},
                {"momentum", head.momentum},
                {"eps", head.eps}};
}

ProjectionHead head_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "identity") return ProjectionHead::identity();
    if (kind != "batchnorm") throw DataError("checkpoint: unknown projection kind '" + kind + "'");
    ProjectionHead head;
    head.kind = ProjectionKind::batchnorm;
    head.gamma = vector_from_json(j.at("gamma"), "gamma");
    head.beta = vector_from_json(j.at("beta"), "beta");
    head.running_mean = vector_from_json(j.at("running_mean"), "running_mean");
    head.running_var = vector_from_json(j.at("running_var"), "running_var");
    head.momentum = j.at("momentum").get<double>();
    head.eps = j.at("eps").get<double>();
    if (head.beta.size() != head.gamma.size() || head.running_mean.size() != head.gamma.size() ||
        head.running_var.size() != head.gamma.size()) {
        throw DataError("checkpoint: projection parameter sizes disagree");
    }
    return head;
}

void write_document(const json& doc, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw DataError("failed writing " + path.string());
}

json read_document(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw DataError(path.string() + ": not a valid checkpoint document");
    }
    if (doc.value("format", "") != kFormat) {
        throw DataError(path.string() + ": unrecognised checkpoint format");
    }
    if (doc.value("version", -1) != kVersion) {
        throw DataError(path.string() + ": unsupported checkpoint version");
    }
    return doc;
}

} // namespace

void save_checkpoint(const ContrastiveModel& model, const std::filesystem::path& path) {
    json doc{{"format", kFormat},
             {"version", kVersion},
             {"variant", "contrastive"},
             {"config", config_to_json(model.config)},
             {"encoder", encoder_to_json(model.encoder)},
             {"head", head_to_json(model.head)}};
    write_document(doc, path);
}

void save_checkpoint(const BaselineModel& model, const std::filesystem::path& path) {
    json doc{{"format", kFormat},
             {"version", kVersion},
             {"variant", "baseline"},
             {"config", config_to_json(model.config)},
             {"encoder", encoder_to_json(model.encoder)},
             {"classifier", json{{"w", vector_to_json(model.w)}, {"b", model.b}}}};
    write_document(doc, path);
}

ModelVariant peek_checkpoint_variant(const std::filesystem::path& path) {
    const json doc = read_document(path);
    const std::string variant = doc.value("variant", "");
    if (variant == "contrastive") return ModelVariant::contrastive;
    if (variant == "baseline") return ModelVariant::baseline;
    throw DataError(path.string() + ": unknown model variant '" + variant + "'");
}

ContrastiveModel load_contrastive_checkpoint(const std::filesystem::path& path) {
    const json doc = read_document(path);
    if (doc.value("variant", "") != "contrastive") {
        throw DataError(path.string() + ": not a contrastive checkpoint");
    }
    ContrastiveModel model;
    model.config = config_from_json(doc.at("config"));
    model.encoder = encoder_from_json(doc.at("encoder"));
    model.head = head_from_json(doc.at("head"));
    return model;
}

BaselineModel load_baseline_checkpoint(const std::filesystem::path& path) {
    const json doc = read_document(path);
    if (doc.value("variant", "") != "baseline") {
        throw DataError(path.string() + ": not a baseline checkpoint");
    }
    BaselineModel model;
    model.config = config_from_json(doc.at("config"));
    model.encoder = encoder_from_json(doc.at("encoder"));
    model.w = vector_from_json(doc.at("classifier").at("w"), "classifier weights");
    model.b = doc.at("classifier").at("b").get<double>();
    return model;
}

} // namespace crossclone

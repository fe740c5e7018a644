#include "crossclone/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "crossclone/errors.hpp"
#include "crossclone/rng.hpp"

namespace crossclone {

using nlohmann::json;

void PairCorpus::finalize() {
    index_.clear();
    index_.reserve(snippets.size());
    for (std::size_t i = 0; i < snippets.size(); ++i) {
        const CodeSnippet& s = snippets[i];
        if (s.id.empty()) throw DataError("corpus '" + name + "': snippet with empty id");
        if (s.code.empty()) throw DataError("corpus '" + name + "': snippet '" + s.id + "' has empty code");
        if (!index_.emplace(s.id, i).second)
            throw DataError("corpus '" + name + "': duplicate snippet id '" + s.id + "'");
    }
    for (const LabeledPair& p : pairs) {
        if (p.left == p.right)
            throw DataError("corpus '" + name + "': pair references snippet '" + p.left + "' on both sides");
        if (!index_.count(p.left))
            throw DataError("corpus '" + name + "': pair references unknown snippet id '" + p.left + "'");
        if (!index_.count(p.right))
            throw DataError("corpus '" + name + "': pair references unknown snippet id '" + p.right + "'");
        if (p.label != 0 && p.label != 1)
            throw DataError("corpus '" + name + "': pair label must be 0 or 1, got " + std::to_string(p.label));
    }
}

const CodeSnippet& PairCorpus::snippet(const std::string& id) const {
    return snippets[snippet_pos(id)];
}

std::size_t PairCorpus::snippet_pos(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end())
        throw DataError("corpus '" + name + "': unknown snippet id '" + id + "'");
    return it->second;
}

std::map<std::string, ClassCounts> functionality_histogram(const PairCorpus& corpus) {
    std::map<std::string, ClassCounts> hist;
    for (const LabeledPair& p : corpus.pairs) {
        ClassCounts& c = hist[p.functionality];
        if (p.label == 1)
            ++c.clones;
        else
            ++c.nonclones;
    }
    return hist;
}

std::vector<CodeSnippet> snippets_for_pairs(const PairCorpus& corpus,
                                            const std::vector<std::size_t>& pair_indices) {
    std::vector<char> referenced(corpus.snippets.size(), 0);
    for (const std::size_t idx : pair_indices) {
        if (idx >= corpus.pairs.size()) {
            throw ValidationError("snippets_for_pairs: pair index out of range");
        }
        referenced[corpus.snippet_pos(corpus.pairs[idx].left)] = 1;
        referenced[corpus.snippet_pos(corpus.pairs[idx].right)] = 1;
    }
    std::vector<CodeSnippet> out;
    for (std::size_t i = 0; i < corpus.snippets.size(); ++i) {
        if (referenced[i] != 0) out.push_back(corpus.snippets[i]);
    }
    return out;
}

PairCorpus sample_balanced(const PairCorpus& corpus, const SamplerConfig& cfg) {
    if (cfg.per_class_cap < 1) throw ValidationError("sampler cap must be >= 1");
    const std::size_t cap = cfg.per_class_cap;

    // Pair indices per functionality and class, in corpus order. std::map
    // fixes the iteration order so the draw sequence is reproducible.
    std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> groups;
    for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
        auto& g = groups[corpus.pairs[i].functionality];
        (corpus.pairs[i].label == 1 ? g.first : g.second).push_back(i);
    }

    Rng rng(cfg.seed);
    std::vector<std::size_t> kept;
    for (const auto& [functionality, g] : groups) {
        const auto& clones = g.first;
        const auto& nonclones = g.second;
        if (clones.size() < cap || nonclones.size() < cap) continue; // discarded
        for (const auto* cls : {&clones, &nonclones}) {
            std::vector<std::size_t> draw = rng.sample_indices(cls->size(), cap);
            std::sort(draw.begin(), draw.end());
            for (std::size_t d : draw) kept.push_back((*cls)[d]);
        }
    }
    if (kept.empty())
        throw DataError("corpus '" + corpus.name + "': no functionality has " +
                        std::to_string(cap) + " pairs of each class");

    std::sort(kept.begin(), kept.end());
    PairCorpus out;
    out.name = corpus.name + "-balanced";
    std::set<std::string> wanted_ids;
    for (std::size_t i : kept) {
        out.pairs.push_back(corpus.pairs[i]);
        wanted_ids.insert(corpus.pairs[i].left);
        wanted_ids.insert(corpus.pairs[i].right);
    }
    for (const CodeSnippet& s : corpus.snippets)
        if (wanted_ids.count(s.id)) out.snippets.push_back(s);
    out.finalize();
    return out;
}

namespace {

std::string two_digits(std::size_t k) {
    std::ostringstream os;
    if (k < 10) os << '0';
    os << k;
    return os.str();
}

// Renders a token sequence as lines of eight tokens.
std::string render_snippet(const std::vector<std::string>& tokens) {
    std::string code;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        code += tokens[i];
        code += ((i + 1) % 8 == 0 && i + 1 != tokens.size()) ? '\n' : ' ';
    }
    if (!code.empty() && code.back() == ' ') code.pop_back();
    return code;
}

} // namespace

PairCorpus synthesize_corpus(const SynthSpec& spec) {
    if (spec.n_functionalities < 1) throw ValidationError("n_functionalities must be >= 1");
    if (spec.pairs_per_functionality < 1) throw ValidationError("pairs_per_functionality must be >= 1");
    if (spec.token_overlap < 0.0 || spec.token_overlap > 1.0)
        throw ValidationError("token_overlap must be in [0, 1]");
    if (spec.snippet_tokens < 1 || spec.core_vocab < 1 || spec.shared_vocab < 1)
        throw ValidationError("snippet_tokens, core_vocab, and shared_vocab must be >= 1");

    const std::size_t n_core =
        static_cast<std::size_t>(std::llround(spec.token_overlap * static_cast<double>(spec.snippet_tokens)));

    Rng rng(spec.seed);
    PairCorpus out;
    out.name = "synthetic";

    auto make_snippet = [&](std::size_t func, std::size_t pair, char side) {
        std::vector<std::string> tokens;
        tokens.reserve(spec.snippet_tokens);
        // Token names carry no underscores or case changes so the tokenizer
        // keeps them whole.
        for (std::size_t t = 0; t < spec.snippet_tokens; ++t) {
            if (t < n_core)
                tokens.push_back("f" + std::to_string(func) + "w" + std::to_string(rng.below(spec.core_vocab)));
            else
                tokens.push_back("cw" + std::to_string(rng.below(spec.shared_vocab)));
        }
        rng.shuffle(tokens);
        CodeSnippet s;
        s.id = "fn" + two_digits(func) + "p" + std::to_string(pair) + side;
        s.code = render_snippet(tokens);
        s.functionality = "fn" + two_digits(func);
        s.language = "synthetic";
        return s;
    };

    // Clone pairs: two fresh snippets of the same functionality.
    for (std::size_t k = 0; k < spec.n_functionalities; ++k) {
        for (std::size_t i = 0; i < spec.pairs_per_functionality; ++i) {
            CodeSnippet a = make_snippet(k, i, 'a');
            CodeSnippet b = make_snippet(k, i, 'b');
            LabeledPair p{a.id, b.id, 1, a.functionality};
            out.snippets.push_back(std::move(a));
            out.snippets.push_back(std::move(b));
            out.pairs.push_back(std::move(p));
        }
    }

    // Non-clone pairs: a snippet of functionality k against a snippet drawn
    // from a different clone pair of a different functionality.
    for (std::size_t k = 0; k < spec.n_functionalities; ++k) {
        for (std::size_t i = 0; i < spec.pairs_per_functionality; ++i) {
            const std::string left_id = "fn" + two_digits(k) + "p" + std::to_string(i) + 'a';
            std::size_t other = k;
            if (spec.n_functionalities > 1) {
                other = rng.below(spec.n_functionalities - 1);
                if (other >= k) ++other;
            }
            const std::size_t j = rng.below(spec.pairs_per_functionality);
            const char side = rng.below(2) == 0 ? 'a' : 'b';
            const std::string right_id = "fn" + two_digits(other) + "p" + std::to_string(j) + side;
            out.pairs.push_back(LabeledPair{left_id, right_id, 0, "fn" + two_digits(k)});
        }
    }

    out.finalize();
    return out;
}

PairCorpus synthesize_corpus(std::size_t n_functionalities, std::size_t pairs_per_functionality,
                             double token_overlap, std::uint64_t seed) {
    SynthSpec spec;
    spec.n_functionalities = n_functionalities;
    spec.pairs_per_functionality = pairs_per_functionality;
    spec.token_overlap = token_overlap;
    spec.seed = seed;
    return synthesize_corpus(spec);
}

namespace {

json parse_line(const std::filesystem::path& file, std::size_t lineno, const std::string& line) {
    try {
        json j = json::parse(line);
        if (!j.is_object()) throw DataError("");
        return j;
    } catch (const std::exception&) {
        throw DataError(file.filename().string() + ":" + std::to_string(lineno) + ": malformed line");
    }
}

std::string require_string(const json& j, const char* key, const std::filesystem::path& file,
                           std::size_t lineno) {
    if (!j.contains(key) || !j.at(key).is_string())
        throw DataError(file.filename().string() + ":" + std::to_string(lineno) +
                        ": missing or non-string field '" + key + "'");
    return j.at(key).get<std::string>();
}

} // namespace

PairCorpus load_corpus(const std::filesystem::path& snippets_path,
                       const std::filesystem::path& pairs_path) {
    PairCorpus corpus;
    corpus.name = snippets_path.parent_path().filename().string();
    if (corpus.name.empty()) corpus.name = "corpus";

    std::ifstream sf(snippets_path);
    if (!sf) throw DataError("cannot open " + snippets_path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(sf, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = parse_line(snippets_path, lineno, line);
        CodeSnippet s;
        s.id = require_string(j, "id", snippets_path, lineno);
        s.code = require_string(j, "code", snippets_path, lineno);
        s.functionality = require_string(j, "functionality", snippets_path, lineno);
        s.language = require_string(j, "language", snippets_path, lineno);
        corpus.snippets.push_back(std::move(s));
    }

    std::ifstream pf(pairs_path);
    if (!pf) throw DataError("cannot open " + pairs_path.string());
    lineno = 0;
    while (std::getline(pf, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = parse_line(pairs_path, lineno, line);
        LabeledPair p;
        p.left = require_string(j, "left", pairs_path, lineno);
        p.right = require_string(j, "right", pairs_path, lineno);
        if (!j.contains("label") || !j.at("label").is_number_integer())
            throw DataError(pairs_path.filename().string() + ":" + std::to_string(lineno) +
                            ": missing or non-integer field 'label'");
        p.label = j.at("label").get<int>();
        p.functionality = require_string(j, "functionality", pairs_path, lineno);
        corpus.pairs.push_back(std::move(p));
    }

    corpus.finalize();
    return corpus;
}

PairCorpus load_corpus(const std::filesystem::path& dir) {
    return load_corpus(dir / "snippets.jsonl", dir / "pairs.jsonl");
}

void save_corpus(const PairCorpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "snippets.jsonl", std::ios::binary);
        if (!out) throw DataError("cannot write " + (dir / "snippets.jsonl").string());
        for (const CodeSnippet& s : corpus.snippets) {
            json j{{"id", s.id}, {"code", s.code}, {"functionality", s.functionality},
                   {"language", s.language}};
            out << j.dump() << '\n';
        }
    }
    {
        std::ofstream out(dir / "pairs.jsonl", std::ios::binary);
        if (!out) throw DataError("cannot write " + (dir / "pairs.jsonl").string());
        for (const LabeledPair& p : corpus.pairs) {
            json j{{"left", p.left}, {"right", p.right}, {"label", p.label},
                   {"functionality", p.functionality}};
            out << j.dump() << '\n';
        }
    }
}

} // namespace crossclone

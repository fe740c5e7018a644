#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace crossclone {

// A unit of code. `functionality` is the task the snippet implements (e.g.
// "GCD"); it is the grouping key for sampling and for train/test splits.
struct CodeSnippet {
    std::string id;
    std::string code;
    std::string functionality;
    std::string language;
};

// Two snippet references with a clone/non-clone label. `functionality`
// records the target functionality the pair was mined under; for non-clone
// pairs that is the functionality of the side that implements it (the left
// snippet for synthetic cross-template pairs).
struct LabeledPair {
    std::string left;
    std::string right;
    int label = 0; // 1 = clone, 0 = non-clone
    std::string functionality;
};

struct ClassCounts {
    std::size_t clones = 0;
    std::size_t nonclones = 0;
    bool operator==(const ClassCounts&) const = default;
};

struct PairCorpus {
    std::string name;
    std::vector<CodeSnippet> snippets;
    std::vector<LabeledPair> pairs;

    // Rebuilds the id lookup and checks every invariant: unique nonempty
    // snippet ids, nonempty code, resolvable pair references, left != right,
    // label in {0,1}. Throws DataError on violation.
    void finalize();

    bool has_snippet(const std::string& id) const { return index_.count(id) != 0; }
    const CodeSnippet& snippet(const std::string& id) const;
    std::size_t snippet_pos(const std::string& id) const;

private:
    std::unordered_map<std::string, std::size_t> index_;
};

// Per-functionality (clone, non-clone) pair counts. Values sum to |pairs|.
std::map<std::string, ClassCounts> functionality_histogram(const PairCorpus& corpus);

// Snippets referenced by the given pairs, unique, in corpus order. Used to
// scope vocabulary building to a training split.
std::vector<CodeSnippet> snippets_for_pairs(const PairCorpus& corpus,
                                            const std::vector<std::size_t>& pair_indices);

struct SamplerConfig {
    std::uint32_t per_class_cap = 100; // M: pairs kept per class per functionality
    std::uint64_t seed = 0;
};

// Functionality-aware balanced sampling: keeps exactly M clone and M
// non-clone pairs per functionality, drawn uniformly at random, and discards
// functionalities with fewer than M pairs of either class. Deterministic in
// (corpus, cfg). Throws DataError when nothing is retained.
PairCorpus sample_balanced(const PairCorpus& corpus, const SamplerConfig& cfg);

// Synthetic corpus generator: a desk-scale stand-in for real clone corpora.
// Each functionality owns a core token vocabulary; every snippet draws
// `token_overlap` of its tokens from that core and the rest from a pool
// shared by the whole corpus, so clones of one functionality overlap heavily
// while snippets of different functionalities meet only in the shared pool.
// Non-clone pairs combine snippets taken from different clone pairs across
// functionalities.
struct SynthSpec {
    std::size_t n_functionalities = 2;
    std::size_t pairs_per_functionality = 4; // per class
    double token_overlap = 0.8;              // fraction of tokens from the core vocab
    std::uint64_t seed = 0;
    // Shape knobs; the defaults make functionalities separable but not trivially so.
    std::size_t snippet_tokens = 32;
    std::size_t core_vocab = 24;
    std::size_t shared_vocab = 48;
};

PairCorpus synthesize_corpus(const SynthSpec& spec);
PairCorpus synthesize_corpus(std::size_t n_functionalities, std::size_t pairs_per_functionality,
                             double token_overlap, std::uint64_t seed);

// JSONL persistence. A corpus directory holds snippets.jsonl and pairs.jsonl.
PairCorpus load_corpus(const std::filesystem::path& dir);
PairCorpus load_corpus(const std::filesystem::path& snippets_path,
                       const std::filesystem::path& pairs_path);
void save_corpus(const PairCorpus& corpus, const std::filesystem::path& dir);

} // namespace crossclone

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crossclone/corpus.hpp"
#include "crossclone/metrics.hpp"
#include "crossclone/stats.hpp"

namespace crossclone {

// In-context prompt shapes: the baseline shows an unrelated clone example
// and non-clone example; the contrastive shape makes the two examples share
// their first snippet byte-for-byte, isolating the difference that flips the
// label.
enum class PromptKind { baseline, contrastive };

// Whether the clone example is drawn from the target pair's functionality
// (seen) or from a different one (unseen).
enum class ExampleMode { seen, unseen };

struct SelectionMode {
    ExampleMode mode = ExampleMode::unseen;
    std::uint64_t seed = 0;
};

struct LlmConfig {
    std::string endpoint = "http://127.0.0.1:8080"; // base URL; the chat path is fixed
    std::string model = "stub-model";
    double temperature = 0.0; // sent on the wire; anything but 0 is rejected
    std::size_t max_in_flight = 4;
    std::size_t max_attempts = 3;
    int backoff_base_ms = 250; // doubles per retry
    int timeout_ms = 60000;
    std::string api_key_env = "OPENAI_API_KEY";

    void validate() const;
};

struct PromptSnippet {
    std::string id;
    std::string code;
    std::string functionality;
};

struct PromptExample {
    PromptSnippet first;
    PromptSnippet second;
};

// A fully resolved prompt: target pair, the two in-context examples, and the
// clone definition text rendered into the instructions.
struct PromptSpec {
    PromptKind kind = PromptKind::contrastive;
    ExampleMode mode = ExampleMode::unseen;
    PromptSnippet target_left, target_right;
    int target_label = 0;
    PromptExample clone_example;
    PromptExample nonclone_example;
    std::string definition;

    // Enforces the structural guarantees: contrastive prompts share the
    // first example snippet byte-for-byte, and no example snippet equals a
    // target snippet (by id or by code).
    void validate() const;
};

// Wording embedded in every prompt; states the labeling rule the examples
// illustrate.
extern const char* const kCloneDefinition;

struct ChatMessage {
    std::string role;
    std::string content;
};

enum class Decision { clone, nonclone, unparseable };

struct Verdict {
    Decision decision = Decision::unparseable;
    std::string explanation; // text before the final verdict line
    std::string raw;         // full response content
};

// Uniformly samples the in-context examples for one target pair. The clone
// example is an eligible clone-labeled pair under the mode constraint; the
// baseline non-clone example is an eligible non-clone-labeled pair; the
// contrastive non-clone example reuses the clone example's first snippet x
// and draws w uniformly from snippets of functionalities other than x's.
// Snippets of the target pair never appear among the examples. Throws
// DataError when no eligible example exists.
PromptSpec select_examples(const PairCorpus& corpus, const LabeledPair& target,
                           PromptKind kind, const SelectionMode& mode);

// Renders the deterministic two-message prompt (system instructions + user
// payload with tagged snippet blocks).
std::vector<ChatMessage> build_prompt(const PromptSpec& spec);

// Extracts the decision from a response: the last "VERDICT:" line wins,
// matched case-insensitively; anything without one is unparseable.
Verdict parse_verdict(const std::string& content);

// One chat-completion round trip, retrying transient failures (connection
// errors, HTTP 429 and 5xx) with exponential backoff. Exhausted retries and
// non-transient failures throw TransportError.
Verdict classify_pair(const LlmConfig& cfg, const PromptSpec& spec);

// Uniform sample of n distinct pair indices, ascending, deterministic per
// seed. Requires n >= 1 and a corpus with at least n pairs.
std::vector<std::size_t> sample_eval_set(const PairCorpus& corpus, std::size_t n,
                                         std::uint64_t seed);

// Everything persisted per request, sufficient to recompute metrics and to
// audit the selection constraints offline.
struct TranscriptRecord {
    std::size_t pair_index = 0; // index into the corpus pair list
    std::uint64_t seed = 0;     // per-pair derived selection seed
    PromptSpec spec;
    std::vector<ChatMessage> prompt;
    std::string response;
    Verdict verdict;
    double latency_ms = 0.0;
};

void write_transcript(const std::vector<TranscriptRecord>& records,
                      const std::filesystem::path& path);
std::vector<TranscriptRecord> read_transcript(const std::filesystem::path& path);

struct TranscriptMetrics {
    MetricsTuple metrics; // over parseable verdicts only
    std::size_t parseable = 0;
    std::size_t unparseable = 0;
};

// Metrics over the parseable records; throws DataError when none are.
TranscriptMetrics metrics_from_records(const std::vector<TranscriptRecord>& records);

struct LlmExperimentResult {
    std::vector<TranscriptRecord> records;
    TranscriptMetrics summary;
};

// Samples n pairs, classifies each with freshly selected examples (per-pair
// seed derived from mode.seed, the prompt kind, the mode, and the pair
// index), and persists the transcript. Up to cfg.max_in_flight requests run
// concurrently. A transport failure aborts the run, saving the transcript of
// completed requests before rethrowing.
LlmExperimentResult run_llm_experiment(const LlmConfig& cfg, const PairCorpus& corpus,
                                       PromptKind kind, const SelectionMode& mode,
                                       std::size_t n,
                                       const std::filesystem::path& transcript_path);

// Aligns two transcripts over one eval set for a paired comparison: items
// parseable on both sides, keyed by target pair, in the first transcript's
// order. Throws DataError when the shared parseable set is empty.
std::pair<std::vector<ItemResult>, std::vector<ItemResult>> paired_items(
    const std::vector<TranscriptRecord>& a, const std::vector<TranscriptRecord>& b);

} // namespace crossclone

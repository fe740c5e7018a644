#include "crossclone/llm.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

#include "crossclone/errors.hpp"
#include "crossclone/rng.hpp"

namespace crossclone {

const char* const kCloneDefinition =
    "Two code snippets form a clone pair if and only if they implement the same "
    "functionality; otherwise they form a non-clone pair.";

namespace {

using nlohmann::json;

constexpr const char* kChatPath = "/v1/chat/completions";

std::string lowercased(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

PromptSnippet snippet_ref(const CodeSnippet& s) {
    return PromptSnippet{s.id, s.code, s.functionality};
}

bool leaks_target(const PromptSnippet& candidate, const PromptSpec& spec) {
    return candidate.id == spec.target_left.id || candidate.id == spec.target_right.id ||
           candidate.code == spec.target_left.code || candidate.code == spec.target_right.code;
}

std::string tagged_block(const std::string& tag, const std::string& body) {
    return "<" + tag + ">\n" + body + "\n</" + tag + ">";
}

} // namespace

void LlmConfig::validate() const {
    if (endpoint.empty()) throw ValidationError("llm: endpoint must be set");
    if (temperature != 0.0) throw ValidationError("llm: temperature is fixed at 0");
    if (max_in_flight == 0) throw ValidationError("llm: max_in_flight must be >= 1");
    if (max_attempts == 0) throw ValidationError("llm: max_attempts must be >= 1");
    if (backoff_base_ms < 0) throw ValidationError("llm: backoff base must be non-negative");
    if (timeout_ms <= 0) throw ValidationError("llm: timeout must be positive");
}

void PromptSpec::validate() const {
    if (kind == PromptKind::contrastive &&
        nonclone_example.first.code != clone_example.first.code) {
        throw ValidationError(
            "prompt: contrastive examples must share their first snippet byte-for-byte");
    }
    for (const PromptSnippet* s : {&clone_example.first, &clone_example.second,
                                   &nonclone_example.first, &nonclone_example.second}) {
        if (leaks_target(*s, *this)) {
            throw ValidationError("prompt: example snippet '" + s->id +
                                  "' leaks a target snippet");
        }
    }
    if (definition.empty()) throw ValidationError("prompt: missing clone definition");
}

PromptSpec select_examples(const PairCorpus& corpus, const LabeledPair& target,
                           PromptKind kind, const SelectionMode& mode) {
    PromptSpec spec;
    spec.kind = kind;
    spec.mode = mode.mode;
    spec.target_left = snippet_ref(corpus.snippet(target.left));
    spec.target_right = snippet_ref(corpus.snippet(target.right));
    spec.target_label = target.label;
    spec.definition = kCloneDefinition;

    Rng rng(mode.seed);

    // Clone example: clone-labeled pairs under the mode's functionality
    // constraint that do not touch the target snippets.
    std::vector<std::size_t> clone_pool;
    for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
        const LabeledPair& p = corpus.pairs[i];
        if (p.label != 1) continue;
        const bool same = p.functionality == target.functionality;
        if (mode.mode == ExampleMode::seen ? !same : same) continue;
        const PromptSnippet first = snippet_ref(corpus.snippet(p.left));
        const PromptSnippet second = snippet_ref(corpus.snippet(p.right));
        if (leaks_target(first, spec) || leaks_target(second, spec)) continue;
        clone_pool.push_back(i);
    }
    if (clone_pool.empty()) {
        throw DataError("select_examples: no eligible clone example under mode constraints");
    }
    const LabeledPair& clone_pair = corpus.pairs[clone_pool[rng.below(clone_pool.size())]];
    spec.clone_example.first = snippet_ref(corpus.snippet(clone_pair.left));
    spec.clone_example.second = snippet_ref(corpus.snippet(clone_pair.right));

    if (kind == PromptKind::baseline) {
        // Independent non-clone pair; the mode constrains only the clone
        // example, so any non-leaking non-clone pair qualifies.
        std::vector<std::size_t> nonclone_pool;
        for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
            const LabeledPair& p = corpus.pairs[i];
            if (p.label != 0) continue;
            const PromptSnippet first = snippet_ref(corpus.snippet(p.left));
            const PromptSnippet second = snippet_ref(corpus.snippet(p.right));
            if (leaks_target(first, spec) || leaks_target(second, spec)) continue;
            nonclone_pool.push_back(i);
        }
        if (nonclone_pool.empty()) {
            throw DataError("select_examples: no eligible non-clone example");
        }
        const LabeledPair& nonclone_pair =
            corpus.pairs[nonclone_pool[rng.below(nonclone_pool.size())]];
        spec.nonclone_example.first = snippet_ref(corpus.snippet(nonclone_pair.left));
        spec.nonclone_example.second = snippet_ref(corpus.snippet(nonclone_pair.right));
    } else {
        // Contrastive: reuse the clone example's first snippet x and pick w
        // from a different functionality, making (x, w) a non-clone by
        // construction.
        std::vector<std::size_t> w_pool;
        for (std::size_t i = 0; i < corpus.snippets.size(); ++i) {
            const CodeSnippet& s = corpus.snippets[i];
            if (s.functionality == spec.clone_example.first.functionality) continue;
            if (leaks_target(snippet_ref(s), spec)) continue;
            w_pool.push_back(i);
        }
        if (w_pool.empty()) {
            throw DataError("select_examples: no eligible snippet for the non-clone example");
        }
        spec.nonclone_example.first = spec.clone_example.first;
        spec.nonclone_example.second =
            snippet_ref(corpus.snippets[w_pool[rng.below(w_pool.size())]]);
    }
    spec.validate();
    return spec;
}

std::vector<ChatMessage> build_prompt(const PromptSpec& spec) {
    spec.validate();
    std::string system =
        "You decide whether two code snippets form a clone pair. " + spec.definition +
        " Explain your reasoning first. End your reply with one final line that is exactly"
        " \"VERDICT: CLONE\" if the snippets form a clone pair, or \"VERDICT: NOT_CLONE\""
        " if they do not.";

    std::ostringstream user;
    user << "Here are labeled examples.\n\n";
    user << "Example of a clone pair:\n";
    user << tagged_block("example_clone_1", spec.clone_example.first.code) << '\n';
    user << tagged_block("example_clone_2", spec.clone_example.second.code) << "\n\n";
    user << "Example of a non-clone pair:\n";
    user << tagged_block("example_nonclone_1", spec.nonclone_example.first.code) << '\n';
    user << tagged_block("example_nonclone_2", spec.nonclone_example.second.code) << "\n\n";
    user << "Decide whether the following two code snippets form a clone pair or not.\n";
    user << tagged_block("snippet_1", spec.target_left.code) << '\n';
    user << tagged_block("snippet_2", spec.target_right.code) << '\n';

    return {ChatMessage{"system", std::move(system)}, ChatMessage{"user", user.str()}};
}

Verdict parse_verdict(const std::string& content) {
    Verdict verdict;
    verdict.raw = content;
    // Scan lines for the last one starting with "verdict:" (case-insensitive,
    // leading whitespace allowed).
    std::size_t verdict_line_start = std::string::npos;
    std::string verdict_text;
    std::istringstream in(content);
    std::string line;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
        const std::size_t line_start = offset;
        offset += line.size() + 1;
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
        const std::string lower = lowercased(trimmed);
        if (lower.rfind("verdict:", 0) == 0) {
            verdict_line_start = line_start;
            verdict_text = lower.substr(8);
        }
    }
    if (verdict_line_start == std::string::npos) {
        verdict.decision = Decision::unparseable;
        return verdict;
    }
    verdict.explanation = content.substr(0, verdict_line_start);
    while (!verdict.explanation.empty() &&
           (verdict.explanation.back() == '\n' || verdict.explanation.back() == '\r')) {
        verdict.explanation.pop_back();
    }
    // Negated forms must win before the bare "clone" substring match.
    const bool negated = verdict_text.find("not_clone") != std::string::npos ||
                         verdict_text.find("not clone") != std::string::npos ||
                         verdict_text.find("non_clone") != std::string::npos ||
                         verdict_text.find("non-clone") != std::string::npos ||
                         verdict_text.find("nonclone") != std::string::npos;
    if (negated) {
        verdict.decision = Decision::nonclone;
    } else if (verdict_text.find("clone") != std::string::npos) {
        verdict.decision = Decision::clone;
    } else {
        verdict.decision = Decision::unparseable;
    }
    return verdict;
}

Verdict classify_pair(const LlmConfig& cfg, const PromptSpec& spec) {
    cfg.validate();
    const std::vector<ChatMessage> messages = build_prompt(spec);
    json body;
    body["model"] = cfg.model;
    body["temperature"] = cfg.temperature;
    body["messages"] = json::array();
    for (const auto& m : messages) {
        body["messages"].push_back(json{{"role", m.role}, {"content", m.content}});
    }
    const std::string payload = body.dump();

    httplib::Client client(cfg.endpoint);
    client.set_connection_timeout(cfg.timeout_ms / 1000, (cfg.timeout_ms % 1000) * 1000);
    client.set_read_timeout(cfg.timeout_ms / 1000, (cfg.timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (const char* key = std::getenv(cfg.api_key_env.c_str()); key != nullptr && *key != '\0') {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_failure = "no attempt made";
    for (std::size_t attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
        if (attempt > 1 && cfg.backoff_base_ms > 0) {
            const auto delay = std::chrono::milliseconds(
                cfg.backoff_base_ms * (1LL << (attempt - 2)));
            std::this_thread::sleep_for(delay);
        }
        httplib::Result res = client.Post(kChatPath, headers, payload, "application/json");
        if (!res) {
            last_failure = "connection failed (" + httplib::to_string(res.error()) + ")";
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_failure = "transient HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw TransportError("llm: HTTP " + std::to_string(res->status) + " from " +
                                 cfg.endpoint + kChatPath);
        }
        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty() ||
            !reply["choices"][0].contains("message") ||
            !reply["choices"][0]["message"].contains("content") ||
            !reply["choices"][0]["message"]["content"].is_string()) {
            throw TransportError("llm: response body is not a chat completion");
        }
        return parse_verdict(reply["choices"][0]["message"]["content"].get<std::string>());
    }
    throw TransportError("llm: " + std::to_string(cfg.max_attempts) + " attempts failed, last: " +
                         last_failure);
}

std::vector<std::size_t> sample_eval_set(const PairCorpus& corpus, std::size_t n,
                                         std::uint64_t seed) {
    if (n == 0) throw ValidationError("llm: eval set size must be >= 1");
    if (corpus.pairs.size() < n) {
        throw DataError("llm: corpus has " + std::to_string(corpus.pairs.size()) +
                        " pairs, need at least " + std::to_string(n));
    }
    Rng rng(seed);
    std::vector<std::size_t> picked = rng.sample_indices(corpus.pairs.size(), n);
    std::sort(picked.begin(), picked.end());
    return picked;
}

namespace {

json snippet_to_json(const PromptSnippet& s) {
    return json{{"id", s.id}, {"code", s.code}, {"functionality", s.functionality}};
}

PromptSnippet snippet_from_json(const json& j) {
    return PromptSnippet{j.at("id").get<std::string>(), j.at("code").get<std::string>(),
                         j.at("functionality").get<std::string>()};
}

json example_to_json(const PromptExample& e) {
    return json{{"first", snippet_to_json(e.first)}, {"second", snippet_to_json(e.second)}};
}

PromptExample example_from_json(const json& j) {
    return PromptExample{snippet_from_json(j.at("first")), snippet_from_json(j.at("second"))};
}

const char* decision_name(Decision d) {
    switch (d) {
        case Decision::clone: return "clone";
        case Decision::nonclone: return "nonclone";
        case Decision::unparseable: return "unparseable";
    }
    return "unparseable";
}

Decision decision_from_name(const std::string& name) {
    if (name == "clone") return Decision::clone;
    if (name == "nonclone") return Decision::nonclone;
    if (name == "unparseable") return Decision::unparseable;
    throw DataError("transcript: unknown decision '" + name + "'");
}

json record_to_json(const TranscriptRecord& r) {
    json prompt = json::array();
    for (const auto& m : r.prompt) {
        prompt.push_back(json{{"role", m.role}, {"content", m.content}});
    }
    return json{
        {"pair_index", r.pair_index},
        {"seed", r.seed},
        {"kind", r.spec.kind == PromptKind::contrastive ? "contrastive" : "baseline"},
        {"mode", r.spec.mode == ExampleMode::seen ? "seen" : "unseen"},
        {"target",
         json{{"left", snippet_to_json(r.spec.target_left)},
              {"right", snippet_to_json(r.spec.target_right)},
              {"label", r.spec.target_label}}},
        {"examples",
         json{{"clone", example_to_json(r.spec.clone_example)},
              {"nonclone", example_to_json(r.spec.nonclone_example)}}},
        {"definition", r.spec.definition},
        {"prompt", std::move(prompt)},
        {"response", r.response},
        {"verdict", decision_name(r.verdict.decision)},
        {"explanation", r.verdict.explanation},
        {"latency_ms", r.latency_ms}};
}

TranscriptRecord record_from_json(const json& j) {
    TranscriptRecord r;
    r.pair_index = j.at("pair_index").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind != "contrastive" && kind != "baseline") {
        throw DataError("transcript: unknown prompt kind '" + kind + "'");
    }
    r.spec.kind = kind == "contrastive" ? PromptKind::contrastive : PromptKind::baseline;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode != "seen" && mode != "unseen") {
        throw DataError("transcript: unknown mode '" + mode + "'");
    }
    r.spec.mode = mode == "seen" ? ExampleMode::seen : ExampleMode::unseen;
    const json& target = j.at("target");
    r.spec.target_left = snippet_from_json(target.at("left"));
    r.spec.target_right = snippet_from_json(target.at("right"));
    r.spec.target_label = target.at("label").get<int>();
    r.spec.clone_example = example_from_json(j.at("examples").at("clone"));
    r.spec.nonclone_example = example_from_json(j.at("examples").at("nonclone"));
    r.spec.definition = j.at("definition").get<std::string>();
    for (const auto& m : j.at("prompt")) {
        r.prompt.push_back(
            ChatMessage{m.at("role").get<std::string>(), m.at("content").get<std::string>()});
    }
    r.response = j.at("response").get<std::string>();
    r.verdict.decision = decision_from_name(j.at("verdict").get<std::string>());
    r.verdict.explanation = j.at("explanation").get<std::string>();
    r.verdict.raw = r.response;
    r.latency_ms = j.at("latency_ms").get<double>();
    return r;
}

} // namespace

void write_transcript(const std::vector<TranscriptRecord>& records,
                      const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    for (const auto& r : records) {
        out << record_to_json(r).dump() << '\n';
    }
    if (!out) throw DataError("failed writing " + path.string());
}

std::vector<TranscriptRecord> read_transcript(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<TranscriptRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": malformed transcript line");
        }
        try {
            records.push_back(record_from_json(j));
        } catch (const json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (records.empty()) throw DataError(path.string() + ": empty transcript");
    return records;
}

TranscriptMetrics metrics_from_records(const std::vector<TranscriptRecord>& records) {
    TranscriptMetrics out;
    std::vector<int> preds;
    std::vector<int> labels;
    for (const auto& r : records) {
        if (r.verdict.decision == Decision::unparseable) {
            ++out.unparseable;
            continue;
        }
        ++out.parseable;
        preds.push_back(r.verdict.decision == Decision::clone ? 1 : 0);
        labels.push_back(r.spec.target_label);
    }
    if (out.parseable == 0) {
        throw DataError("llm: no parseable verdicts, metrics undefined");
    }
    out.metrics = compute_metrics(preds, labels);
    return out;
}

LlmExperimentResult run_llm_experiment(const LlmConfig& cfg, const PairCorpus& corpus,
                                       PromptKind kind, const SelectionMode& mode,
                                       std::size_t n,
                                       const std::filesystem::path& transcript_path) {
    cfg.validate();
    const std::vector<std::size_t> eval_set = sample_eval_set(corpus, n, mode.seed);

    std::vector<TranscriptRecord> records(eval_set.size());
    std::vector<char> done(eval_set.size(), 0);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        while (!abort.load()) {
            const std::size_t slot = next.fetch_add(1);
            if (slot >= eval_set.size()) break;
            const std::size_t pair_index = eval_set[slot];
            try {
                TranscriptRecord record;
                record.pair_index = pair_index;
                // Per-pair seed: independent of worker scheduling, distinct
                // across prompt kinds and modes so the two arms of a paired
                // comparison draw examples independently.
                std::uint64_t seed = mix_seed(mode.seed, kind == PromptKind::contrastive ? 2 : 1);
                seed = mix_seed(seed, mode.mode == ExampleMode::seen ? 1 : 2);
                seed = mix_seed(seed, static_cast<std::uint64_t>(pair_index) + 1);
                record.seed = seed;
                record.spec = select_examples(corpus, corpus.pairs[pair_index], kind,
                                              SelectionMode{mode.mode, seed});
                record.prompt = build_prompt(record.spec);
                const auto started = std::chrono::steady_clock::now();
                record.verdict = classify_pair(cfg, record.spec);
                const auto finished = std::chrono::steady_clock::now();
                record.latency_ms =
                    std::chrono::duration<double, std::milli>(finished - started).count();
                record.response = record.verdict.raw;
                records[slot] = std::move(record);
                done[slot] = 1;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                abort.store(true);
                break;
            }
        }
    };

    const std::size_t n_workers = std::min(cfg.max_in_flight, eval_set.size());
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    std::vector<TranscriptRecord> completed;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (done[i] != 0) completed.push_back(std::move(records[i]));
    }
    write_transcript(completed, transcript_path);
    if (first_error) std::rethrow_exception(first_error);

    LlmExperimentResult result;
    result.summary = metrics_from_records(completed);
    result.records = std::move(completed);
    return result;
}

std::pair<std::vector<ItemResult>, std::vector<ItemResult>> paired_items(
    const std::vector<TranscriptRecord>& a, const std::vector<TranscriptRecord>& b) {
    std::unordered_map<std::string, const TranscriptRecord*> b_by_id;
    for (const auto& r : b) {
        b_by_id[r.spec.target_left.id + "|" + r.spec.target_right.id] = &r;
    }
    std::vector<ItemResult> items_a;
    std::vector<ItemResult> items_b;
    for (const auto& r : a) {
        if (r.verdict.decision == Decision::unparseable) continue;
        const std::string id = r.spec.target_left.id + "|" + r.spec.target_right.id;
        const auto it = b_by_id.find(id);
        if (it == b_by_id.end()) continue;
        const TranscriptRecord& rb = *it->second;
        if (rb.verdict.decision == Decision::unparseable) continue;
        if (rb.spec.target_label != r.spec.target_label) {
            throw DataError("transcripts disagree on the label of pair " + id);
        }
        items_a.push_back(ItemResult{id, r.verdict.decision == Decision::clone ? 1 : 0,
                                     r.spec.target_label});
        items_b.push_back(ItemResult{id, rb.verdict.decision == Decision::clone ? 1 : 0,
                                     rb.spec.target_label});
    }
    if (items_a.empty()) {
        throw DataError("transcripts share no parseable pairs; cannot compare");
    }
    return {std::move(items_a), std::move(items_b)};
}

} // namespace crossclone

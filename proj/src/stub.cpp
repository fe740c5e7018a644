#include "crossclone/stub.hpp"

#include <cstdio>
#include <set>

#include <httplib.h>
#include <json.hpp>

#include "crossclone/errors.hpp"
#include "crossclone/tokenizer.hpp"

namespace crossclone {

namespace {

using nlohmann::json;

double jaccard(const std::string& a, const std::string& b) {
    const TokenizerConfig cfg; // defaults
    std::set<std::string> sa, sb;
    for (auto& t : tokenize(cfg, a)) sa.insert(std::move(t));
    for (auto& t : tokenize(cfg, b)) sb.insert(std::move(t));
    if (sa.empty() && sb.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& t : sa) inter += sb.count(t);
    const std::size_t uni = sa.size() + sb.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

std::string format_score(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

void StubOptions::validate() const {
    if (rule != "overlap" && rule != "equality") {
        throw ValidationError("stub: rule must be 'overlap' or 'equality'");
    }
    if (fail_first < 0) throw ValidationError("stub: fail_first must be non-negative");
}

std::string extract_tagged(const std::string& text, const std::string& tag) {
    const std::string open = "<" + tag + ">\n";
    const std::string close = "\n</" + tag + ">";
    const std::size_t start = text.find(open);
    if (start == std::string::npos) throw DataError("stub: missing block <" + tag + ">");
    const std::size_t body = start + open.size();
    const std::size_t end = text.find(close, body);
    if (end == std::string::npos) throw DataError("stub: unterminated block <" + tag + ">");
    return text.substr(body, end - body);
}

std::string stub_reply_content(const StubOptions& opts, const std::string& snippet1,
                               const std::string& snippet2, const std::string& nonclone1,
                               const std::string& nonclone2) {
    bool is_clone;
    std::string explanation;
    if (opts.rule == "equality") {
        is_clone = snippet1 == snippet2;
        explanation = is_clone ? "The two snippets are byte-identical."
                               : "The two snippets differ textually.";
    } else {
        const double target = jaccard(snippet1, snippet2);
        const double reference = jaccard(nonclone1, nonclone2);
        is_clone = target > reference;
        explanation = "Token overlap of the pair is " + format_score(target) +
                      " versus " + format_score(reference) +
                      " for the non-clone example, so the pair looks " +
                      (is_clone ? "more" : "no more") + " related than a non-clone.";
    }
    return explanation + "\nVERDICT: " + (is_clone ? "CLONE" : "NOT_CLONE");
}

StubServer::StubServer(StubOptions opts) : opts_(std::move(opts)), server_(new httplib::Server) {
    opts_.validate();
    server_->Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
        const std::size_t count = requests_.fetch_add(1);
        if (count < static_cast<std::size_t>(opts_.fail_first)) {
            res.status = 500;
            res.set_content("induced failure", "text/plain");
            return;
        }
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.contains("messages") || !body["messages"].is_array()) {
            res.status = 400;
            res.set_content("bad request: no messages", "text/plain");
            return;
        }
        std::string user_content;
        for (const auto& m : body["messages"]) {
            if (m.value("role", "") == "user") user_content = m.value("content", "");
        }
        std::string content;
        try {
            const std::string s1 = extract_tagged(user_content, "snippet_1");
            const std::string s2 = extract_tagged(user_content, "snippet_2");
            std::string n1, n2;
            if (opts_.rule == "overlap") {
                n1 = extract_tagged(user_content, "example_nonclone_1");
                n2 = extract_tagged(user_content, "example_nonclone_2");
            }
            content = stub_reply_content(opts_, s1, s2, n1, n2);
        } catch (const DataError& e) {
            res.status = 400;
            res.set_content(std::string("bad request: ") + e.what(), "text/plain");
            return;
        }
        const json reply{
            {"id", "stub-" + std::to_string(count)},
            {"object", "chat.completion"},
            {"model", body.value("model", "stub-model")},
            {"choices",
             json::array({json{{"index", 0},
                               {"message", json{{"role", "assistant"}, {"content", content}}},
                               {"finish_reason", "stop"}}})}};
        res.set_content(reply.dump(), "application/json");
    });
}

StubServer::~StubServer() { stop(); }

int StubServer::start(int port) {
    if (thread_.joinable()) throw ValidationError("stub: already running");
    if (port == 0) {
        port_ = server_->bind_to_any_port("127.0.0.1");
        if (port_ <= 0) throw TransportError("stub: failed to bind an ephemeral port");
    } else {
        if (!server_->bind_to_port("127.0.0.1", port)) {
            throw TransportError("stub: failed to bind port " + std::to_string(port));
        }
        port_ = port;
    }
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void StubServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

void StubServer::wait() {
    if (thread_.joinable()) thread_.join();
}

} // namespace crossclone

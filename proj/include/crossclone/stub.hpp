#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <string>
#include <thread>

// Forward declaration keeps httplib out of most translation units.
namespace httplib {
class Server;
}

namespace crossclone {

// Deterministic chat-completions stand-in for LLM experiments. Two decision
// rules:
//   - "equality": clone iff the two target snippets are byte-identical
//     (hand-checkable oracle);
//   - "overlap": clone iff the target pair's token Jaccard similarity
//     exceeds that of the prompt's non-clone example, so verdicts depend on
//     the in-context examples and the two prompt shapes genuinely differ.
struct StubOptions {
    std::string rule = "overlap";
    int fail_first = 0; // answer the first N requests with HTTP 500

    void validate() const;
};

// Extracts the body of "<tag>\n...\n</tag>" from prompt text. Throws
// DataError when the block is missing.
std::string extract_tagged(const std::string& text, const std::string& tag);

// The stub's full reply content for one request: a short explanation
// followed by the final VERDICT line. Deterministic in its inputs; exposed
// so tests can predict live responses exactly.
std::string stub_reply_content(const StubOptions& opts, const std::string& snippet1,
                               const std::string& snippet2, const std::string& nonclone1,
                               const std::string& nonclone2);

class StubServer {
public:
    explicit StubServer(StubOptions opts = {});
    ~StubServer();

    StubServer(const StubServer&) = delete;
    StubServer& operator=(const StubServer&) = delete;

    // Binds 127.0.0.1 (an ephemeral port when port = 0), serves on a
    // background thread, and returns the bound port.
    int start(int port = 0);
    void stop();
    // Blocks until the server stops (for running as a standalone process).
    void wait();

    int port() const { return port_; }
    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
    std::size_t request_count() const { return requests_.load(); }

private:
    StubOptions opts_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<std::size_t> requests_{0};
};

} // namespace crossclone

// Standalone deterministic chat-completions stub for LLM experiments.
#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "crossclone/stub.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Deterministic chat-completions stub server"};
    crossclone::StubOptions opts;
    int port = 8080;
    app.add_option("--port", port, "Port to listen on (0 for an ephemeral port)");
    app.add_option("--rule", opts.rule, "Decision rule: overlap | equality")
        ->check(CLI::IsMember({"overlap", "equality"}));
    app.add_option("--fail-first", opts.fail_first,
                   "Answer the first N requests with HTTP 500 (retry testing)");
    CLI11_PARSE(app, argc, argv);

    try {
        crossclone::StubServer server(opts);
        const int bound = server.start(port);
        std::printf("stub listening on http://127.0.0.1:%d (rule=%s)\n", bound,
                    opts.rule.c_str());
        std::fflush(stdout);
        server.wait();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

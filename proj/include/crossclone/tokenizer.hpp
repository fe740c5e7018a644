#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace crossclone {

// Language-agnostic source tokenizer. Total and deterministic over arbitrary
// byte strings. The rule table:
//   - whitespace separates tokens and is dropped;
//   - // and /* */ comments are dropped (unterminated runs to end of input);
//   - identifiers [A-Za-z_][A-Za-z0-9_]* are split at underscores and
//     camelCase boundaries when split_identifiers is set, and lowercased
//     when lowercase is set;
//   - numeric literals (digit-leading, with exponent signs) become "<num>"
//     and string/char literals become "<str>"/"<chr>" when replace_literals
//     is set, otherwise their raw text is kept;
//   - operators match longest-first against a fixed multigraph table, any
//     other byte is a single-character token.
struct TokenizerConfig {
    bool split_identifiers = true;
    bool replace_literals = true;
    bool lowercase = true;
};

std::vector<std::string> tokenize(const TokenizerConfig& cfg, std::string_view code);

} // namespace crossclone

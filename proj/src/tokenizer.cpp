#include "crossclone/tokenizer.hpp"

#include <array>
#include <cctype>

namespace crossclone {

namespace {

bool is_ident_start(unsigned char c) { return std::isalpha(c) != 0 || c == '_'; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) != 0 || c == '_'; }

// Splits an identifier at underscores and at lower/digit -> upper camelCase
// boundaries ("fooBar" -> foo|Bar, "HTTPServer" -> HTTP|Server). Underscores
// are dropped; digits stay attached to the current piece ("utf8" is whole).
void split_identifier(std::string_view ident, bool lowercase,
                      std::vector<std::string>& out) {
    std::string piece;
    auto flush = [&] {
        if (piece.empty()) return;
        if (lowercase) {
            for (char& c : piece) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        out.push_back(piece);
        piece.clear();
    };
    for (std::size_t i = 0; i < ident.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(ident[i]);
        if (c == '_') {
            flush();
            continue;
        }
        if (std::isupper(c) != 0 && !piece.empty()) {
            const unsigned char prev = static_cast<unsigned char>(piece.back());
            const bool after_lower = std::islower(prev) != 0 || std::isdigit(prev) != 0;
            const bool before_lower = i + 1 < ident.size() &&
                                      std::islower(static_cast<unsigned char>(ident[i + 1])) != 0;
            if (after_lower || (std::isupper(prev) != 0 && before_lower)) flush();
        }
        piece.push_back(static_cast<char>(c));
    }
    flush();
}

// Multigraph operators, longest first within each length class.
constexpr std::array<std::string_view, 3> kOps3 = {"<<=", ">>=", "..."};
constexpr std::array<std::string_view, 20> kOps2 = {
    "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=",
    "*=", "/=", "%=", "&=", "|=", "^=", "->", "::", "<<", ">>"};

std::size_t match_operator(std::string_view rest) {
    if (rest.size() >= 3) {
        for (std::string_view op : kOps3)
            if (rest.substr(0, 3) == op) return 3;
    }
    if (rest.size() >= 2) {
        for (std::string_view op : kOps2)
            if (rest.substr(0, 2) == op) return 2;
    }
    return 1;
}

} // namespace

std::vector<std::string> tokenize(const TokenizerConfig& cfg, std::string_view code) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    const std::size_t n = code.size();
    while (i < n) {
        const unsigned char c = static_cast<unsigned char>(code[i]);
        if (std::isspace(c) != 0) {
            ++i;
            continue;
        }
        // Comments.
        if (c == '/' && i + 1 < n && code[i + 1] == '/') {
            while (i < n && code[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && code[i + 1] == '*') {
            i += 2;
            while (i + 1 < n && !(code[i] == '*' && code[i + 1] == '/')) ++i;
            i = (i + 1 < n) ? i + 2 : n;
            continue;
        }
        // Identifiers and keywords.
        if (is_ident_start(c)) {
            const std::size_t start = i;
            while (i < n && is_ident_char(static_cast<unsigned char>(code[i]))) ++i;
            const std::string_view ident = code.substr(start, i - start);
            if (cfg.split_identifiers) {
                split_identifier(ident, cfg.lowercase, tokens);
            } else {
                std::string t(ident);
                if (cfg.lowercase) {
                    for (char& ch : t) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
                }
                tokens.push_back(t);
            }
            continue;
        }
        // Numeric literals: digit-leading, greedy over [0-9A-Za-z_.] plus a
        // sign directly after an exponent marker ("1e-5" stays one token).
        if (std::isdigit(c) != 0) {
            const std::size_t start = i;
            while (i < n) {
                const unsigned char d = static_cast<unsigned char>(code[i]);
                if (is_ident_char(d) || d == '.') {
                    ++i;
                    continue;
                }
                if ((d == '+' || d == '-') && i > start) {
                    const char prev = code[i - 1];
                    if (prev == 'e' || prev == 'E') {
                        ++i;
                        continue;
                    }
                }
                break;
            }
            tokens.push_back(cfg.replace_literals ? "<num>" : std::string(code.substr(start, i - start)));
            continue;
        }
        // String and character literals, with backslash escapes. An
        // unterminated literal consumes the rest of the input.
        if (c == '"' || c == '\'') {
            const char quote = static_cast<char>(c);
            const std::size_t start = i;
            ++i;
            while (i < n && code[i] != quote) {
                i += (code[i] == '\\' && i + 1 < n) ? 2 : 1;
            }
            if (i < n) ++i; // closing quote
            if (cfg.replace_literals) {
                tokens.push_back(quote == '"' ? "<str>" : "<chr>");
            } else {
                tokens.emplace_back(code.substr(start, i - start));
            }
            continue;
        }
        // Operators and any remaining bytes.
        const std::size_t len = match_operator(code.substr(i));
        tokens.emplace_back(code.substr(i, len));
        i += len;
    }
    return tokens;
}

} // namespace crossclone

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace crossclone {

// Token vocabulary built from a training corpus. In-vocabulary tokens get
// dense indices [0, size()); out-of-vocabulary tokens hash into one of
// oov_buckets() extra rows, so index_of() is total and row_count() bounds
// every index it can return.
class Vocabulary {
public:
    Vocabulary() = default;

    // Builds the vocabulary from token sequences. Tokens seen fewer than
    // min_frequency times are excluded. Indices are assigned by descending
    // frequency, ties broken lexicographically, so the layout is a pure
    // function of the input. oov_buckets must be >= 1.
    static Vocabulary build(const std::vector<std::vector<std::string>>& sequences,
                            std::size_t min_frequency, std::size_t oov_buckets);

    // Reconstructs a vocabulary from tokens already in index order (used by
    // checkpoint loading).
    static Vocabulary from_tokens(std::vector<std::string> tokens, std::size_t oov_buckets);

    // Row index for a token: dense index if in-vocabulary, otherwise
    // size() + fnv1a64(token) % oov_buckets().
    std::size_t index_of(std::string_view token) const;
    bool contains(std::string_view token) const;

    std::size_t size() const { return tokens_.size(); }
    std::size_t oov_buckets() const { return oov_buckets_; }
    std::size_t row_count() const { return tokens_.size() + oov_buckets_; }

    // Tokens in index order.
    const std::vector<std::string>& tokens() const { return tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t oov_buckets_ = 1;
};

} // namespace crossclone

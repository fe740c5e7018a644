#include "crossclone/vocabulary.hpp"

#include <algorithm>
#include <map>

#include "crossclone/errors.hpp"
#include "crossclone/rng.hpp"

namespace crossclone {

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& sequences,
                             std::size_t min_frequency, std::size_t oov_buckets) {
    if (oov_buckets == 0) throw ValidationError("vocabulary: oov_buckets must be >= 1");
    std::map<std::string, std::size_t> counts;
    for (const auto& seq : sequences) {
        for (const auto& token : seq) ++counts[token];
    }
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (const auto& [token, count] : counts) {
        if (count >= min_frequency) kept.emplace_back(token, count);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> tokens;
    tokens.reserve(kept.size());
    for (auto& [token, count] : kept) tokens.push_back(std::move(token));
    return from_tokens(std::move(tokens), oov_buckets);
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens, std::size_t oov_buckets) {
    if (oov_buckets == 0) throw ValidationError("vocabulary: oov_buckets must be >= 1");
    Vocabulary vocab;
    vocab.tokens_ = std::move(tokens);
    vocab.oov_buckets_ = oov_buckets;
    for (std::size_t i = 0; i < vocab.tokens_.size(); ++i) {
        const auto [it, inserted] = vocab.index_.emplace(vocab.tokens_[i], i);
        if (!inserted) throw DataError("vocabulary: duplicate token '" + vocab.tokens_[i] + "'");
    }
    return vocab;
}

std::size_t Vocabulary::index_of(std::string_view token) const {
    const auto it = index_.find(std::string(token));
    if (it != index_.end()) return it->second;
    return tokens_.size() + static_cast<std::size_t>(fnv1a64(token) % oov_buckets_);
}

bool Vocabulary::contains(std::string_view token) const {
    return index_.find(std::string(token)) != index_.end();
}

} // namespace crossclone

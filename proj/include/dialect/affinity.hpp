#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dialect/ingest.hpp"
#include "dialect/region.hpp"
#include "dialect/sparse.hpp"
#include "dialect/textnorm.hpp"
#include "dialect/vocab.hpp"

namespace dialect {

/// Dense column ids for the union vocabulary, in lexicographic token order.
class TokenIndex {
public:
    TokenIndex() = default;
    /// Sorts and deduplicates.
    explicit TokenIndex(std::vector<std::string> tokens);

    std::optional<std::uint32_t> id(std::string_view token) const;
    const std::string& token(std::uint32_t id) const { return tokens_.at(id); }
    std::size_t size() const noexcept { return tokens_.size(); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::uint32_t> ids_;
};

TokenIndex union_vocabulary(std::span<const RegionVocabulary> vocabs);

struct FrequencyVector {
    RegionCode region;
    SparseVector entries;
};

/// Relative frequencies (count / sum of retained counts) over `index`.
/// Dividing exact integer counts by their exact sum makes the vector
/// bit-identical under any uniform integer scaling of the counts.
FrequencyVector frequency_vector(const RegionVocabulary& vocab, const TokenIndex& index);

/// Symmetric region×region distance matrix with an exactly zero diagonal.
class AffinityMatrix {
public:
    AffinityMatrix() = default;
    explicit AffinityMatrix(std::vector<RegionCode> labels);

    const std::vector<RegionCode>& labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return labels_.size(); }
    double at(std::size_t i, std::size_t j) const { return values_.at(i * labels_.size() + j); }
    /// Sets both (i, j) and (j, i).
    void set(std::size_t i, std::size_t j, double v);
    std::optional<std::size_t> index_of(const RegionCode& r) const;

    /// Header row and first column hold region codes; cells use 6 decimals.
    std::string to_csv() const;

private:
    std::vector<RegionCode> labels_;
    std::vector<double> values_;
};

struct AffinityResult {
    AffinityMatrix matrix;
    /// Regions left out because their vectors were empty.
    std::vector<RegionCode> excluded;
};

/// Pairwise cosine distances between `vectors`; empty vectors are excluded.
AffinityResult pairwise_cosine_affinity(std::span<const RegionCode> labels,
                                        std::span<const SparseVector> vectors,
                                        std::size_t threads = 1);

/// Cosine-distance affinity of regional vocabularies (after their cutoff).
/// Throws std::invalid_argument with fewer than two vocabularies.
AffinityResult lexical_affinity(std::span<const RegionVocabulary> vocabs,
                                std::size_t threads = 1);

struct EmojiRanking {
    RegionCode region;
    /// (base emoji or skin-tone modifier, count), descending count, ties by code point.
    std::vector<std::pair<std::u32string, std::uint64_t>> ranked;
};

inline constexpr std::size_t kDefaultEmojiTopK = 32;

/// Emoji counts with skin tones split off: each modifier is also counted as a
/// standalone entry.
class EmojiCounter {
public:
    void add_text(std::string_view text);
    void add(const text::EmojiOccurrence& occurrence);
    void merge(const EmojiCounter& other);
    EmojiRanking ranking(RegionCode region, std::size_t top_k = kDefaultEmojiTopK) const;
    const std::unordered_map<std::u32string, std::uint64_t>& counts() const noexcept {
        return counts_;
    }

private:
    std::unordered_map<std::u32string, std::uint64_t> counts_;
};

/// Ranking over the records of `region`; other regions are ignored.
EmojiRanking emoji_ranking(std::span<const TweetRecord> records, const RegionCode& region,
                           std::size_t top_k = kDefaultEmojiTopK);

/// "region,rank,emoji,count" rows; emoji written as U+XXXX code points.
std::string emoji_rankings_csv(std::span<const EmojiRanking> rankings);

}  // namespace dialect

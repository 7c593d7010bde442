#include "dialect/affinity.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "dialect/parallel.hpp"
#include "dialect/textnorm.hpp"

namespace dialect {

TokenIndex::TokenIndex(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    std::sort(tokens_.begin(), tokens_.end());
    tokens_.erase(std::unique(tokens_.begin(), tokens_.end()), tokens_.end());
    ids_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        ids_.emplace(tokens_[i], static_cast<std::uint32_t>(i));
    }
}

std::optional<std::uint32_t> TokenIndex::id(std::string_view token) const {
    auto it = ids_.find(std::string(token));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

TokenIndex union_vocabulary(std::span<const RegionVocabulary> vocabs) {
    std::vector<std::string> all;
    for (const auto& v : vocabs) {
        for (const auto& [token, n] : v.counts) all.push_back(token);
    }
    return TokenIndex(std::move(all));
}

FrequencyVector frequency_vector(const RegionVocabulary& vocab, const TokenIndex& index) {
    std::uint64_t sum = 0;
    for (const auto& [token, n] : vocab.counts) sum += n;
    std::vector<SparseVector::Entry> entries;
    entries.reserve(vocab.counts.size());
    for (const auto& [token, n] : vocab.counts) {
        auto id = index.id(token);
        if (!id) throw std::invalid_argument("frequency_vector: token missing from index");
        entries.emplace_back(*id, static_cast<double>(n) / static_cast<double>(sum));
    }
    return {vocab.region, SparseVector(std::move(entries))};
}

AffinityMatrix::AffinityMatrix(std::vector<RegionCode> labels)
    : labels_(std::move(labels)), values_(labels_.size() * labels_.size(), 0.0) {}

void AffinityMatrix::set(std::size_t i, std::size_t j, double v) {
    values_.at(i * labels_.size() + j) = v;
    values_.at(j * labels_.size() + i) = v;
}

std::optional<std::size_t> AffinityMatrix::index_of(const RegionCode& r) const {
    auto it = std::find(labels_.begin(), labels_.end(), r);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
}

std::string AffinityMatrix::to_csv() const {
    std::string out;
    for (const auto& l : labels_) out += "," + l.str();
    out += '\n';
    char buf[32];
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        out += labels_[i].str();
        for (std::size_t j = 0; j < labels_.size(); ++j) {
            std::snprintf(buf, sizeof(buf), ",%.6f", at(i, j));
            out += buf;
        }
        out += '\n';
    }
    return out;
}

AffinityResult pairwise_cosine_affinity(std::span<const RegionCode> labels,
                                        std::span<const SparseVector> vectors,
                                        std::size_t threads) {
    if (labels.size() != vectors.size()) {
        throw std::invalid_argument("affinity: labels and vectors differ in length");
    }
    AffinityResult result;
    std::vector<RegionCode> kept;
    std::vector<const SparseVector*> kept_vectors;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (vectors[i].empty()) {
            result.excluded.push_back(labels[i]);
        } else {
            kept.push_back(labels[i]);
            kept_vectors.push_back(&vectors[i]);
        }
    }
    const std::size_t n = kept.size();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }
    std::vector<double> dist(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t p) {
        dist[p] = cosine_distance(*kept_vectors[pairs[p].first], *kept_vectors[pairs[p].second]);
    });
    result.matrix = AffinityMatrix(std::move(kept));
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        result.matrix.set(pairs[p].first, pairs[p].second, dist[p]);
    }
    return result;
}

AffinityResult lexical_affinity(std::span<const RegionVocabulary> vocabs, std::size_t threads) {
    if (vocabs.size() < 2) throw std::invalid_argument("lexical_affinity: need >= 2 regions");
    const TokenIndex index = union_vocabulary(vocabs);
    std::vector<RegionCode> labels;
    std::vector<SparseVector> vectors(vocabs.size());
    for (const auto& v : vocabs) labels.push_back(v.region);
    parallel_for(vocabs.size(), threads,
                 [&](std::size_t i) { vectors[i] = frequency_vector(vocabs[i], index).entries; });
    return pairwise_cosine_affinity(labels, vectors, threads);
}

void EmojiCounter::add_text(std::string_view text) {
    for (const auto& occ : text::extract_emojis(text)) add(occ);
}

void EmojiCounter::add(const text::EmojiOccurrence& occ) {
    ++counts_[occ.base];
    if (occ.skin_tone) ++counts_[std::u32string(1, *occ.skin_tone)];
}

void EmojiCounter::merge(const EmojiCounter& other) {
    for (const auto& [e, n] : other.counts_) counts_[e] += n;
}

EmojiRanking EmojiCounter::ranking(RegionCode region, std::size_t top_k) const {
    if (top_k < 1) throw std::invalid_argument("emoji ranking: top_k must be >= 1");
    EmojiRanking r{std::move(region), {counts_.begin(), counts_.end()}};
    std::sort(r.ranked.begin(), r.ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (r.ranked.size() > top_k) r.ranked.resize(top_k);
    return r;
}

EmojiRanking emoji_ranking(std::span<const TweetRecord> records, const RegionCode& region,
                           std::size_t top_k) {
    EmojiCounter counter;
    for (const auto& rec : records) {
        if (rec.region == region) counter.add_text(rec.text);
    }
    return counter.ranking(region, top_k);
}

std::string emoji_rankings_csv(std::span<const EmojiRanking> rankings) {
    std::string out = "region,rank,emoji,count\n";
    for (const auto& r : rankings) {
        for (std::size_t i = 0; i < r.ranked.size(); ++i) {
            out += r.region.str() + "," + std::to_string(i + 1) + "," +
                   text::codepoint_notation(r.ranked[i].first) + "," +
                   std::to_string(r.ranked[i].second) + "\n";
        }
    }
    return out;
}

}  // namespace dialect

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dialect/region.hpp"

namespace dialect {

using TokenCounts = std::unordered_map<std::string, std::uint64_t>;

/// Accumulates raw token frequencies. Counters built over disjoint shards
/// merge associatively and commutatively.
class TokenCounter {
public:
    void add(std::string_view token, std::uint64_t times = 1);
    template <typename Range>
    void add_all(const Range& tokens) {
        for (const auto& t : tokens) add(t);
    }
    void merge(const TokenCounter& other);

    const TokenCounts& counts() const noexcept { return counts_; }
    std::uint64_t total() const noexcept { return total_; }

private:
    TokenCounts counts_;
    std::uint64_t total_ = 0;
};

struct RegionVocabulary {
    RegionCode region;
    /// Tokens with raw frequency >= min_count.
    TokenCounts counts;
    /// All token occurrences before the cutoff.
    std::uint64_t total_tokens = 0;
    std::uint64_t min_count = 1;

    /// (token, frequency) by descending frequency, ties by token.
    std::vector<std::pair<std::string, std::uint64_t>> sorted() const;
    /// "token<TAB>frequency" lines in sorted() order.
    std::string to_tsv() const;
};

/// Applies the cutoff to a finished counter.
RegionVocabulary make_vocabulary(const TokenCounter& counter, RegionCode region,
                                 std::uint64_t min_count = 5);

RegionVocabulary build_vocabulary(std::span<const std::string> tokens, RegionCode region,
                                  std::uint64_t min_count = 5);

/// Minimum frequency f >= N a^2 / (N + a^2) for which the normal-approximation
/// confidence interval p ± a·se(p) of a token probability stays non-negative.
/// `alpha` is the percent-point value of the interval (≈2 for 95%).
/// Throws std::domain_error for n == 0 and for negative or non-finite alpha.
double min_frequency_cutoff(std::uint64_t n, double alpha);

struct CutoffParams {
    std::uint64_t n = 0;
    double alpha = 2.0;
    double f_min = 0.0;

    static CutoffParams compute(std::uint64_t n, double alpha);
};

/// Fitted power law in log-log space: log y = slope·log x + intercept.
struct LawFit {
    /// Heaps α (the slope) or Zipf β (minus the slope).
    double exponent = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
};

struct HeapsPoint {
    std::uint64_t n = 0;
    std::uint64_t vocabulary = 0;
    bool operator==(const HeapsPoint&) const = default;
};

struct RankFrequency {
    std::uint64_t rank = 0;
    std::uint64_t frequency = 0;
    bool operator==(const RankFrequency&) const = default;
};

inline constexpr std::size_t kDefaultHeapsSamples = 64;

/// Prefix lengths at which a Heaps curve of a `length`-token stream is sampled:
/// up to `samples` log-spaced values in [1, length], strictly increasing,
/// always ending at `length`.
std::vector<std::uint64_t> heaps_sample_points(std::uint64_t length, std::size_t samples);

/// Distinct-token counts over growing prefixes of `tokens`. Throws
/// std::invalid_argument if the stream has fewer than two tokens or samples < 2.
template <typename T>
std::vector<HeapsPoint> heaps_curve(std::span<const T> tokens,
                                    std::size_t samples = kDefaultHeapsSamples) {
    const auto at = heaps_sample_points(tokens.size(), samples);
    std::vector<HeapsPoint> curve;
    curve.reserve(at.size());
    std::unordered_set<T> seen;
    std::size_t next = 0;
    for (std::uint64_t i = 0; i < tokens.size() && next < at.size(); ++i) {
        seen.insert(tokens[i]);
        if (i + 1 == at[next]) curve.push_back({at[next++], seen.size()});
    }
    return curve;
}

/// Least-squares fit of log V = α log n + c.
LawFit fit_heaps(std::span<const HeapsPoint> curve);

/// Frequencies in descending order with ranks from 1; ties in token order.
std::vector<RankFrequency> zipf_ranks(const RegionVocabulary& vocab);

struct RankRange {
    std::uint64_t lo = 1;
    std::uint64_t hi = std::numeric_limits<std::uint64_t>::max();
};

/// Least-squares fit of log f = -β log r + c over ranks in `range`.
LawFit fit_zipf(std::span<const RankFrequency> ranked, RankRange range = {});

/// Ordinary least squares of log(y) on log(x). Degenerate input (under two
/// points, a non-positive value, constant x) throws std::invalid_argument.
LawFit fit_log_log(std::span<const double> x, std::span<const double> y);

}  // namespace dialect

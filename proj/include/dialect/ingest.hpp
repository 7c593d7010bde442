#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dialect/io.hpp"
#include "dialect/region.hpp"

namespace dialect {

/// One geotagged message.
struct TweetRecord {
    std::uint64_t id = 0;
    std::string text;
    RegionCode region;
    bool is_retweet = false;
    std::string lang;
    /// Posting application, when the input carries one ("source" field).
    std::string source;
};

struct FilterProfile {
    std::size_t min_tokens = 5;
    bool drop_retweets = true;
    bool drop_urls = false;
    std::optional<std::string> require_lang;
    /// Records whose source contains any of these substrings are dropped
    /// (template-writing apps such as Foursquare check-ins).
    std::vector<std::string> source_denylist;

    /// Lexical corpus profile: retweets removed, at least five tokens.
    static FilterProfile corpus();
    /// Embedding-training profile: additionally drops URLs, at least seven tokens.
    static FilterProfile embedding();
    /// "corpus" or "embedding"; throws std::invalid_argument otherwise.
    static FilterProfile named(std::string_view name);

    void validate() const;
};

/// Token count used by the minimum-token filter (raw text, pre-masking).
std::size_t filter_token_count(std::string_view text);

bool filter_record(const TweetRecord& record, const FilterProfile& profile);

/// Parses one corpus line. Returns std::nullopt for malformed lines
/// (bad JSON or fields, unknown region).
std::optional<TweetRecord> parse_record(std::string_view line, const RegionSet& regions);

struct IngestStats {
    std::uint64_t lines = 0;
    std::uint64_t kept = 0;
    std::uint64_t filtered = 0;
    std::uint64_t malformed = 0;

    IngestStats& operator+=(const IngestStats& other);
    bool operator==(const IngestStats&) const = default;
};

/// Single-consumer stream of filtered records from one corpus file.
class CorpusReader {
public:
    /// Throws std::runtime_error if the file cannot be opened.
    CorpusReader(const std::filesystem::path& path, FilterProfile profile,
                 RegionSet regions = {});

    /// Next kept record, or false at end of file.
    bool next(TweetRecord& record);

    const IngestStats& stats() const noexcept { return stats_; }
    /// Line numbers of malformed lines, capped at the first 100.
    const std::vector<std::uint64_t>& malformed_lines() const noexcept { return malformed_lines_; }

private:
    LineReader lines_;
    FilterProfile profile_;
    RegionSet regions_;
    IngestStats stats_;
    std::vector<std::uint64_t> malformed_lines_;
    std::string line_;
};

/// Streams every kept record of `path` through `sink`; returns the tallies.
IngestStats read_corpus(const std::filesystem::path& path, const FilterProfile& profile,
                        const std::function<void(TweetRecord&&)>& sink,
                        const RegionSet& regions = {});

}  // namespace dialect

#include "dialect/ingest.hpp"

#include <json.hpp>

#include <algorithm>
#include <stdexcept>

#include "dialect/textnorm.hpp"

namespace dialect {

FilterProfile FilterProfile::corpus() {
    FilterProfile p;
    p.min_tokens = 5;
    p.drop_retweets = true;
    return p;
}

FilterProfile FilterProfile::embedding() {
    FilterProfile p;
    p.min_tokens = 7;
    p.drop_retweets = true;
    p.drop_urls = true;
    return p;
}

FilterProfile FilterProfile::named(std::string_view name) {
    if (name == "corpus") return corpus();
    if (name == "embedding") return embedding();
    throw std::invalid_argument("unknown filter profile '" + std::string(name) +
                                "' (expected corpus or embedding)");
}

void FilterProfile::validate() const {
    if (min_tokens < 1) throw std::invalid_argument("min_tokens must be >= 1");
}

std::size_t filter_token_count(std::string_view text) { return text::count_tokens(text); }

bool filter_record(const TweetRecord& record, const FilterProfile& profile) {
    if (profile.drop_retweets && record.is_retweet) return false;
    if (profile.require_lang && record.lang != *profile.require_lang) return false;
    if (profile.drop_urls && text::contains_url(record.text)) return false;
    for (const auto& banned : profile.source_denylist) {
        if (!banned.empty() && record.source.find(banned) != std::string::npos) return false;
    }
    return filter_token_count(record.text) >= profile.min_tokens;
}

std::optional<TweetRecord> parse_record(std::string_view line, const RegionSet& regions) {
    auto doc = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (!doc.is_object()) return std::nullopt;

    const auto id = doc.find("id");
    const auto text = doc.find("text");
    const auto country = doc.find("country");
    if (id == doc.end() || text == doc.end() || country == doc.end()) return std::nullopt;
    if (!id->is_number_unsigned() || !text->is_string() || !country->is_string()) {
        return std::nullopt;
    }
    const auto& code = country->get_ref<const std::string&>();
    if (!regions.contains(code)) return std::nullopt;

    TweetRecord r;
    r.id = id->get<std::uint64_t>();
    r.text = text->get<std::string>();
    r.region = RegionCode(code);
    if (auto rt = doc.find("retweet"); rt != doc.end()) {
        if (!rt->is_boolean()) return std::nullopt;
        r.is_retweet = rt->get<bool>();
    }
    if (auto lang = doc.find("lang"); lang != doc.end()) {
        if (!lang->is_string()) return std::nullopt;
        r.lang = lang->get<std::string>();
    }
    if (auto src = doc.find("source"); src != doc.end() && src->is_string()) {
        r.source = src->get<std::string>();
    }
    return r;
}

IngestStats& IngestStats::operator+=(const IngestStats& other) {
    lines += other.lines;
    kept += other.kept;
    filtered += other.filtered;
    malformed += other.malformed;
    return *this;
}

CorpusReader::CorpusReader(const std::filesystem::path& path, FilterProfile profile,
                           RegionSet regions)
    : lines_(path), profile_(std::move(profile)), regions_(std::move(regions)) {
    profile_.validate();
}

bool CorpusReader::next(TweetRecord& record) {
    while (lines_.next(line_)) {
        ++stats_.lines;
        auto parsed = parse_record(line_, regions_);
        if (!parsed) {
            ++stats_.malformed;
            if (malformed_lines_.size() < 100) malformed_lines_.push_back(lines_.line_number());
            continue;
        }
        if (!filter_record(*parsed, profile_)) {
            ++stats_.filtered;
            continue;
        }
        ++stats_.kept;
        record = std::move(*parsed);
        return true;
    }
    return false;
}

IngestStats read_corpus(const std::filesystem::path& path, const FilterProfile& profile,
                        const std::function<void(TweetRecord&&)>& sink,
                        const RegionSet& regions) {
    CorpusReader reader(path, profile, regions);
    TweetRecord r;
    while (reader.next(r)) sink(std::move(r));
    return reader.stats();
}

}  // namespace dialect

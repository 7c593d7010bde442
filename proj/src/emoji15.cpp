#include "dialect/emoji15.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

namespace dialect::emoji15 {

using nlohmann::json;

void TaskConfig::validate() const {
    if (label_set.size() != kLabelCount) {
        throw std::invalid_argument("label set must hold exactly 15 emojis, got " +
                                    std::to_string(label_set.size()));
    }
    std::set<std::u32string> distinct(label_set.begin(), label_set.end());
    if (distinct.size() != label_set.size()) {
        throw std::invalid_argument("label set contains duplicates");
    }
    for (const auto& l : label_set) {
        const std::string utf8 = text::encode_utf8(l);
        const auto occ = text::extract_emojis(utf8);
        if (l.empty() || occ.size() != 1 || occ[0].base != l) {
            throw std::invalid_argument("label '" + utf8 +
                                        "' is not a single base emoji without modifiers");
        }
    }
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
        throw std::invalid_argument("holdout fraction must lie in (0, 1)");
    }
}

std::vector<std::u32string> default_label_set() {
    return {U"\U0001F60D", U"\U0001F62D", U"❤",     U"\U0001F914", U"\U0001F60A",
            U"\U0001F644", U"\U0001F621", U"\U0001F60E", U"\U0001F64F", U"\U0001F44F",
            U"\U0001F525", U"\U0001F4AA", U"\U0001F618", U"\U0001F605", U"\U0001F389"};
}

std::vector<std::u32string> parse_label_set(std::string_view data) {
    const json doc = json::parse(data);
    if (!doc.is_array()) throw std::invalid_argument("label map must be a JSON array");
    std::vector<std::u32string> labels;
    for (const auto& item : doc) {
        std::string s;
        if (item.is_string()) {
            s = item.get<std::string>();
        } else if (item.is_object() && item.contains("emoji")) {
            s = item.at("emoji").get<std::string>();
        } else {
            throw std::invalid_argument("label map entries must be strings");
        }
        if (s.rfind("U+", 0) == 0) {
            std::u32string cps;
            std::size_t pos = 0;
            while (pos < s.size()) {
                while (pos < s.size() && s[pos] == ' ') ++pos;
                if (pos >= s.size()) break;
                if (s.compare(pos, 2, "U+") != 0) throw std::invalid_argument("bad code point in " + s);
                std::size_t used = 0;
                cps.push_back(static_cast<char32_t>(std::stoul(s.substr(pos + 2), &used, 16)));
                pos += 2 + used;
            }
            labels.push_back(text::emoji_base(cps));
        } else {
            labels.push_back(text::emoji_base(text::decode_utf8(s)));
        }
    }
    return labels;
}

std::string label_map_json(std::span<const std::u32string> label_set) {
    json out = json::array();
    for (std::size_t i = 0; i < label_set.size(); ++i) {
        out.push_back({{"index", i},
                       {"emoji", text::encode_utf8(label_set[i])},
                       {"codepoints", text::codepoint_notation(label_set[i])}});
    }
    return out.dump(2) + "\n";
}

namespace {

constexpr char32_t kZwj = 0x200D;

bool grapheme_contains(std::u32string_view grapheme, const std::u32string& label) {
    if (text::emoji_base(grapheme) == label) return true;
    std::size_t start = 0;
    while (start <= grapheme.size()) {
        std::size_t end = grapheme.find(kZwj, start);
        if (end == std::u32string_view::npos) end = grapheme.size();
        if (text::emoji_base(grapheme.substr(start, end - start)) == label) return true;
        start = end + 1;
    }
    return false;
}

// Calls fn(begin, length) for each emoji grapheme of s.
template <typename Fn>
void for_each_emoji(std::u32string_view s, Fn&& fn) {
    std::size_t i = 0;
    while (i < s.size()) {
        const std::size_t n = text::emoji_length_at(s, i);
        if (n > 0) {
            fn(i, n);
            i += n;
        } else {
            ++i;
        }
    }
}

}  // namespace

std::vector<std::size_t> labels_in(std::string_view text,
                                   std::span<const std::u32string> label_set) {
    const std::u32string s = text::decode_utf8(text);
    std::vector<bool> hit(label_set.size(), false);
    for_each_emoji(s, [&](std::size_t b, std::size_t n) {
        const auto g = std::u32string_view(s).substr(b, n);
        for (std::size_t l = 0; l < label_set.size(); ++l) {
            if (!hit[l] && grapheme_contains(g, label_set[l])) hit[l] = true;
        }
    });
    std::vector<std::size_t> out;
    for (std::size_t l = 0; l < hit.size(); ++l) {
        if (hit[l]) out.push_back(l);
    }
    return out;
}

std::string mask_label(std::string_view text, const std::u32string& label) {
    const std::u32string s = text::decode_utf8(text);
    std::u32string out;
    out.reserve(s.size());
    std::size_t copied = 0;
    for_each_emoji(s, [&](std::size_t b, std::size_t n) {
        if (grapheme_contains(std::u32string_view(s).substr(b, n), label)) {
            out.append(s, copied, b - copied);
            out.push_back(U' ');
            copied = b + n;
        }
    });
    out.append(s, copied, std::u32string::npos);
    std::u32string collapsed;
    for (char32_t c : out) {
        if (c == U' ' && (collapsed.empty() || collapsed.back() == U' ')) continue;
        collapsed.push_back(c);
    }
    if (!collapsed.empty() && collapsed.back() == U' ') collapsed.pop_back();
    return text::encode_utf8(collapsed);
}

TaskBuilder::TaskBuilder(TaskConfig config) : config_(std::move(config)) { config_.validate(); }

void TaskBuilder::add(const TweetRecord& record) {
    ++seen_;
    const auto labels = labels_in(record.text, config_.label_set);
    if (labels.empty()) {
        ++without_label_;
        return;
    }
    if (labels.size() > 1) {
        ++several_labels_;
        return;
    }
    auto& buckets = buckets_[record.region];
    if (buckets.empty()) buckets.resize(config_.label_set.size());
    buckets[labels[0]].push_back(
        {record.id, mask_label(record.text, config_.label_set[labels[0]]), labels[0], record.region});
}

TaskSplit TaskBuilder::split() const {
    if (buckets_.empty()) {
        throw std::runtime_error("emoji15: no record contains exactly one label emoji");
    }
    TaskSplit out;
    out.records_seen = seen_;
    out.records_without_label = without_label_;
    out.records_with_several_labels = several_labels_;

    std::mt19937_64 rng(config_.seed);
    for (const auto& [region, buckets] : buckets_) {
        std::size_t total = 0;
        for (const auto& b : buckets) total += b.size();
        if (total < config_.min_examples_per_region) {
            out.dropped_regions[region] = total;
            continue;
        }
        RegionSplit& split = out.regions[region];
        for (const auto& bucket : buckets) {
            std::vector<std::size_t> order(bucket.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::shuffle(order.begin(), order.end(), rng);
            const auto n_test = static_cast<std::size_t>(
                std::floor(double(bucket.size()) * config_.holdout_fraction));
            std::vector<std::size_t> test(order.begin(), order.begin() + n_test);
            std::vector<std::size_t> train(order.begin() + n_test, order.end());
            std::sort(test.begin(), test.end());
            std::sort(train.begin(), train.end());
            for (auto i : train) split.train.push_back(bucket[i]);
            for (auto i : test) split.test.push_back(bucket[i]);
        }
    }
    return out;
}

TaskSplit build_task(std::span<const TweetRecord> records, const TaskConfig& config) {
    TaskBuilder builder(config);
    for (const auto& r : records) builder.add(r);
    return builder.split();
}

std::string examples_to_ndjson(std::span<const LabeledExample> examples) {
    std::string out;
    for (const auto& e : examples) {
        json j = {{"text", e.text}, {"label", e.label}, {"id", e.id}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<LabeledExample> examples_from_ndjson(std::string_view data, const RegionCode& region) {
    std::vector<LabeledExample> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < data.size()) {
        std::size_t end = data.find('\n', pos);
        if (end == std::string_view::npos) end = data.size();
        const auto line = data.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            out.push_back({j.at("id").get<std::uint64_t>(), j.at("text").get<std::string>(),
                           j.at("label").get<std::size_t>(), region});
        } catch (const json::exception& e) {
            throw std::runtime_error("examples line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<std::size_t> parse_predictions(std::string_view data) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < data.size()) {
        std::size_t end = data.find('\n', pos);
        if (end == std::string_view::npos) end = data.size();
        std::string line(data.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        std::size_t used = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(line, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != line.size() || line[0] == '-') {
            throw std::invalid_argument("prediction line " + std::to_string(line_no) +
                                        " is not a label index: '" + line + "'");
        }
        out.push_back(v);
    }
    return out;
}

double evaluate(std::span<const std::size_t> predictions, std::span<const LabeledExample> gold) {
    if (predictions.size() != gold.size()) {
        throw std::invalid_argument("evaluate: " + std::to_string(predictions.size()) +
                                    " predictions for " + std::to_string(gold.size()) +
                                    " examples");
    }
    if (gold.empty()) throw std::invalid_argument("evaluate: no examples");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) hits += predictions[i] == gold[i].label;
    return double(hits) / double(gold.size());
}

RankReport rank_models(const AccuracyMatrix& m) {
    if (m.accuracy.size() != m.models.size()) {
        throw std::invalid_argument("rank_models: accuracy rows do not match models");
    }
    for (const auto& row : m.accuracy) {
        if (row.size() != m.regions.size()) {
            throw std::invalid_argument("rank_models: accuracy columns do not match regions");
        }
    }
    RankReport r;
    r.models = m.models;
    r.regions = m.regions;
    r.ranks.assign(m.models.size(), std::vector<int>(m.regions.size(), 0));
    for (std::size_t c = 0; c < m.regions.size(); ++c) {
        for (std::size_t i = 0; i < m.models.size(); ++i) {
            int better = 0;
            for (std::size_t j = 0; j < m.models.size(); ++j) {
                better += m.accuracy[j][c] > m.accuracy[i][c];
            }
            r.ranks[i][c] = better + 1;
        }
        std::vector<std::size_t> order(m.models.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return r.ranks[a][c] != r.ranks[b][c] ? r.ranks[a][c] < r.ranks[b][c]
                                                  : m.models[a] < m.models[b];
        });
        auto& top = r.top5[m.regions[c]];
        for (std::size_t k = 0; k < order.size() && k < 5; ++k) top.push_back(m.models[order[k]]);

        auto own = std::find(m.models.begin(), m.models.end(), m.regions[c]);
        if (own != m.models.end()) {
            r.local_rank[m.regions[c]] = r.ranks[std::size_t(own - m.models.begin())][c];
        }
    }
    return r;
}

std::vector<double> average_rank(const std::vector<std::vector<int>>& ranks) {
    std::vector<double> out;
    out.reserve(ranks.size());
    for (std::size_t m = 0; m < ranks.size(); ++m) {
        if (ranks[m].empty()) throw std::invalid_argument("average_rank: model without ranks");
        long long sum = 0;
        for (int r : ranks[m]) {
            if (r < 1) {
                throw std::invalid_argument("average_rank: missing rank for model " +
                                            std::to_string(m));
            }
            sum += r;
        }
        out.push_back(double(sum) / double(ranks[m].size()));
    }
    if (!ranks.empty()) {
        for (const auto& row : ranks) {
            if (row.size() != ranks.front().size()) {
                throw std::invalid_argument("average_rank: models ranked on different regions");
            }
        }
    }
    return out;
}

EvalReport make_report(AccuracyMatrix accuracy) {
    EvalReport rep;
    rep.ranks = rank_models(accuracy);
    rep.avg_rank = average_rank(rep.ranks.ranks);
    rep.accuracy = std::move(accuracy);
    return rep;
}

std::string EvalReport::to_json() const {
    json acc = json::object(), rk = json::object(), avg = json::object();
    for (std::size_t m = 0; m < accuracy.models.size(); ++m) {
        json a = json::object(), r = json::object();
        for (std::size_t c = 0; c < accuracy.regions.size(); ++c) {
            a[accuracy.regions[c]] = accuracy.accuracy[m][c];
            r[accuracy.regions[c]] = ranks.ranks[m][c];
        }
        acc[accuracy.models[m]] = a;
        rk[accuracy.models[m]] = r;
        avg[accuracy.models[m]] = avg_rank[m];
    }
    json out = {{"models", accuracy.models}, {"regions", accuracy.regions},
                {"accuracy", acc},           {"ranks", rk},
                {"local_rank", ranks.local_rank}, {"avg_rank", avg},
                {"top5", ranks.top5}};
    return out.dump(2) + "\n";
}

CentroidPredictor::CentroidPredictor(std::span<const LabeledExample> train,
                                     const EmbeddingTable& embeddings,
                                     text::NormalizationConfig config)
    : embeddings_(&embeddings), config_(config) {
    if (train.empty()) throw std::invalid_argument("centroid predictor: empty train set");
    std::size_t labels = 0;
    for (const auto& e : train) labels = std::max(labels, e.label + 1);
    std::vector<std::size_t> frequency(labels, 0), embedded(labels, 0);
    centroids_.assign(labels, std::vector<double>(embeddings.dim(), 0.0));
    std::vector<double> v;
    for (const auto& e : train) {
        ++frequency[e.label];
        if (!embed(e.text, v)) continue;
        ++embedded[e.label];
        for (std::size_t d = 0; d < v.size(); ++d) centroids_[e.label][d] += v[d];
    }
    for (std::size_t l = 0; l < labels; ++l) {
        if (embedded[l] == 0) {
            centroids_[l].clear();
            continue;
        }
        for (double& x : centroids_[l]) x /= double(embedded[l]);
        if (std::all_of(centroids_[l].begin(), centroids_[l].end(), [](double x) { return x == 0.0; })) {
            centroids_[l].clear();
        }
    }
    majority_ = std::size_t(std::max_element(frequency.begin(), frequency.end()) - frequency.begin());
}

bool CentroidPredictor::embed(std::string_view text, std::vector<double>& out) const {
    out.assign(embeddings_->dim(), 0.0);
    std::size_t n = 0;
    for (const auto& tok : text::tokenize(text::normalize(text, config_))) {
        auto row = embeddings_->find(tok.surface);
        if (!row) continue;
        auto v = embeddings_->vector(*row);
        for (std::size_t d = 0; d < v.size(); ++d) out[d] += v[d];
        ++n;
    }
    if (n == 0) return false;
    for (double& x : out) x /= double(n);
    return std::any_of(out.begin(), out.end(), [](double x) { return x != 0.0; });
}

std::size_t CentroidPredictor::predict(std::string_view text) const {
    std::vector<double> v;
    if (!embed(text, v)) return majority_;
    std::size_t best = majority_;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < centroids_.size(); ++l) {
        if (centroids_[l].empty()) continue;
        const double d = cosine_distance(v, centroids_[l]);
        if (d < best_d) {
            best_d = d;
            best = l;
        }
    }
    return best;
}

std::vector<std::size_t> CentroidPredictor::predict_all(
    std::span<const LabeledExample> examples) const {
    std::vector<std::size_t> out;
    out.reserve(examples.size());
    for (const auto& e : examples) out.push_back(predict(e.text));
    return out;
}

}  // namespace dialect::emoji15

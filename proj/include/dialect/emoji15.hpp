#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dialect/embcompare.hpp"
#include "dialect/ingest.hpp"
#include "dialect/region.hpp"
#include "dialect/textnorm.hpp"

namespace dialect::emoji15 {

inline constexpr std::size_t kLabelCount = 15;

struct TaskConfig {
    /// Base emojis (no skin tone, no variation selector), index = label.
    std::vector<std::u32string> label_set;
    /// Fraction of each (region, label) bucket moved to the test split.
    double holdout_fraction = 0.5;
    std::uint64_t seed = 42;
    /// Regions with fewer labeled examples are dropped.
    std::size_t min_examples_per_region = 0;

    /// Throws std::invalid_argument on a label set that is not 15 distinct
    /// emojis or a holdout outside (0, 1).
    void validate() const;
};

/// Fifteen emotionally diverse emojis, excluding the single most used one
/// (face with tears of joy) and skin tones.
std::vector<std::u32string> default_label_set();

/// Parses a label map: a JSON array of emoji strings or of "U+XXXX" notations.
std::vector<std::u32string> parse_label_set(std::string_view json);
/// JSON array of {"index", "emoji", "codepoints"} objects in label order.
std::string label_map_json(std::span<const std::u32string> label_set);

struct LabeledExample {
    std::uint64_t id = 0;
    /// Source text with every occurrence of the label emoji removed.
    std::string text;
    std::size_t label = 0;
    RegionCode region;

    bool operator==(const LabeledExample&) const = default;
};

struct RegionSplit {
    std::vector<LabeledExample> train;
    std::vector<LabeledExample> test;
};

struct TaskSplit {
    std::map<RegionCode, RegionSplit> regions;
    /// Regions that had fewer than min_examples_per_region examples.
    std::map<RegionCode, std::size_t> dropped_regions;
    std::uint64_t records_seen = 0;
    std::uint64_t records_without_label = 0;
    std::uint64_t records_with_several_labels = 0;
};

/// Labels of the set that occur in `text`, counting emoji graphemes whose
/// base or any ZWJ component equals a label. Ascending label order.
std::vector<std::size_t> labels_in(std::string_view text, std::span<const std::u32string> label_set);

/// `text` with every emoji grapheme containing `label` removed and spaces collapsed.
std::string mask_label(std::string_view text, const std::u32string& label);

/// Incremental task builder: feed records, then split.
class TaskBuilder {
public:
    explicit TaskBuilder(TaskConfig config);
    /// Keeps the record iff exactly one label emoji occurs in it.
    void add(const TweetRecord& record);
    /// Stratified per (region, label) split. Throws std::runtime_error when no
    /// record carried a label.
    TaskSplit split() const;

private:
    TaskConfig config_;
    std::map<RegionCode, std::vector<std::vector<LabeledExample>>> buckets_;
    std::uint64_t seen_ = 0;
    std::uint64_t without_label_ = 0;
    std::uint64_t several_labels_ = 0;
};

TaskSplit build_task(std::span<const TweetRecord> records, const TaskConfig& config);

/// One {"text","label","id"} JSON object per line.
std::string examples_to_ndjson(std::span<const LabeledExample> examples);
std::vector<LabeledExample> examples_from_ndjson(std::string_view data, const RegionCode& region);

/// One label index per line.
std::vector<std::size_t> parse_predictions(std::string_view data);

/// Fraction of exact matches. Throws std::invalid_argument on a length
/// mismatch or empty input.
double evaluate(std::span<const std::size_t> predictions, std::span<const LabeledExample> gold);

/// Model×region accuracy table. Model codes are region codes or "ALL".
struct AccuracyMatrix {
    std::vector<std::string> models;
    std::vector<std::string> regions;
    /// accuracy[m][r]
    std::vector<std::vector<double>> accuracy;
};

struct RankReport {
    std::vector<std::string> models;
    std::vector<std::string> regions;
    /// ranks[m][r]; competition ranking, 1 is best.
    std::vector<std::vector<int>> ranks;
    /// region -> rank of the model with the same code, where one exists.
    std::map<std::string, int> local_rank;
    /// region -> up to five best models (rank, then model code).
    std::map<std::string, std::vector<std::string>> top5;
};

/// Per-region ranks with ties sharing the minimum rank.
RankReport rank_models(const AccuracyMatrix& matrix);

/// Mean rank per model over all regions. `ranks[m][r]` must be >= 1; zero or
/// negative entries are treated as missing and raise std::invalid_argument.
std::vector<double> average_rank(const std::vector<std::vector<int>>& ranks);

struct EvalReport {
    AccuracyMatrix accuracy;
    RankReport ranks;
    std::vector<double> avg_rank;

    std::string to_json() const;
};

EvalReport make_report(AccuracyMatrix accuracy);

/// Nearest-centroid baseline over mean token embeddings.
class CentroidPredictor {
public:
    /// Tokens are produced by tokenize(normalize(text, config)).
    CentroidPredictor(std::span<const LabeledExample> train, const EmbeddingTable& embeddings,
                      text::NormalizationConfig config = {});

    /// Label of the nearest centroid by cosine; the majority train label when
    /// no token of `text` has a vector.
    std::size_t predict(std::string_view text) const;
    std::vector<std::size_t> predict_all(std::span<const LabeledExample> examples) const;
    std::size_t majority_label() const noexcept { return majority_; }

private:
    bool embed(std::string_view text, std::vector<double>& out) const;

    const EmbeddingTable* embeddings_;
    text::NormalizationConfig config_;
    std::vector<std::vector<double>> centroids_;  // empty when a label has no embeddable text
    std::size_t majority_ = 0;
};

}  // namespace dialect::emoji15

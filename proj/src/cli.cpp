#include "dialect/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "dialect/affinity.hpp"
#include "dialect/embcompare.hpp"
#include "dialect/emoji15.hpp"
#include "dialect/ingest.hpp"
#include "dialect/io.hpp"
#include "dialect/parallel.hpp"
#include "dialect/textnorm.hpp"
#include "dialect/vocab.hpp"

namespace dialect::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr std::size_t kChunkRecords = 8192;

struct Options {
    std::vector<std::string> inputs;
    std::string out = ".";
    std::string profile = "corpus";
    std::uint64_t seed = 42;
    std::size_t threads = 1;
    std::vector<std::string> extra_regions;
    std::vector<std::string> source_deny;
    std::string require_lang;

    // normalization
    bool mask_emojis = false;
    bool keep_case = false;
    bool keep_diacritics = false;
    bool drop_punct = false;

    std::uint64_t min_count = 5;
    std::size_t samples = kDefaultHeapsSamples;
    std::uint64_t rank_lo = 1;
    std::uint64_t rank_hi = 0;
    std::size_t k = kDefaultNeighbors;
    std::size_t min_regions = kDefaultMinRegions;
    bool signatures = false;
    std::size_t top_k = kDefaultEmojiTopK;
    std::string labels;
    double holdout = 0.5;
    std::size_t min_examples = 0;
    std::string task_dir;
    std::string predictions_dir;
    std::vector<std::string> embeddings;
    std::uint64_t cutoff_n = 0;
    double cutoff_alpha = 2.0;

    text::NormalizationConfig normalization() const {
        text::NormalizationConfig c;
        c.lowercase = !keep_case;
        c.strip_diacritics = !keep_diacritics;
        c.mask_emojis = mask_emojis;
        c.keep_punctuation = !drop_punct;
        return c;
    }

    FilterProfile filter_profile() const {
        FilterProfile p = FilterProfile::named(profile);
        p.source_denylist = source_deny;
        if (!require_lang.empty()) p.require_lang = require_lang;
        return p;
    }

    RegionSet region_set() const {
        RegionSet set;
        for (const auto& r : extra_regions) set.add(RegionCode(r));
        return set;
    }
};

const std::vector<std::string> kCommands = {"ingest-stats", "vocab",        "laws",
                                            "lexical-affinity", "emoji-stats", "emb-affinity",
                                            "emoji15-build", "emoji15-eval", "cutoff"};

std::string usage() {
    std::string u =
        "usage: dialect <command> [options]\n\n"
        "commands:\n"
        "  ingest-stats      filter corpora and report record counts\n"
        "  vocab             per-region vocabularies (token<TAB>frequency)\n"
        "  laws              Heaps and Zipf exponent fits per region\n"
        "  lexical-affinity  cosine-distance matrix of regional vocabularies\n"
        "  emoji-stats       most used emojis per region\n"
        "  emb-affinity      kNN-signature distance matrix of regional embeddings\n"
        "  emoji15-build     build the Emoji-15 train/test splits\n"
        "  emoji15-eval      score predictions and rank models\n"
        "  cutoff            minimum token frequency for N samples\n\n"
        "run 'dialect <command> --help' for the options of a command\n";
    return u;
}

/// Files written by a command; removed again if the command fails.
class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}
    ~Outputs() {
        if (committed_) return;
        for (const auto& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

    void write(const std::string& name, const std::string& contents) {
        fs::create_directories(dir_);
        const fs::path p = dir_ / name;
        write_file_atomic(p, contents);
        written_.push_back(p);
    }
    void commit() { committed_ = true; }
    json names() const {
        json out = json::array();
        for (const auto& p : written_) out.push_back(p.filename().string());
        return out;
    }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
    bool committed_ = false;
};

struct Context {
    const Options& opt;
    std::ostream& out;
    std::ostream& err;
    Outputs outputs;
    json summary = json::object();
};

std::vector<std::string> tokens_of(std::string_view raw, const text::NormalizationConfig& config) {
    std::vector<std::string> out;
    for (auto& t : text::tokenize(text::normalize(raw, config))) out.push_back(std::move(t.surface));
    return out;
}

void require_inputs(const Options& opt) {
    if (opt.inputs.empty()) throw CLI::ValidationError("--input", "at least one input is required");
}

/// Streams kept records of every input in order. `map` runs on up to
/// `threads` workers per chunk; `reduce` then sees each record with its
/// mapped value in input order, so results do not depend on the thread count.
template <typename Map, typename Reduce>
IngestStats scan_corpus(Context& ctx, Map&& map, Reduce&& reduce) {
    using Mapped = std::invoke_result_t<Map&, const TweetRecord&>;
    const FilterProfile profile = ctx.opt.filter_profile();
    const RegionSet regions = ctx.opt.region_set();
    IngestStats total;
    std::vector<TweetRecord> chunk;
    chunk.reserve(kChunkRecords);
    std::vector<Mapped> mapped;
    const auto flush = [&] {
        mapped.assign(chunk.size(), Mapped{});
        parallel_for(chunk.size(), ctx.opt.threads, [&](std::size_t i) { mapped[i] = map(chunk[i]); });
        for (std::size_t i = 0; i < chunk.size(); ++i) reduce(chunk[i], std::move(mapped[i]));
        chunk.clear();
    };
    json files = json::array();
    for (const auto& path : ctx.opt.inputs) {
        CorpusReader reader(path, profile, regions);
        TweetRecord rec;
        while (reader.next(rec)) {
            chunk.push_back(std::move(rec));
            if (chunk.size() == kChunkRecords) flush();
        }
        const auto& s = reader.stats();
        if (s.malformed > 0) {
            ctx.err << "warning: " << path << ": " << s.malformed
                    << " malformed line(s) skipped, first at line "
                    << reader.malformed_lines().front() << "\n";
        }
        files.push_back({{"path", path},
                         {"lines", s.lines},
                         {"kept", s.kept},
                         {"filtered", s.filtered},
                         {"malformed", s.malformed}});
        total += s;
    }
    flush();
    ctx.summary["files"] = files;
    ctx.summary["lines"] = total.lines;
    ctx.summary["kept"] = total.kept;
    ctx.summary["filtered"] = total.filtered;
    ctx.summary["malformed"] = total.malformed;
    return total;
}

struct RegionCounters {
    std::vector<RegionCode> order;  // first appearance
    std::map<RegionCode, TokenCounter> counters;

    TokenCounter& at(const RegionCode& r) {
        auto [it, inserted] = counters.try_emplace(r);
        if (inserted) order.push_back(r);
        return it->second;
    }
};

RegionCounters count_regions(Context& ctx) {
    RegionCounters rc;
    const auto config = ctx.opt.normalization();
    scan_corpus(
        ctx, [&](const TweetRecord& r) { return tokens_of(r.text, config); },
        [&](const TweetRecord& r, std::vector<std::string>&& tokens) {
            rc.at(r.region).add_all(tokens);
        });
    return rc;
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

json law_json(const LawFit& f) {
    return {{"exponent", f.exponent},
            {"intercept", f.intercept},
            {"r_squared", f.r_squared},
            {"points", f.points}};
}

void cmd_ingest_stats(Context& ctx) {
    require_inputs(ctx.opt);
    std::map<std::string, std::uint64_t> per_region;
    scan_corpus(
        ctx, [](const TweetRecord&) { return 0; },
        [&](const TweetRecord& r, int) { ++per_region[r.region.str()]; });
    json report = ctx.summary;
    report["profile"] = ctx.opt.profile;
    report["regions"] = per_region;
    ctx.outputs.write("ingest_stats.json", report.dump(2) + "\n");
}

void cmd_vocab(Context& ctx) {
    require_inputs(ctx.opt);
    auto rc = count_regions(ctx);
    json regions = json::object();
    for (const auto& [region, counter] : rc.counters) {
        const auto vocab = make_vocabulary(counter, region, ctx.opt.min_count);
        ctx.outputs.write("vocab_" + region.str() + ".tsv", vocab.to_tsv());
        regions[region.str()] = {{"total_tokens", vocab.total_tokens},
                                 {"distinct_tokens", counter.counts().size()},
                                 {"vocabulary", vocab.counts.size()},
                                 {"min_count", vocab.min_count}};
    }
    ctx.outputs.write("vocab_summary.json", regions.dump(2) + "\n");
    ctx.summary["regions"] = regions;
}

void cmd_laws(Context& ctx) {
    require_inputs(ctx.opt);
    if (ctx.opt.min_count < 1) throw CLI::ValidationError("--min-count", "must be >= 1");
    struct Stream {
        std::unordered_map<std::string, std::uint32_t> ids;
        std::vector<std::string> tokens;
        std::vector<std::uint64_t> freq;
        std::vector<std::uint32_t> sequence;
    };
    std::map<RegionCode, Stream> streams;
    const auto config = ctx.opt.normalization();
    scan_corpus(
        ctx, [&](const TweetRecord& r) { return tokens_of(r.text, config); },
        [&](const TweetRecord& r, std::vector<std::string>&& tokens) {
            auto& s = streams[r.region];
            for (auto& t : tokens) {
                auto [it, inserted] = s.ids.try_emplace(t, static_cast<std::uint32_t>(s.tokens.size()));
                if (inserted) {
                    s.tokens.push_back(std::move(t));
                    s.freq.push_back(0);
                }
                ++s.freq[it->second];
                s.sequence.push_back(it->second);
            }
        });

    RankRange range;
    range.lo = ctx.opt.rank_lo;
    if (ctx.opt.rank_hi > 0) range.hi = ctx.opt.rank_hi;

    json laws = json::object();
    for (auto& [region, s] : streams) {
        if (s.sequence.size() < 2) {
            ctx.err << "warning: " << region.str() << ": fewer than 2 tokens, skipped\n";
            continue;
        }
        RegionVocabulary vocab;
        vocab.region = region;
        vocab.total_tokens = s.sequence.size();
        vocab.min_count = ctx.opt.min_count;
        for (std::size_t i = 0; i < s.tokens.size(); ++i) {
            if (s.freq[i] >= ctx.opt.min_count) vocab.counts.emplace(s.tokens[i], s.freq[i]);
        }
        const auto curve = heaps_curve<std::uint32_t>(s.sequence, ctx.opt.samples);
        const LawFit heaps = fit_heaps(curve);
        std::string curve_tsv = "n\tvocabulary\n";
        for (const auto& p : curve) {
            curve_tsv += std::to_string(p.n) + "\t" + std::to_string(p.vocabulary) + "\n";
        }
        ctx.outputs.write("heaps_" + region.str() + ".tsv", curve_tsv);

        json entry = {{"total_tokens", vocab.total_tokens},
                      {"distinct_tokens", s.tokens.size()},
                      {"vocabulary", vocab.counts.size()},
                      {"heaps", law_json(heaps)}};
        try {
            entry["zipf"] = law_json(fit_zipf(zipf_ranks(vocab), range));
        } catch (const std::invalid_argument& e) {
            ctx.err << "warning: " << region.str() << ": no Zipf fit (" << e.what() << ")\n";
            entry["zipf"] = nullptr;
        }
        laws[region.str()] = entry;
    }
    ctx.outputs.write("laws.json", laws.dump(2) + "\n");
    ctx.summary["laws"] = laws;
}

void cmd_lexical_affinity(Context& ctx) {
    require_inputs(ctx.opt);
    auto rc = count_regions(ctx);
    std::vector<RegionVocabulary> vocabs;
    for (const auto& region : rc.order) {
        vocabs.push_back(make_vocabulary(rc.counters.at(region), region, ctx.opt.min_count));
    }
    const auto result = lexical_affinity(vocabs, ctx.opt.threads);
    json excluded = json::array();
    for (const auto& r : result.excluded) {
        ctx.err << "warning: " << r.str() << ": empty vocabulary after cutoff, excluded\n";
        excluded.push_back(r.str());
    }
    ctx.outputs.write("lexical_affinity.csv", result.matrix.to_csv());
    ctx.summary["excluded"] = excluded;
}

void cmd_emoji_stats(Context& ctx) {
    require_inputs(ctx.opt);
    std::map<RegionCode, EmojiCounter> counters;
    scan_corpus(
        ctx, [](const TweetRecord& r) { return text::extract_emojis(r.text); },
        [&](const TweetRecord& r, std::vector<text::EmojiOccurrence>&& occ) {
            auto& c = counters[r.region];
            for (const auto& o : occ) c.add(o);
        });
    std::vector<EmojiRanking> rankings;
    for (const auto& [region, counter] : counters) {
        rankings.push_back(counter.ranking(region, ctx.opt.top_k));
    }
    ctx.outputs.write("emoji_ranking.csv", emoji_rankings_csv(rankings));
}

/// "MX=path" or a path whose file name carries a known region code.
std::pair<RegionCode, std::string> region_input(const std::string& arg, const RegionSet& regions) {
    if (auto eq = arg.find('='); eq == 2 && RegionCode::is_well_formed(arg.substr(0, 2))) {
        return {RegionCode(arg.substr(0, 2)), arg.substr(3)};
    }
    if (auto eq = arg.find('='); eq == 3 && arg.substr(0, 3) == "ALL") {
        throw CLI::ValidationError("--input", "ALL is not a region: " + arg);
    }
    const std::string stem = fs::path(arg).stem().string();
    for (std::size_t i = 0; i + 2 <= stem.size(); ++i) {
        const bool left = i == 0 || !std::isalpha(static_cast<unsigned char>(stem[i - 1]));
        const bool right = i + 2 == stem.size() || !std::isalpha(static_cast<unsigned char>(stem[i + 2]));
        if (left && right && regions.contains(stem.substr(i, 2))) {
            return {RegionCode(stem.substr(i, 2)), arg};
        }
    }
    throw CLI::ValidationError("--input", "cannot infer a region for '" + arg +
                                              "'; use REGION=path");
}

void cmd_emb_affinity(Context& ctx) {
    require_inputs(ctx.opt);
    const RegionSet regions = ctx.opt.region_set();
    std::vector<std::pair<RegionCode, std::string>> specs;
    for (const auto& in : ctx.opt.inputs) specs.push_back(region_input(in, regions));

    std::vector<std::optional<EmbeddingTable>> loaded(specs.size());
    std::vector<EmbeddingLoadReport> reports(specs.size());
    parallel_for(specs.size(), ctx.opt.threads, [&](std::size_t i) {
        loaded[i] = load_embeddings(specs[i].second, specs[i].first, &reports[i]);
    });
    std::vector<EmbeddingTable> tables;
    json loads = json::array();
    for (std::size_t i = 0; i < specs.size(); ++i) {
        tables.push_back(std::move(*loaded[i]));
        loads.push_back({{"region", specs[i].first.str()},
                         {"path", specs[i].second},
                         {"rows", reports[i].rows},
                         {"zero_vectors_skipped", reports[i].zero_vectors_skipped},
                         {"duplicates_skipped", reports[i].duplicates_skipped}});
    }
    const auto common = common_tokens(tables, ctx.opt.min_regions);
    std::string common_txt;
    for (const auto& t : common->tokens()) common_txt += t + "\n";
    ctx.outputs.write("common_tokens.txt", common_txt);

    std::vector<RegionSignature> sigs;
    json entries = json::object();
    for (const auto& table : tables) {
        try {
            const auto graph = knn_graph(table, common, ctx.opt.k, ctx.opt.threads);
            sigs.push_back(signature(graph));
        } catch (const std::invalid_argument& e) {
            ctx.err << "warning: " << table.region().str() << ": " << e.what()
                    << "; region excluded\n";
            sigs.push_back({table.region(), common, SparseVector{}});
        }
        entries[table.region().str()] = sigs.back().entries.size();
        if (ctx.opt.signatures && !sigs.back().entries.empty()) {
            ctx.outputs.write("signature_" + table.region().str() + ".tsv", sigs.back().to_tsv());
        }
    }
    const auto result = semantic_affinity(sigs, ctx.opt.threads);
    json excluded = json::array();
    for (const auto& r : result.excluded) excluded.push_back(r.str());
    ctx.outputs.write("semantic_affinity.csv", result.matrix.to_csv());
    ctx.summary["tables"] = loads;
    ctx.summary["common_tokens"] = common->size();
    ctx.summary["signature_entries"] = entries;
    ctx.summary["excluded"] = excluded;
}

void cmd_emoji15_build(Context& ctx) {
    require_inputs(ctx.opt);
    emoji15::TaskConfig config;
    config.label_set = ctx.opt.labels.empty() ? emoji15::default_label_set()
                                              : emoji15::parse_label_set(read_file(ctx.opt.labels));
    config.holdout_fraction = ctx.opt.holdout;
    config.seed = ctx.opt.seed;
    config.min_examples_per_region = ctx.opt.min_examples;
    emoji15::TaskBuilder builder(config);
    scan_corpus(
        ctx, [](const TweetRecord&) { return 0; },
        [&](const TweetRecord& r, int) { builder.add(r); });
    const auto split = builder.split();

    ctx.outputs.write("label_map.json", emoji15::label_map_json(config.label_set));
    json regions = json::object();
    for (const auto& [region, rs] : split.regions) {
        ctx.outputs.write(region.str() + ".train.jsonl", emoji15::examples_to_ndjson(rs.train));
        ctx.outputs.write(region.str() + ".test.jsonl", emoji15::examples_to_ndjson(rs.test));
        std::vector<std::size_t> train_counts(emoji15::kLabelCount, 0), test_counts(emoji15::kLabelCount, 0);
        for (const auto& e : rs.train) ++train_counts[e.label];
        for (const auto& e : rs.test) ++test_counts[e.label];
        regions[region.str()] = {{"train", rs.train.size()},
                                 {"test", rs.test.size()},
                                 {"train_per_label", train_counts},
                                 {"test_per_label", test_counts}};
    }
    json dropped = json::object();
    for (const auto& [region, n] : split.dropped_regions) dropped[region.str()] = n;
    json report = {{"regions", regions},
                   {"dropped_regions", dropped},
                   {"records_seen", split.records_seen},
                   {"records_without_label", split.records_without_label},
                   {"records_with_several_labels", split.records_with_several_labels},
                   {"seed", config.seed},
                   {"holdout", config.holdout_fraction}};
    ctx.outputs.write("emoji15_summary.json", report.dump(2) + "\n");
    ctx.summary["task"] = report;
}

std::vector<emoji15::LabeledExample> read_split(const fs::path& dir, const std::string& region,
                                                const std::string& split) {
    const fs::path p = dir / (region + "." + split + ".jsonl");
    return emoji15::examples_from_ndjson(read_file(p), RegionCode(region));
}

void cmd_emoji15_eval(Context& ctx) {
    const fs::path task = ctx.opt.task_dir.empty() ? fs::path(ctx.opt.out) : fs::path(ctx.opt.task_dir);
    if (!fs::is_directory(task)) throw std::runtime_error("task directory not found: " + task.string());
    std::vector<std::string> regions;
    for (const auto& entry : fs::directory_iterator(task)) {
        const std::string name = entry.path().filename().string();
        if (name.size() == 13 && name.ends_with(".test.jsonl") &&
            RegionCode::is_well_formed(name.substr(0, 2))) {
            regions.push_back(name.substr(0, 2));
        }
    }
    std::sort(regions.begin(), regions.end());
    if (regions.empty()) throw std::runtime_error("no <REGION>.test.jsonl files in " + task.string());

    std::map<std::string, std::vector<emoji15::LabeledExample>> gold;
    for (const auto& r : regions) gold[r] = read_split(task, r, "test");

    // model -> region -> predictions
    std::map<std::string, std::map<std::string, std::vector<std::size_t>>> predictions;

    for (const auto& arg : ctx.opt.embeddings) {
        const auto eq = arg.find('=');
        if (eq == std::string::npos) {
            throw CLI::ValidationError("--embedding", "expected MODEL=path, got '" + arg + "'");
        }
        const std::string model = arg.substr(0, eq);
        if (model != "ALL" && !RegionCode::is_well_formed(model)) {
            throw CLI::ValidationError("--embedding", "model must be a region code or ALL");
        }
        std::vector<emoji15::LabeledExample> train;
        for (const auto& r : regions) {
            if (model != "ALL" && r != model) continue;
            auto part = read_split(task, r, "train");
            train.insert(train.end(), part.begin(), part.end());
        }
        if (train.empty()) throw std::runtime_error("no train split for model " + model);
        const auto table =
            load_embeddings(arg.substr(eq + 1), RegionCode(model == "ALL" ? "ZZ" : model));
        const emoji15::CentroidPredictor predictor(train, table, ctx.opt.normalization());
        for (const auto& r : regions) {
            auto& slot = predictions[model][r];
            slot.resize(gold[r].size());
            parallel_for(gold[r].size(), ctx.opt.threads,
                         [&](std::size_t i) { slot[i] = predictor.predict(gold[r][i].text); });
        }
    }

    if (!ctx.opt.predictions_dir.empty()) {
        for (const auto& entry : fs::directory_iterator(ctx.opt.predictions_dir)) {
            const std::string name = entry.path().filename().string();
            if (!name.ends_with(".txt")) continue;
            const std::string stem = name.substr(0, name.size() - 4);
            const auto dot = stem.find('.');
            if (dot == std::string::npos) continue;
            const std::string model = stem.substr(0, dot);
            const std::string region = stem.substr(dot + 1);
            if (!gold.count(region)) continue;
            predictions[model][region] = emoji15::parse_predictions(read_file(entry.path()));
        }
    }
    if (predictions.empty()) {
        throw CLI::ValidationError("emoji15-eval", "no predictions: pass --predictions or --embedding");
    }

    emoji15::AccuracyMatrix matrix;
    matrix.regions = regions;
    for (const auto& [model, per_region] : predictions) {
        matrix.models.push_back(model);
        std::vector<double> row;
        for (const auto& r : regions) {
            auto it = per_region.find(r);
            if (it == per_region.end()) {
                throw std::runtime_error("model " + model + " has no predictions for region " + r);
            }
            row.push_back(emoji15::evaluate(it->second, gold[r]));
        }
        matrix.accuracy.push_back(std::move(row));
    }
    const auto report = emoji15::make_report(std::move(matrix));
    ctx.outputs.write("eval_report.json", report.to_json());
    ctx.summary["models"] = report.accuracy.models;
    ctx.summary["regions"] = report.accuracy.regions;
}

void cmd_cutoff(Context& ctx) {
    const double f = min_frequency_cutoff(ctx.opt.cutoff_n, ctx.opt.cutoff_alpha);
    ctx.out << fmt6(f) << "\n";
}

// key=value lines; '#' starts a comment. Keys name long options.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int line_no = 0;
    const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
            s = s.substr(1, s.size() - 2);
        }
        return s;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected key=value");
        }
        std::string key = trim(line.substr(0, eq));
        std::replace(key.begin(), key.end(), '_', '-');
        out.emplace_back(key, trim(line.substr(eq + 1)));
    }
    return out;
}

// Expands --config into arguments placed before the user's, skipping keys
// the user passed explicitly.
std::vector<std::string> apply_config(const std::vector<std::string>& args) {
    std::string config;
    std::vector<std::string> rest;
    std::set<std::string> given;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--config" && i + 1 < args.size()) {
            config = args[++i];
            continue;
        }
        if (a.rfind("--config=", 0) == 0) {
            config = a.substr(9);
            continue;
        }
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') - 2));
        rest.push_back(a);
    }
    std::vector<std::string> out{args.front()};
    if (!config.empty()) {
        for (const auto& [key, value] : read_config(config)) {
            if (given.count(key)) continue;
            if (value == "true") {
                out.push_back("--" + key);
            } else if (value != "false") {
                out.push_back("--" + key);
                out.push_back(value);
            }
        }
    }
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

void add_common(CLI::App& sub, Options& o, bool corpus_input) {
    sub.add_option("-i,--input", o.inputs, corpus_input ? "corpus file (NDJSON, optionally .gz)"
                                                        : "input file")
        ->allow_extra_args(false);
    sub.add_option("-o,--out", o.out, "output directory")->capture_default_str();
    sub.add_option("--seed", o.seed, "random seed")->capture_default_str();
    sub.add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    sub.add_option("--config", "key=value file; command-line flags override it");
    if (corpus_input) {
        sub.add_option("--profile", o.profile, "filter profile")
            ->check(CLI::IsMember({"corpus", "embedding"}))
            ->capture_default_str();
        sub.add_option("--extra-region", o.extra_regions, "accept an additional region code");
        sub.add_option("--source-deny", o.source_deny, "drop records whose source contains this");
        sub.add_option("--require-lang", o.require_lang, "keep only this language tag");
    }
}

void add_normalization(CLI::App& sub, Options& o) {
    sub.add_flag("--mask-emojis", o.mask_emojis, "replace emojis with 'emo'");
    sub.add_flag("--keep-case", o.keep_case, "do not lowercase");
    sub.add_flag("--keep-diacritics", o.keep_diacritics, "do not fold to ASCII");
    sub.add_flag("--drop-punct", o.drop_punct, "remove punctuation");
}

}  // namespace

const std::vector<std::string>& command_names() { return kCommands; }

int run(std::span<const std::string> raw_args, std::ostream& out, std::ostream& err) {
    if (raw_args.empty() || std::find(kCommands.begin(), kCommands.end(), raw_args[0]) == kCommands.end()) {
        if (!raw_args.empty() && (raw_args[0] == "--help" || raw_args[0] == "-h")) {
            out << usage();
            return kExitOk;
        }
        if (!raw_args.empty()) err << "unknown command '" << raw_args[0] << "'\n\n";
        err << usage();
        return kExitUsage;
    }
    const std::string command = raw_args[0];
    Options o;
    CLI::App app{"dialect " + command};
    app.name("dialect " + command);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    if (command == "cutoff") {
        app.add_option("--N", o.cutoff_n, "number of token occurrences")->required();
        app.add_option("--alpha", o.cutoff_alpha, "percent-point value (about 2 for 95%)")
            ->capture_default_str();
        app.add_option("--config", "key=value file");
    } else if (command == "emb-affinity") {
        add_common(app, o, false);
        app.add_option("--k", o.k, "neighbors per token")->check(CLI::PositiveNumber)->capture_default_str();
        app.add_option("--min-regions", o.min_regions, "tables a token must appear in")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        app.add_flag("--signatures", o.signatures, "also write signature_<REGION>.tsv");
        app.add_option("--extra-region", o.extra_regions, "accept an additional region code");
    } else if (command == "emoji15-eval") {
        add_common(app, o, false);
        add_normalization(app, o);
        app.add_option("--task", o.task_dir, "directory with <REGION>.{train,test}.jsonl");
        app.add_option("--predictions", o.predictions_dir, "directory with <MODEL>.<REGION>.txt");
        app.add_option("--embedding", o.embeddings,
                       "MODEL=path: nearest-centroid baseline over this embedding table");
    } else {
        add_common(app, o, true);
        if (command != "ingest-stats" && command != "emoji-stats" && command != "emoji15-build") {
            add_normalization(app, o);
            app.add_option("--min-count", o.min_count, "minimum token frequency")
                ->check(CLI::PositiveNumber)
                ->capture_default_str();
        }
        if (command == "laws") {
            app.add_option("--samples", o.samples, "Heaps curve sample points")->capture_default_str();
            app.add_option("--rank-lo", o.rank_lo, "first rank of the Zipf fit")->capture_default_str();
            app.add_option("--rank-hi", o.rank_hi, "last rank of the Zipf fit (0 = all)")
                ->capture_default_str();
        }
        if (command == "emoji-stats") {
            app.add_option("--top-k", o.top_k, "emojis per region")
                ->check(CLI::PositiveNumber)
                ->capture_default_str();
        }
        if (command == "emoji15-build") {
            app.add_option("--labels", o.labels, "label map JSON (15 emojis)");
            app.add_option("--holdout", o.holdout, "test fraction")->capture_default_str();
            app.add_option("--min-examples", o.min_examples, "drop regions with fewer examples")
                ->capture_default_str();
        }
    }

    const auto started = std::chrono::steady_clock::now();
    try {
        std::vector<std::string> args = apply_config({raw_args.begin(), raw_args.end()});
        std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    Context ctx{o, out, err, Outputs(o.out), json::object()};
    try {
        if (command == "ingest-stats") cmd_ingest_stats(ctx);
        else if (command == "vocab") cmd_vocab(ctx);
        else if (command == "laws") cmd_laws(ctx);
        else if (command == "lexical-affinity") cmd_lexical_affinity(ctx);
        else if (command == "emoji-stats") cmd_emoji_stats(ctx);
        else if (command == "emb-affinity") cmd_emb_affinity(ctx);
        else if (command == "emoji15-build") cmd_emoji15_build(ctx);
        else if (command == "emoji15-eval") cmd_emoji15_eval(ctx);
        else if (command == "cutoff") {
            cmd_cutoff(ctx);
            return kExitOk;
        }
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    ctx.outputs.commit();

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json summary = {{"command", command}, {"inputs", o.inputs}, {"outputs", ctx.outputs.names()},
                    {"threads", o.threads}, {"seconds", seconds}};
    summary.update(ctx.summary);
    out << summary.dump() << "\n";
    return kExitOk;
}

}  // namespace dialect::cli

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dialect/affinity.hpp"
#include "dialect/cli.hpp"
#include "dialect/embcompare.hpp"
#include "dialect/emoji15.hpp"
#include "dialect/io.hpp"
#include "dialect/vocab.hpp"
#include "support/synthetic.hpp"

using namespace dialect;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::size_t hw_threads() { return std::max(2u, std::thread::hardware_concurrency()); }

// --- 1 ---------------------------------------------------------------------
Outcome zipf_recovery() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto tokens = testing::zipf_tokens(1000000, 100000, 1.86, 1);
    const auto vocab = build_vocabulary(tokens, RegionCode("MX"), 5);
    const auto fit = fit_zipf(zipf_ranks(vocab));
    const double secs = seconds_since(t0);
    o.note("beta=" + fmt("%.4f", fit.exponent) + " time=" + fmt("%.2fs", secs));
    o.require(std::abs(fit.exponent - 1.86) <= 0.05, "|beta-1.86| <= 0.05");
    o.require(secs < 30.0, "time < 30 s");
    return o;
}

// --- 2 ---------------------------------------------------------------------
Outcome heaps_recovery() {
    Outcome o;
    // n = m^4 keeps V = 3 n^0.75 = 3 m^3 an exact integer
    std::vector<HeapsPoint> exact;
    for (std::uint64_t m = 1; m <= 40; ++m) exact.push_back({m * m * m * m, 3 * m * m * m});
    const auto f = fit_heaps(exact);
    o.note("noiseless alpha=" + fmt("%.12f", f.exponent));
    o.require(std::abs(f.exponent - 0.75) <= 1e-9, "noiseless alpha within 1e-9");

    const auto ids = testing::zipf_ids(1000000, 100000, 1.86, 2);
    const auto sampled = fit_heaps(heaps_curve<std::uint32_t>(ids));
    o.note("sampled alpha=" + fmt("%.4f", sampled.exponent) + " r2=" + fmt("%.5f", sampled.r_squared));
    o.require(sampled.exponent > 0.0 && sampled.exponent < 1.0, "sampled alpha in (0,1)");
    o.require(sampled.r_squared > 0.99, "r2 > 0.99");
    return o;
}

// --- 3 ---------------------------------------------------------------------
Outcome cutoff_formula() {
    Outcome o;
    const double f = min_frequency_cutoff(100, 2.0);
    o.note("f_min(100,2)=" + fmt("%.6f", f));
    o.require(f == 400.0 / 104.0, "f_min(100,2) == 400/104");
    const auto lower = [](double freq, double n, double a) {
        const double p = freq / n;
        return p - a * std::sqrt(p * (1 - p) / n);
    };
    o.require(lower(4, 100, 2) >= 0.0, "f=4 interval non-negative");
    o.require(lower(3, 100, 2) < 0.0, "f=3 interval negative");
    const double lim = min_frequency_cutoff(1000000000, 2.0);
    o.note("|f_min(1e9,2)-4|=" + fmt("%.3g", std::abs(lim - 4.0)));
    o.require(std::abs(lim - 4.0) < 1e-6, "limit within 1e-6");
    return o;
}

// --- 4 ---------------------------------------------------------------------
Outcome lexical_affinity_props() {
    Outcome o;
    std::vector<RegionVocabulary> regions;
    const char* codes[] = {"AR", "CL", "MX"};
    for (int r = 0; r < 3; ++r) {
        regions.push_back(build_vocabulary(testing::zipf_tokens(20000, 3000, 1.0 + 0.15 * r, 40 + r),
                                           RegionCode(codes[r]), 5));
    }
    const auto base = lexical_affinity(regions).matrix;
    bool symmetric = true, diagonal = true, bounded = true;
    for (std::size_t i = 0; i < 3; ++i) {
        diagonal &= base.at(i, i) == 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            symmetric &= base.at(i, j) == base.at(j, i);
            bounded &= base.at(i, j) >= 0.0 && base.at(i, j) <= 1.0;
        }
    }
    bool identical = true;
    for (std::uint64_t k : {2, 10}) {
        for (std::size_t which = 0; which < 3; ++which) {
            auto scaled = regions;
            for (auto& [t, c] : scaled[which].counts) c *= k;
            scaled[which].total_tokens *= k;
            const auto m = lexical_affinity(scaled).matrix;
            for (std::size_t i = 0; i < 3; ++i) {
                for (std::size_t j = 0; j < 3; ++j) identical &= m.at(i, j) == base.at(i, j);
            }
        }
    }
    o.note("AR-CL=" + fmt("%.6f", base.at(0, 1)) + " AR-MX=" + fmt("%.6f", base.at(0, 2)));
    o.require(symmetric, "exact symmetry");
    o.require(diagonal, "exact zero diagonal");
    o.require(bounded, "entries in [0,1]");
    o.require(identical, "bit-identical under x2 and x10 scaling");
    return o;
}

std::vector<std::string> names(std::size_t n, const char* prefix = "t") {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s%05zu", prefix, i);
        out.push_back(buf);
    }
    return out;
}

// --- 5 ---------------------------------------------------------------------
Outcome knn_exactness() {
    Outcome o;
    const auto table = testing::random_table("MX", names(1000), 50, 5);
    const auto common = common_tokens(std::vector{table}, 1);
    const std::size_t k = 33;

    const auto t0 = Clock::now();
    const auto graph = knn_graph(table, common, k, hw_threads());
    const double secs = seconds_since(t0);

    std::vector<std::vector<double>> raw;
    for (std::size_t r = 0; r < table.size(); ++r) {
        const auto v = table.vector(r);
        raw.emplace_back(v.begin(), v.end());
    }
    const auto oracle = testing::knn_oracle(raw, k);
    std::size_t mismatched = 0;
    for (std::size_t q = 0; q < table.size(); ++q) {
        std::set<std::size_t> got, want(oracle[q].begin(), oracle[q].end());
        for (const auto& n : graph.neighbors_of(q)) got.insert(n.id);
        mismatched += got != want;
    }
    const auto reference = knn_graph_bruteforce(table, common, k);
    o.note("mismatched queries=" + std::to_string(mismatched) + " time=" + fmt("%.3fs", secs) +
           " threads=" + std::to_string(hw_threads()));
    o.require(mismatched == 0, "neighbor sets equal the exhaustive oracle");
    o.require(graph.neighbors == reference.neighbors, "optimized equals reference search");
    o.require(secs < 5.0, "time < 5 s");
    return o;
}

// --- 6 ---------------------------------------------------------------------
Outcome signature_correctness() {
    Outcome o;
    const auto toks = names(200);
    std::vector<EmbeddingTable> tables;
    for (int r = 0; r < 3; ++r) tables.push_back(testing::random_table(known_regions()[r].str(), toks, 16, 60 + r));
    const std::size_t k = 10;
    const auto common = common_tokens(tables, 1);

    const auto sig = signature(knn_graph(tables[0], common, k));
    bool in_range = true;
    for (const auto& [key, w] : sig.entries.entries()) in_range &= w > 0.8333 && w <= 1.5;
    o.require(in_range, "weights in (0.8333, 1.5]");
    o.require(sig.entries.size() == toks.size() * k, "entry count = tokens x k");

    auto twin = tables[0];
    const auto twin_sig = signature(knn_graph(twin, common, k));
    const double self = semantic_affinity(std::vector{sig, twin_sig}).matrix.at(0, 1);
    o.require(self == 0.0, "identical tables at distance 0");

    const auto matrix = [&](const std::vector<EmbeddingTable>& ts) {
        std::vector<RegionSignature> sigs;
        for (const auto& t : ts) sigs.push_back(signature(knn_graph(t, common, k)));
        return semantic_affinity(sigs).matrix;
    };
    auto turned = tables;
    turned[0] = testing::rotated(tables[0], 7);
    const auto a = matrix(tables), b = matrix(turned);
    double worst = 0;
    for (std::size_t j = 0; j < 3; ++j) worst = std::max(worst, std::abs(a.at(0, j) - b.at(0, j)));
    o.note("entries=" + std::to_string(sig.entries.size()) + " rotation drift=" + fmt("%.3g", worst));
    o.require(worst <= 1e-9, "rotation leaves the affinity row unchanged within 1e-9");
    return o;
}

// --- 7 ---------------------------------------------------------------------
Outcome dense_oracle_match() {
    Outcome o;
    const auto toks = names(20);
    std::vector<EmbeddingTable> tables;
    std::vector<testing::DenseTable> dense;
    for (int r = 0; r < 3; ++r) {
        tables.push_back(testing::random_table(known_regions()[r].str(), toks, 5, 70 + r));
        dense.push_back(testing::to_dense(tables.back()));
    }
    const auto common = common_tokens(tables, 3);
    std::vector<RegionSignature> sigs;
    for (const auto& t : tables) sigs.push_back(signature(knn_graph(t, common, 3)));
    const auto m = semantic_affinity(sigs).matrix;
    const auto oracle = testing::dense_semantic_oracle(dense, 3, 3);
    double worst = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) worst = std::max(worst, std::abs(m.at(i, j) - oracle[i][j]));
    }
    o.note("max |diff|=" + fmt("%.3g", worst));
    o.require(worst <= 1e-9, "matrix within 1e-9 of the dense pipeline");
    return o;
}

// --- 8 ---------------------------------------------------------------------
Outcome emoji15_builder() {
    Outcome o;
    emoji15::TaskConfig config;
    config.label_set = emoji15::default_label_set();
    const auto records = testing::emoji_records(3000, config.label_set, {"AR", "ES", "MX"}, 88);
    const auto split = emoji15::build_task(records, config);

    std::map<std::pair<RegionCode, std::size_t>, std::pair<long, long>> counts;
    std::set<std::uint64_t> train_ids, test_ids;
    std::size_t residual = 0, examples = 0;
    std::string dump;
    for (const auto& [region, s] : split.regions) {
        for (const auto& e : s.train) {
            ++counts[{region, e.label}].first;
            train_ids.insert(e.id);
            residual += !emoji15::labels_in(e.text, config.label_set).empty();
        }
        for (const auto& e : s.test) {
            ++counts[{region, e.label}].second;
            test_ids.insert(e.id);
            residual += !emoji15::labels_in(e.text, config.label_set).empty();
        }
        examples += s.train.size() + s.test.size();
        dump += emoji15::examples_to_ndjson(s.train) + emoji15::examples_to_ndjson(s.test);
    }
    bool balanced = !counts.empty();
    for (const auto& [key, c] : counts) balanced &= std::abs(c.first - c.second) <= 1;
    std::vector<std::uint64_t> leak;
    std::set_intersection(train_ids.begin(), train_ids.end(), test_ids.begin(), test_ids.end(),
                          std::back_inserter(leak));

    std::string again;
    for (const auto& [region, s] : emoji15::build_task(records, config).regions) {
        again += emoji15::examples_to_ndjson(s.train) + emoji15::examples_to_ndjson(s.test);
    }
    o.note("examples=" + std::to_string(examples) + " buckets=" + std::to_string(counts.size()) +
           " leaked=" + std::to_string(leak.size()) + " residual=" + std::to_string(residual));
    o.require(balanced, "per-label train/test counts differ by <= 1");
    o.require(leak.empty(), "no id in both splits");
    o.require(residual == 0, "no label emoji left in texts");
    o.require(again == dump, "same seed gives byte-identical output");
    return o;
}

// --- 9 ---------------------------------------------------------------------
Outcome rank_harness() {
    Outcome o;
    emoji15::AccuracyMatrix m;
    m.models = {"AR", "ES", "MX", "US", "ALL"};
    m.regions = {"AR", "ES", "MX", "CO"};
    //               AR    ES    MX    CO
    m.accuracy = {{0.61, 0.40, 0.50, 0.45},   // AR
                  {0.52, 0.58, 0.50, 0.47},   // ES  tie with AR on MX
                  {0.55, 0.41, 0.62, 0.49},   // MX
                  {0.40, 0.39, 0.44, 0.41},   // US
                  {0.58, 0.50, 0.60, 0.52}};  // ALL
    const std::vector<std::vector<int>> expected_ranks = {{1, 4, 3, 4},
                                                          {4, 1, 3, 3},
                                                          {3, 3, 1, 2},
                                                          {5, 5, 5, 5},
                                                          {2, 2, 2, 1}};
    const std::map<std::string, int> expected_local = {{"AR", 1}, {"ES", 1}, {"MX", 1}};
    const std::map<std::string, std::vector<std::string>> expected_top5 = {
        {"AR", {"AR", "ALL", "MX", "ES", "US"}},
        {"ES", {"ES", "ALL", "MX", "AR", "US"}},
        {"MX", {"MX", "ALL", "AR", "ES", "US"}},
        {"CO", {"ALL", "MX", "ES", "AR", "US"}}};
    const std::vector<double> expected_avg = {3.0, 2.75, 2.25, 5.0, 1.75};

    // independent per-column sort
    std::vector<std::vector<int>> sorted_ranks(5, std::vector<int>(4));
    for (std::size_t c = 0; c < 4; ++c) {
        std::vector<std::size_t> idx(5);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return m.accuracy[a][c] > m.accuracy[b][c]; });
        for (std::size_t p = 0; p < 5; ++p) {
            const bool tie = p && m.accuracy[idx[p]][c] == m.accuracy[idx[p - 1]][c];
            sorted_ranks[idx[p]][c] = tie ? sorted_ranks[idx[p - 1]][c] : int(p) + 1;
        }
    }

    const auto report = emoji15::make_report(m);
    o.require(sorted_ranks == expected_ranks, "hand ranks agree with the sort oracle");
    o.require(report.ranks.ranks == sorted_ranks, "ranks equal the sort oracle");
    o.require(report.ranks.local_rank == expected_local, "local ranks");
    o.require(report.ranks.top5 == expected_top5, "top-5 lists");
    o.require(report.avg_rank == expected_avg, "average ranks");
    o.require(report.ranks.ranks[0][2] == 3 && report.ranks.ranks[1][2] == 3, "tie shares rank 3 on MX");
    o.note("avg ranks AR=3 ES=2.75 MX=2.25 US=5 ALL=1.75 checked; tie on MX column");
    return o;
}

// --- 10 --------------------------------------------------------------------
int run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    return cli::run(args, out, err);
}

Outcome thread_determinism() {
    Outcome o;
    testing::TempDir dir;
    std::vector<std::string> corpora, tables;
    const char* codes[] = {"AR", "CL", "ES", "MX", "PE", "VE"};
    const auto vocab = names(400, "w");
    for (int r = 0; r < 6; ++r) {
        const auto c = dir / (std::string(codes[r]) + ".jsonl");
        testing::write_zipf_corpus(c, codes[r], 3000, 15, 5000, 1.0 + 0.05 * r, 100 + r, r * 1000000);
        corpora.push_back(c.string());

        std::vector<std::string> present;
        for (std::size_t i = 0; i < vocab.size(); ++i) {
            if ((i + r) % 7) present.push_back(vocab[i]);
        }
        const auto t = dir / (std::string(codes[r]) + ".vec");
        save_embeddings(t, testing::random_table(codes[r], present, 20, 200 + r));
        tables.push_back(t.string());
    }
    const auto with_inputs = [](std::vector<std::string> args, const std::vector<std::string>& in) {
        for (const auto& p : in) {
            args.push_back("--input");
            args.push_back(p);
        }
        return args;
    };
    bool ran = true;
    for (const std::string threads : {"1", "8"}) {
        const auto out = (dir / ("threads" + threads)).string();
        ran &= run_cli(with_inputs({"vocab", "--threads", threads, "--out", out}, corpora)) == 0;
        ran &= run_cli(with_inputs({"lexical-affinity", "--threads", threads, "--out", out}, corpora)) == 0;
        ran &= run_cli(with_inputs({"emb-affinity", "--threads", threads, "--out", out, "--signatures"}, tables)) == 0;
    }
    o.require(ran, "all commands exit 0");
    std::size_t files = 0, differing = 0;
    if (ran) {
        for (const auto& e : fs::directory_iterator(dir / "threads1")) {
            ++files;
            const auto other = dir / "threads8" / e.path().filename();
            differing += !fs::exists(other) || read_file(e.path()) != read_file(other);
        }
    }
    o.note("artifacts compared=" + std::to_string(files) + " differing=" + std::to_string(differing));
    o.require(files > 0 && differing == 0, "byte-identical artifacts for --threads 1 and 8");
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"Zipf recovery", zipf_recovery},
        {"Heaps recovery", heaps_recovery},
        {"cutoff formula", cutoff_formula},
        {"lexical affinity", lexical_affinity_props},
        {"kNN exactness", knn_exactness},
        {"signature correctness", signature_correctness},
        {"semantic affinity vs dense oracle", dense_oracle_match},
        {"Emoji-15 builder", emoji15_builder},
        {"rank harness", rank_harness},
        {"determinism under parallelism", thread_determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += !o.pass;
        std::printf("criterion %2zu %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed ? 1 : 0;
}

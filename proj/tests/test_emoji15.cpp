#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dialect/emoji15.hpp"
#include "support/synthetic.hpp"

using namespace dialect;
using namespace dialect::emoji15;

namespace {

TaskConfig default_config() {
    TaskConfig c;
    c.label_set = default_label_set();
    return c;
}

TweetRecord rec(std::uint64_t id, std::string text, const std::string& region = "MX") {
    TweetRecord r;
    r.id = id;
    r.text = std::move(text);
    r.region = RegionCode(region);
    return r;
}

std::string dump(const TaskSplit& s) {
    std::string out;
    for (const auto& [region, split] : s.regions) {
        out += region.str() + "\n" + examples_to_ndjson(split.train) + "--\n" +
               examples_to_ndjson(split.test);
    }
    return out;
}

// Sort models by descending accuracy and walk the order: equal accuracy
// keeps the previous rank, otherwise rank = position + 1.
std::vector<std::vector<int>> rank_oracle(const std::vector<std::vector<double>>& acc) {
    const std::size_t m = acc.size(), r = acc[0].size();
    std::vector<std::vector<int>> ranks(m, std::vector<int>(r));
    for (std::size_t c = 0; c < r; ++c) {
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](auto a, auto b) { return acc[a][c] > acc[b][c]; });
        for (std::size_t p = 0; p < m; ++p) {
            const bool tied = p > 0 && acc[order[p]][c] == acc[order[p - 1]][c];
            ranks[order[p]][c] = tied ? ranks[order[p - 1]][c] : int(p) + 1;
        }
    }
    return ranks;
}

}  // namespace

TEST_CASE("label set") {
    const auto labels = default_label_set();
    CHECK(labels.size() == kLabelCount);
    CHECK_NOTHROW(default_config().validate());
    CHECK(std::find(labels.begin(), labels.end(), U"\U0001F602") == labels.end());

    auto c = default_config();
    c.label_set.pop_back();
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = default_config();
    c.label_set[1] = c.label_set[0];
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = default_config();
    c.holdout_fraction = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);

    CHECK(parse_label_set(R"(["😍", "U+1F62D", "❤️"])") ==
          std::vector<std::u32string>{U"\U0001F60D", U"\U0001F62D", U"❤"});
    CHECK(parse_label_set(label_map_json(labels)) == labels);
    CHECK_THROWS_AS(parse_label_set("{}"), std::invalid_argument);
}

TEST_CASE("labels_in and mask_label") {
    const auto labels = default_label_set();
    CHECK(labels_in("hola 😍😍 y 😂", labels) == std::vector<std::size_t>{0});
    CHECK(labels_in("hola 😍 y 😭", labels).size() == 2);
    CHECK(labels_in("nada aqui 😂", labels).empty());
    CHECK(labels_in("con tono 🙏🏽", labels) == std::vector<std::size_t>{8});
    CHECK(labels_in("con selector ❤️", labels) == std::vector<std::size_t>{2});

    CHECK(mask_label("te quiero ❤️ mucho ❤", U"❤") == "te quiero mucho");
    CHECK(mask_label("gracias 🙏🏽🙏", U"\U0001F64F") == "gracias");
    CHECK(mask_label("😍 hola 😂", U"\U0001F60D") == "hola 😂");
}

TEST_CASE("build_task keeps single-label records only") {
    const auto c = default_config();
    const std::vector<TweetRecord> rs = {rec(1, "hola 😍 😭"), rec(2, "hola 😍 😂"),
                                         rec(3, "sin nada"), rec(4, "dos veces 😍😍")};
    const auto s = build_task(rs, c);
    CHECK(s.records_seen == 4);
    CHECK(s.records_with_several_labels == 1);
    CHECK(s.records_without_label == 1);
    const auto& mx = s.regions.at(RegionCode("MX"));
    CHECK(mx.train.size() + mx.test.size() == 2);

    CHECK_THROWS_AS(build_task(std::vector{rec(5, "sin etiqueta")}, c), std::runtime_error);
}

TEST_CASE("100 records of one label split 50/50") {
    std::vector<TweetRecord> rs;
    for (int i = 0; i < 100; ++i) rs.push_back(rec(i, "texto " + std::to_string(i) + " 🔥"));
    const auto s = build_task(rs, default_config());
    CHECK(s.regions.at(RegionCode("MX")).train.size() == 50);
    CHECK(s.regions.at(RegionCode("MX")).test.size() == 50);
}

TEST_CASE("synthetic corpus split properties") {
    const auto c = default_config();
    const auto rs = testing::emoji_records(3000, c.label_set, {"AR", "CL", "MX"}, 8);
    const auto s = build_task(rs, c);

    std::map<std::pair<std::string, std::size_t>, std::size_t> expected;
    for (const auto& r : rs) {
        const auto l = labels_in(r.text, c.label_set);
        if (l.size() == 1) ++expected[{r.region.str(), l[0]}];
    }
    std::map<std::pair<std::string, std::size_t>, std::pair<std::size_t, std::size_t>> got;
    std::set<std::uint64_t> train_ids, test_ids;
    for (const auto& [region, split] : s.regions) {
        for (const auto& e : split.train) {
            ++got[{region.str(), e.label}].first;
            train_ids.insert(e.id);
            CHECK(labels_in(e.text, c.label_set).empty());
        }
        for (const auto& e : split.test) {
            ++got[{region.str(), e.label}].second;
            test_ids.insert(e.id);
            CHECK(labels_in(e.text, c.label_set).empty());
        }
    }
    REQUIRE(got.size() == expected.size());
    for (const auto& [key, n] : expected) {
        const auto [train, test] = got[key];
        CHECK(train + test == n);
        CHECK(test == n / 2);
        CHECK(train >= test);
        CHECK(train - test <= 1);
    }
    std::vector<std::uint64_t> both;
    std::set_intersection(train_ids.begin(), train_ids.end(), test_ids.begin(), test_ids.end(),
                          std::back_inserter(both));
    CHECK(both.empty());

    CHECK(dump(build_task(rs, c)) == dump(s));
    auto other = c;
    other.seed = 43;
    const auto s2 = build_task(rs, other);
    CHECK(dump(s2) != dump(s));
    for (const auto& [region, split] : s2.regions) {
        CHECK(split.train.size() == s.regions.at(region).train.size());
        CHECK(split.test.size() == s.regions.at(region).test.size());
    }
}

TEST_CASE("holdout fraction and region dropping") {
    auto c = default_config();
    c.holdout_fraction = 0.3;
    std::vector<TweetRecord> rs;
    for (int i = 0; i < 10; ++i) rs.push_back(rec(i, "uno 🔥", "AR"));
    for (int i = 10; i < 13; ++i) rs.push_back(rec(i, "dos 🎉", "CU"));
    c.min_examples_per_region = 5;
    const auto s = build_task(rs, c);
    CHECK(s.regions.at(RegionCode("AR")).test.size() == 3);
    CHECK(s.regions.count(RegionCode("CU")) == 0);
    CHECK(s.dropped_regions.at(RegionCode("CU")) == 3);
}

TEST_CASE("ndjson round trip") {
    const std::vector<LabeledExample> ex = {{7, "hola \"tu\"", 3, RegionCode("MX")},
                                            {8, "ñ 😂", 0, RegionCode("MX")}};
    const auto text = examples_to_ndjson(ex);
    CHECK(examples_from_ndjson(text, RegionCode("MX")) == ex);
    const auto first = nlohmann::json::parse(text.substr(0, text.find('\n')));
    CHECK(first["label"] == 3);
    CHECK(first["id"] == 7);
}

TEST_CASE("evaluate") {
    std::vector<LabeledExample> gold;
    for (std::size_t i = 0; i < 15; ++i) gold.push_back({i, "x", i, RegionCode("MX")});
    std::vector<std::size_t> same(15);
    std::iota(same.begin(), same.end(), 0);
    CHECK(evaluate(same, gold) == 1.0);
    const std::vector<std::size_t> fixed(15, 4);
    CHECK(evaluate(fixed, gold) == doctest::Approx(1.0 / 15));

    std::vector<LabeledExample> ten(gold.begin(), gold.begin() + 10);
    std::vector<std::size_t> seven = {0, 1, 2, 3, 4, 5, 6, 0, 0, 0};
    CHECK(evaluate(seven, ten) == doctest::Approx(0.7));

    CHECK_THROWS_AS(evaluate(seven, gold), std::invalid_argument);
    CHECK_THROWS_AS(evaluate(std::vector<std::size_t>{}, std::vector<LabeledExample>{}),
                    std::invalid_argument);
    CHECK(parse_predictions("1\n2\n\n14\n") == std::vector<std::size_t>{1, 2, 14});
    CHECK_THROWS(parse_predictions("1\nx\n"));
}

TEST_CASE("rank_models examples") {
    AccuracyMatrix single{{"MX"}, {"AR", "MX"}, {{0.3, 0.4}}};
    const auto r1 = rank_models(single);
    CHECK(r1.ranks == std::vector<std::vector<int>>{{1, 1}});
    CHECK(r1.local_rank == std::map<std::string, int>{{"MX", 1}});

    AccuracyMatrix tie{{"A1", "B1", "C1"}, {"R"}, {{0.9}, {0.8}, {0.8}}};
    CHECK(rank_models(tie).ranks == std::vector<std::vector<int>>{{1}, {2}, {2}});

    CHECK(average_rank({{1, 1, 1}}) == std::vector<double>{1.0});
    CHECK(average_rank({{2, 4}}) == std::vector<double>{3.0});
    CHECK_THROWS_AS(average_rank({{2, 0}}), std::invalid_argument);
}

TEST_CASE("rank_models equals a per-column sort oracle") {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> coarse(0, 6);  // few levels, many ties
    const std::vector<std::string> models = {"AR", "CL", "ES", "MX", "US", "ALL"};
    const std::vector<std::string> regions = {"AR", "CL", "ES", "MX", "VE"};
    for (int trial = 0; trial < 200; ++trial) {
        AccuracyMatrix m{models, regions, {}};
        for (std::size_t i = 0; i < models.size(); ++i) {
            m.accuracy.emplace_back();
            for (std::size_t j = 0; j < regions.size(); ++j) m.accuracy.back().push_back(0.1 * coarse(rng));
        }
        const auto r = rank_models(m);
        const auto oracle = rank_oracle(m.accuracy);
        CHECK(r.ranks == oracle);
        for (std::size_t j = 0; j < regions.size(); ++j) {
            const auto it = std::find(models.begin(), models.end(), regions[j]);
            if (it != models.end()) {
                CHECK(r.local_rank.at(regions[j]) == oracle[it - models.begin()][j]);
            } else {
                CHECK(r.local_rank.count(regions[j]) == 0);
            }
            std::vector<std::pair<int, std::string>> order;
            for (std::size_t i = 0; i < models.size(); ++i) order.emplace_back(oracle[i][j], models[i]);
            std::sort(order.begin(), order.end());
            std::vector<std::string> top;
            for (std::size_t i = 0; i < 5; ++i) top.push_back(order[i].second);
            CHECK(r.top5.at(regions[j]) == top);
        }
        for (double a : average_rank(r.ranks)) {
            CHECK(a >= 1.0);
            CHECK(a <= double(models.size()));
        }
    }
}

TEST_CASE("report json") {
    const auto rep = make_report({{"AR", "MX"}, {"AR", "MX"}, {{0.5, 0.25}, {0.4, 0.25}}});
    const auto j = nlohmann::json::parse(rep.to_json());
    CHECK(j["ranks"]["MX"]["MX"] == 1);
    CHECK(j["ranks"]["AR"]["MX"] == 1);
    CHECK(j["local_rank"]["AR"] == 1);
    CHECK(j["avg_rank"]["MX"] == 1.5);
    CHECK(j["top5"]["AR"] == nlohmann::json::array({"AR", "MX"}));
}

TEST_CASE("centroid predictor") {
    EmbeddingTable emb{RegionCode("MX"), 2};
    emb.add("sol", std::vector<double>{1, 0.1});
    emb.add("playa", std::vector<double>{1, -0.1});
    emb.add("lluvia", std::vector<double>{0.1, 1});
    emb.add("frio", std::vector<double>{-0.1, 1});
    const std::vector<LabeledExample> train = {{1, "sol playa", 10, RegionCode("MX")},
                                               {2, "playa sol sol", 10, RegionCode("MX")},
                                               {3, "lluvia", 4, RegionCode("MX")},
                                               {4, "frio lluvia", 4, RegionCode("MX")},
                                               {5, "frio", 4, RegionCode("MX")}};
    const CentroidPredictor p(train, emb);
    CHECK(p.predict("SOL y playa") == 10);
    CHECK(p.predict("mucho frio") == 4);
    CHECK(p.predict("lluvia") == 4);
    CHECK(p.predict("nada conocido") == 4);  // majority
    CHECK(p.majority_label() == 4);
    CHECK(evaluate(p.predict_all(train), train) == 1.0);
}

TEST_CASE("centroid predictor separates synthetic clusters") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.05);
    EmbeddingTable emb{RegionCode("MX"), 3};
    for (int i = 0; i < 40; ++i) {
        emb.add("a" + std::to_string(i), std::vector<double>{1 + noise(rng), noise(rng), noise(rng)});
        emb.add("b" + std::to_string(i), std::vector<double>{noise(rng), 1 + noise(rng), noise(rng)});
    }
    std::vector<LabeledExample> train, test;
    for (int i = 0; i < 40; ++i) {
        const std::string a = "a" + std::to_string(i), b = "b" + std::to_string(i);
        const std::string a2 = "a" + std::to_string((i * 7) % 40), b2 = "b" + std::to_string((i * 7) % 40);
        (i % 2 ? test : train).push_back({std::uint64_t(2 * i), a + " " + a2, 0, RegionCode("MX")});
        (i % 2 ? test : train).push_back({std::uint64_t(2 * i + 1), b + " " + b2, 1, RegionCode("MX")});
    }
    const CentroidPredictor p(train, emb);
    CHECK(evaluate(p.predict_all(test), test) == 1.0);
}

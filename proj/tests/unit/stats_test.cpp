#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "hatewatch/error.hpp"
#include "hatewatch/stats.hpp"

using namespace hatewatch;

namespace {

Target target(const std::string& id, std::vector<std::string> name) {
  return Target{id, std::move(name), id, {}};
}

CountsTable one_target_counts() {
  CountsTable t;
  t.window = 1;
  t.total_tokens = 10000;
  t.mentions["m"] = 10;
  t.co_counts["m"][index_of(Category::kAnger)] = 2;
  t.category_counts[index_of(Category::kAnger)] = 100;
  return t;
}

CorpusStats stats_with(std::uint64_t total) {
  CorpusStats s;
  s.total_tokens = total;
  s.doc_count = 1;
  s.per_site_counts["a"] = {1, total};
  return s;
}

ReportConfig config() {
  ReportConfig c;
  c.window = 1;
  return c;
}

}  // namespace

TEST(NormalizedFrequency, Examples) {
  EXPECT_DOUBLE_EQ(normalized_frequency(5, 1000), 0.005);
  EXPECT_EQ(normalized_frequency(0, 1234), 0.0);
  EXPECT_NEAR(normalized_frequency(140833, 102797970), 0.00137, 5e-6);
}

TEST(NormalizedFrequency, Errors) {
  try {
    normalized_frequency(1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUndefinedInput);
  }
  try {
    normalized_frequency(11, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvariantViolation);
  }
}

TEST(Proportion, Examples) {
  EXPECT_NEAR(*proportion(2, 169), 0.0118, 5e-5);
  EXPECT_NEAR(*proportion(1, 128), 0.0078, 5e-5);
  EXPECT_EQ(*proportion(0, 50), 0.0);
  EXPECT_FALSE(proportion(0, 0).has_value());
  try {
    proportion(3, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvariantViolation);
  }
}

TEST(ExpectedCount, ReferenceFrequenciesRoundToWholeMentions) {
  EXPECT_EQ(std::lround(expected_count(0.00137, 3142)), 4);
  EXPECT_EQ(std::lround(expected_count(0.00106, 3142)), 3);
  EXPECT_EQ(std::lround(expected_count(0.00076, 3142)), 2);
  EXPECT_EQ(std::lround(expected_count(0.00068, 3142)), 2);
  EXPECT_EQ(expected_count(0.3, 0), 0.0);
  EXPECT_THROW(expected_count(-0.1, 3), Error);
}

TEST(Deviation, Examples) {
  EXPECT_NEAR(deviation(3, 4.16), -1.16, 1e-12);
  EXPECT_EQ(deviation(2.5, 2.5), 0.0);
  EXPECT_NEAR(deviation(3, expected_count(0.00137, 3142)), -1.3045, 1e-4);
}

TEST(BuildReport, HandComputedCell) {
  const auto r = build_report(one_target_counts(), stats_with(10000), {target("m", {"m"})}, config());
  ASSERT_EQ(r.targets.size(), 1u);
  const auto& cell = r.targets[0].cells[index_of(Category::kAnger)];
  EXPECT_EQ(cell.actual, 2u);
  EXPECT_DOUBLE_EQ(*cell.proportion, 0.2);
  EXPECT_DOUBLE_EQ(cell.expected, 0.1);
  EXPECT_DOUBLE_EQ(cell.deviation, 1.9);
  EXPECT_DOUBLE_EQ(*r.categories[index_of(Category::kAnger)].relative_frequency, 0.01);
}

TEST(BuildReport, AllZeroCountsGiveZerosAndNulls) {
  CountsTable t;
  t.window = 1;
  t.mentions["m"] = 0;
  const auto r = build_report(t, CorpusStats{}, {target("m", {"m"})}, config());
  for (const auto& cs : r.categories) EXPECT_FALSE(cs.relative_frequency.has_value());
  for (const auto& cell : r.targets[0].cells) {
    EXPECT_FALSE(cell.proportion.has_value());
    EXPECT_EQ(cell.expected, 0.0);
    EXPECT_EQ(cell.deviation, 0.0);
  }
  const auto json = nlohmann::json::parse(report_to_json(r));
  EXPECT_TRUE(json["targets"][0]["categories"]["anger"]["proportion"].is_null());
  EXPECT_TRUE(json["categories"][0]["relative_frequency"].is_null());
}

TEST(BuildReport, TiesBrokenByTargetId) {
  CountsTable t;
  t.window = 1;
  t.total_tokens = 100;
  t.mentions = {{"b", 5}, {"a", 5}, {"c", 9}};
  const auto r = build_report(t, stats_with(100), {target("b", {"b"}), target("a", {"a"}), target("c", {"c"})},
                              config());
  EXPECT_EQ(r.targets[0].target_id, "c");
  EXPECT_EQ(r.targets[1].target_id, "a");
  EXPECT_EQ(r.targets[2].target_id, "b");
}

TEST(BuildReport, ConsistencyChecks) {
  auto t = one_target_counts();
  ReportConfig c = config();
  c.lexicon_version = 3;
  EXPECT_THROW(build_report(t, stats_with(10000), {target("m", {"m"})}, c), Error);
  EXPECT_THROW(build_report(t, stats_with(9999), {target("m", {"m"})}, config()), Error);
  c = config();
  c.window = 2;
  EXPECT_THROW(build_report(t, stats_with(10000), {target("m", {"m"})}, c), Error);
}

TEST(BuildReport, FingerprintTracksInputs) {
  const std::vector<Target> ts = {target("m", {"m"})};
  const auto a = build_report(one_target_counts(), stats_with(10000), ts, config()).fingerprint;
  EXPECT_EQ(a, build_report(one_target_counts(), stats_with(10000), ts, config()).fingerprint);
  ReportConfig c = config();
  c.lexicon_hash = 42;
  EXPECT_NE(a, build_report(one_target_counts(), stats_with(10000), ts, c).fingerprint);
  auto renamed = ts;
  renamed[0].full_name = {"n"};
  EXPECT_NE(a, build_report(one_target_counts(), stats_with(10000), renamed, config()).fingerprint);
}

TEST(SignProperty, ZeroActualNeverPositive) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint64_t> m(0, 20000);
  std::uniform_real_distribution<double> f(0.0, 0.01);
  for (int i = 0; i < 1000; ++i) {
    const double e = expected_count(f(rng), static_cast<double>(m(rng)));
    EXPECT_LE(deviation(0, e), 0.0);
    EXPECT_EQ(deviation(5, e) > 0, 5 > e);
  }
}

TEST(ScaleProperty, DoublingCountsDoublesDeviationsAndKeepsRatios) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    CountsTable t;
    t.window = 1;
    t.total_tokens = 1000 + rng() % 100000;
    for (auto c : kAllCategories) t.category_counts[index_of(c)] = rng() % (t.total_tokens / 10);
    const std::vector<Target> ts = {target("a", {"a"}), target("b", {"b"})};
    for (const auto& tg : ts) {
      const std::uint64_t m = rng() % 500;
      t.mentions[tg.id] = m;
      for (auto c : kAllCategories) t.co_counts[tg.id][index_of(c)] = m == 0 ? 0 : rng() % (m + 1);
    }
    const CountsTable doubled = t + t;
    const auto r1 = build_report(t, stats_with(t.total_tokens), ts, config());
    const auto r2 = build_report(doubled, stats_with(doubled.total_tokens), ts, config());
    for (std::size_t i = 0; i < r1.categories.size(); ++i) {
      EXPECT_EQ(r1.categories[i].relative_frequency, r2.categories[i].relative_frequency);
    }
    for (std::size_t k = 0; k < r1.targets.size(); ++k) {
      ASSERT_EQ(r1.targets[k].target_id, r2.targets[k].target_id);
      for (std::size_t c = 0; c < kCategoryCount; ++c) {
        const auto& a = r1.targets[k].cells[c];
        const auto& b = r2.targets[k].cells[c];
        EXPECT_EQ(a.proportion, b.proportion);
        EXPECT_EQ(2 * a.deviation, b.deviation);
      }
    }
  }
}

TEST(FormatFixed, RoundsAndNeverPrintsNegativeZero) {
  EXPECT_EQ(format_fixed(-1.1645, 2), "-1.16");
  EXPECT_EQ(format_fixed(-0.001, 2), "0.00");
  EXPECT_EQ(format_fixed(-0.0, 2), "0.00");
  EXPECT_EQ(format_fixed(0.001366, 5), "0.00137");
  EXPECT_EQ(format_fixed(16.49, 2), "16.49");
}

TEST(Serialization, JsonHasFixedKeyOrderAndFullPrecision) {
  const auto r = build_report(one_target_counts(), stats_with(10000), {target("m", {"m"})}, config());
  const auto text = report_to_json(r);
  EXPECT_EQ(text, report_to_json(r));
  EXPECT_EQ(text.back(), '\n');
  const auto j = nlohmann::ordered_json::parse(text);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"fingerprint", "config", "corpus", "categories", "targets"}));
  EXPECT_EQ(j["targets"][0]["categories"]["anger"]["deviation"].get<double>(),
            r.targets[0].cells[index_of(Category::kAnger)].deviation);
}

TEST(Serialization, CsvColumnsAndRounding) {
  const auto r = build_report(one_target_counts(), stats_with(10000), {target("m", {"m"})}, config());
  const auto csv = report_to_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find(',', csv.find(',') + 1)), "target,mentions");
  EXPECT_NE(csv.find("\nm,10,0,0.0000,0.00,0.00,2,0.2000,0.10,1.90,"), std::string::npos);
  const auto cats = categories_to_csv(r);
  EXPECT_NE(cats.find("anger,100,0.01000\n"), std::string::npos);
  EXPECT_NE(figure_counts_csv(r).find("\nm,0,2,0,0,0,0\n"), std::string::npos);
  EXPECT_NE(figure_proportions_csv(r).find("\nm,0.000000,0.200000,"), std::string::npos);
}

#include "poi/analysis.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <sstream>

using namespace poi;

namespace {

TweetRecord rec(const std::string& id, const std::string& poi, CategoryLabel cat,
                const std::string& when = "2017-06-07T12:00:00") {
  TweetRecord r;
  r.tweet_id = id;
  r.text = "placeholder";
  r.poi_id = poi;
  r.category = cat;
  r.timestamp = parse_timestamp(when);
  return r;
}

TokenSequence toks(const std::string& id, std::vector<std::string> tokens) {
  return {id, std::move(tokens)};
}

}  // namespace

TEST_CASE("pearson chi2 matches the hand oracle on a 2x2 table") {
  // O = [[30,70],[10,90]]; oracle evaluates sum (O-E)^2 / E directly.
  const double obs[2][2] = {{30, 70}, {10, 90}};
  const double total = 200, r0 = 100, r1 = 100, c0 = 40, c1 = 160;
  double expected_chi2 = 0;
  const double rows[2] = {r0, r1}, cols[2] = {c0, c1};
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      const double e = rows[r] * cols[c] / total;
      expected_chi2 += (obs[r][c] - e) * (obs[r][c] - e) / e;
    }
  CHECK_THAT(pearson_chi2_2x2(30, 70, 10, 90),
             Catch::Matchers::WithinAbs(expected_chi2, 1e-9));
  CHECK(pearson_chi2_2x2(30, 70, 10, 90) > 0);

  SECTION("degenerate marginals give zero") {
    CHECK(pearson_chi2_2x2(0, 0, 10, 90) == 0.0);
    CHECK(pearson_chi2_2x2(0, 10, 0, 90) == 0.0);
  }
}

TEST_CASE("chi2 scales linearly with mass, so rankings are scale-invariant") {
  const double tables[3][4] = {{30, 70, 10, 90}, {25, 75, 20, 80}, {50, 50, 45, 55}};
  std::vector<double> base, scaled;
  for (const auto& t : tables) {
    base.push_back(pearson_chi2_2x2(t[0], t[1], t[2], t[3]));
    scaled.push_back(pearson_chi2_2x2(7 * t[0], 7 * t[1], 7 * t[2], 7 * t[3]));
  }
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK_THAT(scaled[i], Catch::Matchers::WithinRel(7 * base[i], 1e-9));
  // Same pairwise order.
  for (std::size_t i = 0; i < base.size(); ++i)
    for (std::size_t j = 0; j < base.size(); ++j)
      CHECK((base[i] < base[j]) == (scaled[i] < scaled[j]));
}

TEST_CASE("an exclusive unigram ranks at the top of its category") {
  std::vector<TweetRecord> records;
  std::vector<TokenSequence> tokens;
  // "beach" appears only in GreatOutdoors tweets, spread over 6 POIs.
  for (int i = 0; i < 30; ++i) {
    const std::string poi = "out" + std::to_string(i % 6);
    records.push_back(rec("o" + std::to_string(i), poi, CategoryLabel::kGreatOutdoors));
    tokens.push_back(toks("o" + std::to_string(i), {"beach", "the", "walk"}));
  }
  for (int i = 0; i < 30; ++i) {
    const std::string poi = "food" + std::to_string(i % 6);
    records.push_back(rec("f" + std::to_string(i), poi, CategoryLabel::kFood));
    tokens.push_back(toks("f" + std::to_string(i), {"lunch", "the", "walk"}));
  }
  const auto rows = chi2_associations(records, tokens, CategoryLabel::kGreatOutdoors, 5, 10);
  REQUIRE_FALSE(rows.empty());
  CHECK(rows[0].feature == "beach");
  CHECK(rows[0].chi2 > 0);
  CHECK(rows[0].significant);

  SECTION("a token with identical rates in and out has chi2 near zero") {
    // "the" carries the same normalized mass in both categories, so wherever
    // it lands its statistic is indistinguishable from zero.
    for (const auto& row : rows)
      if (row.feature == "the") CHECK_THAT(row.chi2, Catch::Matchers::WithinAbs(0.0, 1e-9));
    CHECK(rows[0].feature != "the");
  }
}

TEST_CASE("features below the POI support threshold are excluded") {
  std::vector<TweetRecord> records;
  std::vector<TokenSequence> tokens;
  // "niche" is highly associated but confined to 2 POIs.
  for (int i = 0; i < 20; ++i) {
    const std::string poi = "bar" + std::to_string(i % 2);
    records.push_back(rec("n" + std::to_string(i), poi, CategoryLabel::kNightlifeSpot));
    tokens.push_back(toks("n" + std::to_string(i), {"niche", "night"}));
  }
  for (int i = 0; i < 20; ++i) {
    const std::string poi = "shop" + std::to_string(i % 7);
    records.push_back(rec("s" + std::to_string(i), poi, CategoryLabel::kShopService));
    tokens.push_back(toks("s" + std::to_string(i), {"store", "night"}));
  }
  const auto accum = Chi2Accumulator(records, tokens);
  CHECK(accum.poi_support("niche") == 2);
  const auto rows = accum.associations(CategoryLabel::kNightlifeSpot, 5, 10);
  for (const auto& row : rows) CHECK(row.feature != "niche");
}

TEST_CASE("chi2 on an empty category is an error") {
  std::vector<TweetRecord> records = {rec("a", "p", CategoryLabel::kFood)};
  std::vector<TokenSequence> tokens = {toks("a", {"x"})};
  CHECK_THROWS(chi2_associations(records, tokens, CategoryLabel::kTravelTransport, 1, 10));
}

TEST_CASE("chi2 TSV has category, feature, value and significance columns") {
  std::vector<Chi2Row> rows = {{"beach", CategoryLabel::kGreatOutdoors, 591.81, true},
                               {"hike", CategoryLabel::kGreatOutdoors, 9.5, false}};
  std::ostringstream out;
  write_chi2_tsv(out, rows);
  CHECK(out.str() ==
        "Great Outdoors\tbeach\t591.810000\ttrue\n"
        "Great Outdoors\thike\t9.500000\tfalse\n");
}

TEST_CASE("temporal histograms report per-category percentages") {
  std::vector<TweetRecord> records;
  // All Food tweets on a Monday (2017-06-05), at hours 9 and 21.
  records.push_back(rec("a", "p1", CategoryLabel::kFood, "2017-06-05T09:00:00"));
  records.push_back(rec("b", "p1", CategoryLabel::kFood, "2017-06-05T21:10:00"));
  records.push_back(rec("c", "p1", CategoryLabel::kFood, "2017-06-05T21:45:00"));
  // One Travel tweet on a Sunday.
  records.push_back(rec("d", "p2", CategoryLabel::kTravelTransport, "2018-03-04T05:00:00"));

  const auto hists = temporal_histograms(records);
  const auto& food = hists[static_cast<std::size_t>(category_index(CategoryLabel::kFood))];
  CHECK(food.count == 3);
  CHECK_THAT(food.dow_percent[0], Catch::Matchers::WithinAbs(100.0, 1e-9));
  for (int d = 1; d < 7; ++d) CHECK(food.dow_percent[static_cast<std::size_t>(d)] == 0.0);
  CHECK_THAT(food.hour_percent[9], Catch::Matchers::WithinAbs(100.0 / 3, 1e-9));
  CHECK_THAT(food.hour_percent[21], Catch::Matchers::WithinAbs(200.0 / 3, 1e-9));

  SECTION("each non-empty series sums to 100") {
    for (const auto& h : hists) {
      if (h.empty()) continue;
      double dsum = 0, hsum = 0;
      for (double v : h.dow_percent) dsum += v;
      for (double v : h.hour_percent) hsum += v;
      CHECK_THAT(dsum, Catch::Matchers::WithinAbs(100.0, 1e-6));
      CHECK_THAT(hsum, Catch::Matchers::WithinAbs(100.0, 1e-6));
    }
  }
  SECTION("empty categories are flagged and all-zero") {
    const auto& arts =
        hists[static_cast<std::size_t>(category_index(CategoryLabel::kArtsEntertainment))];
    CHECK(arts.empty());
    for (double v : arts.dow_percent) CHECK(v == 0.0);
  }
}

TEST_CASE("temporal CSV has a header and 31 rows per category") {
  std::vector<TweetRecord> records = {rec("a", "p", CategoryLabel::kFood)};
  std::ostringstream out;
  write_temporal_csv(out, temporal_histograms(records));
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "category,unit,index,percent");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == kNumCategories * 31);
}

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "poi/category.hpp"
#include "poi/corpus.hpp"
#include "poi/textproc.hpp"

namespace poi {

// chi-squared critical value at p = 0.001 with one degree of freedom.
inline constexpr double kChi2CriticalP001 = 10.827566170662733;

struct Chi2Row {
  std::string feature;
  CategoryLabel category = CategoryLabel::kArtsEntertainment;
  double chi2 = 0;
  bool significant = false;  // p < 0.001
};

// Pearson chi-squared for a 2x2 table from observed cells and marginal
// expectations. Zero when any marginal vanishes.
inline double pearson_chi2_2x2(double o11, double o12, double o21, double o22) {
  const double total = o11 + o12 + o21 + o22;
  const double r1 = o11 + o12, r2 = o21 + o22;
  const double c1 = o11 + o21, c2 = o12 + o22;
  if (total <= 0 || r1 <= 0 || r2 <= 0 || c1 <= 0 || c2 <= 0) return 0;
  double chi2 = 0;
  const double obs[2][2] = {{o11, o12}, {o21, o22}};
  const double rows[2] = {r1, r2}, cols[2] = {c1, c2};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const double expected = rows[r] * cols[c] / total;
      const double d = obs[r][c] - expected;
      chi2 += d * d / expected;
    }
  }
  return chi2;
}

// Normalized-frequency masses accumulated once over the training split, then
// reused for each category's ranking. Per tweet, unigram frequencies are
// normalized to sum to one, so each tweet contributes one unit of mass.
class Chi2Accumulator {
 public:
  Chi2Accumulator(const std::vector<TweetRecord>& records,
                  const std::vector<TokenSequence>& tokens) {
    if (records.size() != tokens.size())
      throw std::invalid_argument("chi2: records/tokens length mismatch");
    std::unordered_map<std::string, int> poi_index;
    std::unordered_map<std::string_view, double> tweet_freq;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& toks = tokens[i].tokens;
      if (toks.empty()) continue;  // no mass to distribute
      ++num_tweets_;
      const int cat = category_index(records[i].category);
      ++tweets_per_category_[static_cast<std::size_t>(cat)];
      const int poi =
          poi_index.emplace(records[i].poi_id, static_cast<int>(poi_index.size()))
              .first->second;
      tweet_freq.clear();
      const double unit = 1.0 / static_cast<double>(toks.size());
      for (const std::string& t : toks) tweet_freq[t] += unit;
      for (const auto& [tok, mass] : tweet_freq) {
        Entry& e = entries_[std::string(tok)];
        e.total_mass += mass;
        e.category_mass[static_cast<std::size_t>(cat)] += mass;
        e.pois.insert(poi);
      }
    }
  }

  int tweets_in(CategoryLabel c) const {
    return tweets_per_category_[static_cast<std::size_t>(category_index(c))];
  }

  // Ranked positive associations for one category. Eligible unigrams occur in
  // at least min_pois distinct POIs; rows are sorted by chi2 descending, then
  // by feature for stability.
  std::vector<Chi2Row> associations(CategoryLabel category, int min_pois = 5,
                                    int top_k = 10) const {
    const int cat = category_index(category);
    const double in_total = tweets_per_category_[static_cast<std::size_t>(cat)];
    if (in_total <= 0)
      throw std::runtime_error("chi2: category \"" + std::string(category_name(category)) +
                               "\" has no tweets");
    const double grand_total = num_tweets_;
    std::vector<Chi2Row> rows;
    for (const auto& [tok, e] : entries_) {
      if (static_cast<int>(e.pois.size()) < min_pois) continue;
      if (e.total_mass <= 0) continue;
      const double o11 = e.category_mass[static_cast<std::size_t>(cat)];
      const double o12 = in_total - o11;
      const double o21 = e.total_mass - o11;
      const double o22 = (grand_total - in_total) - o21;
      const double expected_in = e.total_mass * in_total / grand_total;
      if (o11 <= expected_in) continue;  // keep overrepresented features only
      const double chi2 = pearson_chi2_2x2(o11, o12, o21, o22);
      rows.push_back({tok, category, chi2, chi2 > kChi2CriticalP001});
    }
    std::sort(rows.begin(), rows.end(), [](const Chi2Row& a, const Chi2Row& b) {
      if (a.chi2 != b.chi2) return a.chi2 > b.chi2;
      return a.feature < b.feature;
    });
    if (top_k >= 0 && rows.size() > static_cast<std::size_t>(top_k))
      rows.resize(static_cast<std::size_t>(top_k));
    return rows;
  }

  // Distinct-POI support for a unigram.
  int poi_support(const std::string& token) const {
    auto it = entries_.find(token);
    return it == entries_.end() ? 0 : static_cast<int>(it->second.pois.size());
  }

 private:
  struct Entry {
    double total_mass = 0;
    std::array<double, kNumCategories> category_mass{};
    std::unordered_set<int> pois;
  };
  std::map<std::string, Entry> entries_;  // ordered for deterministic iteration
  std::array<int, kNumCategories> tweets_per_category_{};
  int num_tweets_ = 0;
};

// Convenience wrapper matching the one-category call shape.
inline std::vector<Chi2Row> chi2_associations(const std::vector<TweetRecord>& train_records,
                                              const std::vector<TokenSequence>& train_tokens,
                                              CategoryLabel category, int min_pois = 5,
                                              int top_k = 10) {
  return Chi2Accumulator(train_records, train_tokens).associations(category, min_pois, top_k);
}

inline void write_chi2_tsv(std::ostream& out, const std::vector<Chi2Row>& rows) {
  char buf[32];
  for (const Chi2Row& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.6f", r.chi2);
    out << category_name(r.category) << "\t" << r.feature << "\t" << buf << "\t"
        << (r.significant ? "true" : "false") << "\n";
  }
}

// Per-category share of tweets by weekday and by hour, in percent. Series sum
// to 100 unless the category is empty (then all-zero and flagged by count 0).
struct TemporalHistogram {
  CategoryLabel category = CategoryLabel::kArtsEntertainment;
  int count = 0;
  std::array<double, 7> dow_percent{};
  std::array<double, 24> hour_percent{};

  bool empty() const { return count == 0; }
};

inline std::array<TemporalHistogram, kNumCategories> temporal_histograms(
    const std::vector<TweetRecord>& records) {
  std::array<TemporalHistogram, kNumCategories> out;
  for (int c = 0; c < kNumCategories; ++c) out[static_cast<std::size_t>(c)].category =
      category_from_index(c);
  for (const TweetRecord& r : records) {
    TemporalHistogram& h = out[static_cast<std::size_t>(category_index(r.category))];
    ++h.count;
    h.dow_percent[static_cast<std::size_t>(day_of_week_monday0(r.timestamp))] += 1.0;
    h.hour_percent[static_cast<std::size_t>(r.timestamp.hour)] += 1.0;
  }
  for (TemporalHistogram& h : out) {
    if (h.count == 0) continue;
    const double scale = 100.0 / static_cast<double>(h.count);
    for (double& v : h.dow_percent) v *= scale;
    for (double& v : h.hour_percent) v *= scale;
  }
  return out;
}

// CSV: category,unit,index,percent with unit in {dow,hour}.
inline void write_temporal_csv(std::ostream& out,
                               const std::array<TemporalHistogram, kNumCategories>& hists) {
  out << "category,unit,index,percent\n";
  char buf[32];
  for (const TemporalHistogram& h : hists) {
    for (int d = 0; d < 7; ++d) {
      std::snprintf(buf, sizeof(buf), "%.6f", h.dow_percent[static_cast<std::size_t>(d)]);
      out << category_name(h.category) << ",dow," << d << "," << buf << "\n";
    }
    for (int hr = 0; hr < 24; ++hr) {
      std::snprintf(buf, sizeof(buf), "%.6f", h.hour_percent[static_cast<std::size_t>(hr)]);
      out << category_name(h.category) << ",hour," << hr << "," << buf << "\n";
    }
  }
}

}  // namespace poi

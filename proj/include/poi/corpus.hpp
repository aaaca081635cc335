#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "poi/category.hpp"
#include "poi/rng.hpp"
#include "poi/timeutil.hpp"

namespace poi {

// One post, as read from the corpus file.
struct TweetRecord {
  std::string tweet_id;
  std::string text;  // raw, as posted
  std::string poi_id;
  CategoryLabel category = CategoryLabel::kArtsEntertainment;
  Timestamp timestamp;
};

// Loads a JSONL corpus. One object per line with fields
// {tweet_id, text, poi_id, category, created_at}; records come back in file
// order. Any defect is reported with its 1-based line number.
inline std::vector<TweetRecord> load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);

  std::vector<TweetRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fail = [&](const std::string& why) -> void {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": " + why);
    };
    if (line.empty()) fail("blank line");
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail("malformed JSON object");

    const auto field = [&](const char* name) -> std::string {
      auto it = j.find(name);
      if (it == j.end() || !it->is_string())
        fail(std::string("missing or non-string field \"") + name + "\"");
      return it->get<std::string>();
    };

    TweetRecord r;
    r.tweet_id = field("tweet_id");
    r.text = field("text");
    if (r.text.empty()) fail("empty text");
    r.poi_id = field("poi_id");
    try {
      r.category = parse_category(field("category"));
      r.timestamp = parse_timestamp(field("created_at"));
    } catch (const std::exception& e) {
      fail(e.what());
    }
    records.push_back(std::move(r));
  }
  return records;
}

// Drops POIs with fewer than min_tweets posts and subsamples POIs with more
// than cap posts down to exactly cap (seeded, without replacement). The
// relative order of surviving records is preserved. The subsample for a POI
// depends only on (seed, poi_id, its record count), not on the rest of the
// corpus.
inline std::vector<TweetRecord> filter_pois(const std::vector<TweetRecord>& records,
                                            int min_tweets, int cap, std::uint64_t seed) {
  if (cap < min_tweets)
    throw std::invalid_argument("filter_pois: cap (" + std::to_string(cap) +
                                ") < min_tweets (" + std::to_string(min_tweets) + ")");

  std::unordered_map<std::string, std::vector<std::size_t>> by_poi;
  for (std::size_t i = 0; i < records.size(); ++i) by_poi[records[i].poi_id].push_back(i);

  std::vector<char> keep(records.size(), 0);
  for (const auto& [poi_id, idx] : by_poi) {
    if (idx.size() < static_cast<std::size_t>(min_tweets)) continue;
    if (idx.size() <= static_cast<std::size_t>(cap)) {
      for (std::size_t i : idx) keep[i] = 1;
      continue;
    }
    // Partial Fisher-Yates over positions, then restore original order.
    std::vector<std::size_t> pos(idx.size());
    std::iota(pos.begin(), pos.end(), 0);
    Rng rng(seed ^ fnv1a64(poi_id));
    for (std::size_t k = 0; k < static_cast<std::size_t>(cap); ++k) {
      std::size_t j = k + static_cast<std::size_t>(rng.next_below(pos.size() - k));
      std::swap(pos[k], pos[j]);
    }
    pos.resize(static_cast<std::size_t>(cap));
    for (std::size_t p : pos) keep[idx[p]] = 1;
  }

  std::vector<TweetRecord> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    if (keep[i]) out.push_back(records[i]);
  return out;
}

enum class Split { kTrain = 0, kDev = 1, kTest = 2 };

inline std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  throw std::logic_error("bad split tag");
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "dev") return Split::kDev;
  if (s == "test") return Split::kTest;
  throw std::runtime_error("unknown split tag \"" + std::string(s) + "\"");
}

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

// Location-level split assignment. The map is ordered so serialization is
// canonical for a given POI set.
struct SplitManifest {
  std::map<std::string, Split> assignment;
  std::uint64_t seed = 0;
  SplitRatios ratios;
};

// Assigns whole POIs to train/dev/test: canonical (sorted) order, one seeded
// shuffle, then a contiguous partition with rounded boundaries that exhaust
// the list. Depends only on the poi_id set, the seed, and the ratios.
inline SplitManifest split_locations(const std::vector<std::string>& poi_ids,
                                     SplitRatios ratios, std::uint64_t seed) {
  if (poi_ids.empty()) throw std::invalid_argument("split_locations: empty poi_id list");
  const double sum = ratios.train + ratios.dev + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("split_locations: ratios sum to " + std::to_string(sum) +
                                ", expected 1");
  if (ratios.train < 0 || ratios.dev < 0 || ratios.test < 0)
    throw std::invalid_argument("split_locations: negative ratio");

  std::vector<std::string> ids = poi_ids;
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw std::invalid_argument("split_locations: duplicate poi_id");

  Rng rng(seed);
  rng.shuffle(ids);

  const auto n = static_cast<double>(ids.size());
  std::size_t b1 = static_cast<std::size_t>(std::llround(n * ratios.train));
  std::size_t b2 = static_cast<std::size_t>(std::llround(n * (ratios.train + ratios.dev)));
  b1 = std::min(b1, ids.size());
  b2 = std::clamp(b2, b1, ids.size());

  SplitManifest m;
  m.seed = seed;
  m.ratios = ratios;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    Split s = i < b1 ? Split::kTrain : (i < b2 ? Split::kDev : Split::kTest);
    m.assignment.emplace(std::move(ids[i]), s);
  }
  return m;
}

inline Split split_of(const SplitManifest& m, const std::string& poi_id) {
  auto it = m.assignment.find(poi_id);
  if (it == m.assignment.end())
    throw std::runtime_error("poi_id \"" + poi_id + "\" not present in split manifest");
  return it->second;
}

struct PartitionedRecords {
  std::vector<TweetRecord> train;
  std::vector<TweetRecord> dev;
  std::vector<TweetRecord> test;
};

// Tweets inherit their POI's split; file order is preserved within each part.
inline PartitionedRecords partition_records(const std::vector<TweetRecord>& records,
                                            const SplitManifest& m) {
  PartitionedRecords p;
  for (const TweetRecord& r : records) {
    switch (split_of(m, r.poi_id)) {
      case Split::kTrain: p.train.push_back(r); break;
      case Split::kDev: p.dev.push_back(r); break;
      case Split::kTest: p.test.push_back(r); break;
    }
  }
  return p;
}

namespace detail {
// Short fixed formatting for ratio values; parses back to the same double for
// the ratios in ordinary use.
inline std::string format_ratio(double r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", r);
  return buf;
}
}  // namespace detail

inline void write_manifest(std::ostream& out, const SplitManifest& m) {
  out << "# seed=" << m.seed << " ratios=" << detail::format_ratio(m.ratios.train) << ","
      << detail::format_ratio(m.ratios.dev) << "," << detail::format_ratio(m.ratios.test)
      << "\n";
  for (const auto& [poi_id, split] : m.assignment)
    out << poi_id << "\t" << split_name(split) << "\n";
}

inline void write_manifest_file(const std::string& path, const SplitManifest& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open manifest for writing: " + path);
  write_manifest(out, m);
}

inline SplitManifest read_manifest(std::istream& in, const std::string& name) {
  SplitManifest m;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::size_t sp = line.find("seed=");
      std::size_t rp = line.find("ratios=");
      if (sp == std::string::npos || rp == std::string::npos)
        throw std::runtime_error(name + ": line " + std::to_string(line_no) +
                                 ": manifest header missing seed/ratios");
      m.seed = std::strtoull(line.c_str() + sp + 5, nullptr, 10);
      double r[3];
      char comma1, comma2;
      std::istringstream rs(line.substr(rp + 7));
      if (!(rs >> r[0] >> comma1 >> r[1] >> comma2 >> r[2]) || comma1 != ',' || comma2 != ',')
        throw std::runtime_error(name + ": line " + std::to_string(line_no) +
                                 ": bad ratios in manifest header");
      m.ratios = {r[0], r[1], r[2]};
      have_header = true;
      continue;
    }
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error(name + ": line " + std::to_string(line_no) +
                               ": expected poi_id<TAB>split");
    std::string poi_id = line.substr(0, tab);
    Split s = parse_split(std::string_view(line).substr(tab + 1));
    if (!m.assignment.emplace(std::move(poi_id), s).second)
      throw std::runtime_error(name + ": line " + std::to_string(line_no) +
                               ": duplicate poi_id in manifest");
  }
  if (!have_header) throw std::runtime_error(name + ": manifest header line missing");
  if (m.assignment.empty()) throw std::runtime_error(name + ": empty manifest");
  return m;
}

inline SplitManifest read_manifest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  return read_manifest(in, path);
}

// Distinct poi_ids in order of first appearance.
inline std::vector<std::string> unique_poi_ids(const std::vector<TweetRecord>& records) {
  std::vector<std::string> out;
  std::unordered_set<std::string_view> seen;
  for (const TweetRecord& r : records)
    if (seen.insert(r.poi_id).second) out.push_back(r.poi_id);
  return out;
}

}  // namespace poi

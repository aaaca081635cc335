#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "poi/timeutil.hpp"

namespace poi {

// Sparse feature vector: strictly increasing indices, no stored zeros.
struct SparseVector {
  std::vector<std::pair<int, double>> entries;
  int dim = 0;

  std::size_t nnz() const { return entries.size(); }
  double norm() const {
    double s = 0;
    for (const auto& [i, w] : entries) s += w * w;
    return std::sqrt(s);
  }
};

// Multiset of n-grams for one document.
using NgramCounts = std::unordered_map<std::string, int>;

// All contiguous n-grams for n in [n_min, n_max], tokens joined by a single
// space, with multiplicities.
inline NgramCounts extract_ngrams(const std::vector<std::string>& tokens, int n_min = 1,
                                  int n_max = 3) {
  if (n_min < 1 || n_max < n_min)
    throw std::invalid_argument("extract_ngrams: bad n-gram order range [" +
                                std::to_string(n_min) + "," + std::to_string(n_max) + "]");
  NgramCounts counts;
  const int len = static_cast<int>(tokens.size());
  std::string gram;
  for (int n = n_min; n <= n_max; ++n) {
    for (int start = 0; start + n <= len; ++start) {
      gram.clear();
      for (int k = 0; k < n; ++k) {
        if (k > 0) gram += ' ';
        gram += tokens[static_cast<std::size_t>(start + k)];
      }
      ++counts[gram];
    }
  }
  return counts;
}

// Fitted TF-IDF vocabulary over the training documents. Feature indices are
// assigned in lexicographic n-gram order (so the fit does not depend on
// document order), which also makes lookup a binary search.
struct TfidfModel {
  std::vector<std::string> ngrams;  // index -> n-gram; sorted
  std::vector<int> doc_freq;        // index -> number of training docs containing it
  int num_docs = 0;
  int n_min = 1;
  int n_max = 3;

  int dim() const { return static_cast<int>(ngrams.size()); }
  double idf(int feature) const {
    return std::log((num_docs + 1.0) / (doc_freq[static_cast<std::size_t>(feature)] + 1.0)) +
           1.0;
  }

  // Index of an n-gram, or -1 when unseen in training.
  int find(std::string_view gram) const {
    auto it = std::lower_bound(ngrams.begin(), ngrams.end(), gram);
    if (it == ngrams.end() || *it != gram) return -1;
    return static_cast<int>(it - ngrams.begin());
  }
};

inline TfidfModel fit_tfidf(const std::vector<NgramCounts>& train_docs, int n_min = 1,
                            int n_max = 3) {
  if (train_docs.empty()) throw std::invalid_argument("fit_tfidf: empty training corpus");
  std::unordered_map<std::string, int> df;
  for (const NgramCounts& doc : train_docs)
    for (const auto& [gram, count] : doc) ++df[gram];

  TfidfModel model;
  model.num_docs = static_cast<int>(train_docs.size());
  model.n_min = n_min;
  model.n_max = n_max;
  model.ngrams.reserve(df.size());
  for (const auto& [gram, freq] : df) model.ngrams.push_back(gram);
  std::sort(model.ngrams.begin(), model.ngrams.end());
  model.doc_freq.resize(model.ngrams.size());
  for (std::size_t i = 0; i < model.ngrams.size(); ++i)
    model.doc_freq[i] = df.at(model.ngrams[i]);
  return model;
}

// weight(g) = tf(g) * (ln((N+1)/(df(g)+1)) + 1), then the whole vector is
// scaled to unit Euclidean norm. N-grams unseen in training are dropped; a
// document with no trained n-grams yields the zero vector.
inline SparseVector transform(const NgramCounts& doc, const TfidfModel& model) {
  SparseVector v;
  v.dim = model.dim();
  v.entries.reserve(doc.size());
  for (const auto& [gram, tf] : doc) {
    const int idx = model.find(gram);
    if (idx < 0) continue;
    v.entries.emplace_back(idx, static_cast<double>(tf) * model.idf(idx));
  }
  std::sort(v.entries.begin(), v.entries.end());
  const double norm = v.norm();
  if (norm > 0) {
    for (auto& [i, w] : v.entries) w /= norm;
  }
  return v;
}

// 31-dim two-hot time encoding: positions 0-23 hour of day, 24-30 day of week
// with Monday at 24.
struct TemporalVector {
  int hour = 0;  // 0..23
  int dow = 0;   // 0 = Monday .. 6 = Sunday

  static constexpr int kDim = 31;

  std::array<double, kDim> dense() const {
    std::array<double, kDim> v{};
    v[static_cast<std::size_t>(hour)] = 1.0;
    v[static_cast<std::size_t>(24 + dow)] = 1.0;
    return v;
  }
  std::array<int, 2> one_indices() const { return {hour, 24 + dow}; }
};

inline TemporalVector encode_time(const Timestamp& t) {
  return {t.hour, day_of_week_monday0(t)};
}

inline SparseVector temporal_to_sparse(const TemporalVector& t) {
  SparseVector v;
  v.dim = TemporalVector::kDim;
  v.entries = {{t.hour, 1.0}, {24 + t.dow, 1.0}};
  return v;
}

// Text features first, the 31 temporal slots appended after them.
inline SparseVector concat_features(const SparseVector& text_vec, const TemporalVector& time_vec) {
  SparseVector v;
  v.dim = text_vec.dim + TemporalVector::kDim;
  v.entries = text_vec.entries;
  v.entries.emplace_back(text_vec.dim + time_vec.hour, 1.0);
  v.entries.emplace_back(text_vec.dim + 24 + time_vec.dow, 1.0);
  return v;
}

// Feature-index map export: ngram<TAB>doc_freq, one line per feature in index
// order.
inline void write_feature_map_tsv(std::ostream& out, const TfidfModel& model) {
  for (std::size_t i = 0; i < model.ngrams.size(); ++i)
    out << model.ngrams[i] << "\t" << model.doc_freq[i] << "\n";
}

}  // namespace poi

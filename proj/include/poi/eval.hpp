#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "poi/category.hpp"
#include "poi/rng.hpp"

namespace poi {

// Accuracy and macro-averaged precision/recall/F1, all reported x100.
// Macro values are unweighted means over all classes, absent ones included.
struct MetricsReport {
  double accuracy = 0;
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
  std::vector<double> precision;  // per class, x100
  std::vector<double> recall;
  std::vector<double> f1;
  int n_examples = 0;
  int num_classes = 0;
};

namespace eval_detail {
inline void check_labels(const std::vector<int>& preds, const std::vector<int>& golds,
                         int num_classes) {
  if (preds.empty()) throw std::invalid_argument("evaluate: empty input");
  if (preds.size() != golds.size())
    throw std::invalid_argument("evaluate: length mismatch: " + std::to_string(preds.size()) +
                                " predictions vs " + std::to_string(golds.size()) + " golds");
  for (int v : preds)
    if (v < 0 || v >= num_classes) throw std::invalid_argument("evaluate: prediction out of range");
  for (int v : golds)
    if (v < 0 || v >= num_classes) throw std::invalid_argument("evaluate: gold label out of range");
}

inline std::vector<int> to_ints(const std::vector<CategoryLabel>& labels) {
  std::vector<int> out;
  out.reserve(labels.size());
  for (CategoryLabel c : labels) out.push_back(category_index(c));
  return out;
}
}  // namespace eval_detail

// Per-class zero divisions resolve to 0 so the macro means stay defined.
inline MetricsReport evaluate(const std::vector<int>& preds, const std::vector<int>& golds,
                              int num_classes = kNumCategories) {
  eval_detail::check_labels(preds, golds, num_classes);
  const std::size_t k = static_cast<std::size_t>(num_classes);
  std::vector<double> tp(k, 0), fp(k, 0), fn(k, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == golds[i]) {
      ++correct;
      ++tp[static_cast<std::size_t>(golds[i])];
    } else {
      ++fp[static_cast<std::size_t>(preds[i])];
      ++fn[static_cast<std::size_t>(golds[i])];
    }
  }
  MetricsReport r;
  r.n_examples = static_cast<int>(preds.size());
  r.num_classes = num_classes;
  r.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(preds.size());
  r.precision.resize(k);
  r.recall.resize(k);
  r.f1.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const double p = tp[c] + fp[c] > 0 ? tp[c] / (tp[c] + fp[c]) : 0.0;
    const double rec = tp[c] + fn[c] > 0 ? tp[c] / (tp[c] + fn[c]) : 0.0;
    const double f = p + rec > 0 ? 2 * p * rec / (p + rec) : 0.0;
    r.precision[c] = 100.0 * p;
    r.recall[c] = 100.0 * rec;
    r.f1[c] = 100.0 * f;
    r.macro_precision += r.precision[c];
    r.macro_recall += r.recall[c];
    r.macro_f1 += r.f1[c];
  }
  r.macro_precision /= static_cast<double>(num_classes);
  r.macro_recall /= static_cast<double>(num_classes);
  r.macro_f1 /= static_cast<double>(num_classes);
  return r;
}

inline MetricsReport evaluate(const std::vector<CategoryLabel>& preds,
                              const std::vector<CategoryLabel>& golds) {
  return evaluate(eval_detail::to_ints(preds), eval_detail::to_ints(golds), kNumCategories);
}

// Entry (i, j): gold class i, predicted class j. In rows mode each non-empty
// row is normalized to sum to 1; empty rows stay all-zero.
struct ConfusionMatrix {
  enum class Normalize { kCounts, kRows };

  int num_classes = 0;
  Normalize normalization = Normalize::kCounts;
  std::vector<double> cells;  // row-major

  double at(int gold, int pred) const {
    return cells[static_cast<std::size_t>(gold) * static_cast<std::size_t>(num_classes) +
                 static_cast<std::size_t>(pred)];
  }
};

inline ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& golds,
                                 ConfusionMatrix::Normalize normalize = ConfusionMatrix::Normalize::kRows,
                                 int num_classes = kNumCategories) {
  eval_detail::check_labels(preds, golds, num_classes);
  ConfusionMatrix m;
  m.num_classes = num_classes;
  m.normalization = normalize;
  m.cells.assign(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_classes),
                 0.0);
  for (std::size_t i = 0; i < preds.size(); ++i)
    m.cells[static_cast<std::size_t>(golds[i]) * static_cast<std::size_t>(num_classes) +
            static_cast<std::size_t>(preds[i])] += 1.0;
  if (normalize == ConfusionMatrix::Normalize::kRows) {
    for (int g = 0; g < num_classes; ++g) {
      double* row = m.cells.data() + static_cast<std::size_t>(g) * static_cast<std::size_t>(num_classes);
      double sum = 0;
      for (int p = 0; p < num_classes; ++p) sum += row[p];
      if (sum > 0)
        for (int p = 0; p < num_classes; ++p) row[p] /= sum;
    }
  }
  return m;
}

inline ConfusionMatrix confusion(const std::vector<CategoryLabel>& preds,
                                 const std::vector<CategoryLabel>& golds,
                                 ConfusionMatrix::Normalize normalize = ConfusionMatrix::Normalize::kRows) {
  return confusion(eval_detail::to_ints(preds), eval_detail::to_ints(golds), normalize,
                   kNumCategories);
}

// Constant predictor of the most frequent training class (ties toward the
// lowest class index).
struct MajorityBaseline {
  CategoryLabel cls = CategoryLabel::kArtsEntertainment;

  std::vector<CategoryLabel> predict_n(std::size_t n) const {
    return std::vector<CategoryLabel>(n, cls);
  }
};

inline MajorityBaseline majority_baseline(const std::vector<CategoryLabel>& train_golds) {
  if (train_golds.empty()) throw std::invalid_argument("majority_baseline: empty labels");
  std::array<std::size_t, kNumCategories> counts{};
  for (CategoryLabel c : train_golds) ++counts[static_cast<std::size_t>(category_index(c))];
  int best = 0;
  for (int c = 1; c < kNumCategories; ++c)
    if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)]) best = c;
  return {category_from_index(best)};
}

// Seeded stochastic predictor drawing classes uniformly or from the empirical
// training prior.
class RandomBaseline {
 public:
  enum class Mode { kUniform, kPrior };

  RandomBaseline(const std::vector<CategoryLabel>& train_golds, Mode mode, std::uint64_t seed)
      : rng_(seed) {
    if (train_golds.empty()) throw std::invalid_argument("random_baseline: empty labels");
    if (mode == Mode::kUniform) {
      probs_.fill(1.0 / kNumCategories);
    } else {
      probs_.fill(0.0);
      for (CategoryLabel c : train_golds)
        probs_[static_cast<std::size_t>(category_index(c))] += 1.0;
      for (double& p : probs_) p /= static_cast<double>(train_golds.size());
    }
  }

  const std::array<double, kNumCategories>& class_probs() const { return probs_; }

  CategoryLabel predict() {
    const double u = rng_.next_double();
    double acc = 0;
    for (int c = 0; c < kNumCategories; ++c) {
      acc += probs_[static_cast<std::size_t>(c)];
      if (u < acc) return category_from_index(c);
    }
    return category_from_index(kNumCategories - 1);
  }

  std::vector<CategoryLabel> predict_n(std::size_t n) {
    std::vector<CategoryLabel> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(predict());
    return out;
  }

 private:
  std::array<double, kNumCategories> probs_{};
  Rng rng_;
};

inline RandomBaseline random_baseline(const std::vector<CategoryLabel>& train_golds,
                                      RandomBaseline::Mode mode, std::uint64_t seed) {
  return RandomBaseline(train_golds, mode, seed);
}

// ---- report files ----

inline nlohmann::json metrics_to_json(const MetricsReport& r) {
  if (r.num_classes != kNumCategories)
    throw std::invalid_argument("metrics_to_json: expected the 8-class report");
  nlohmann::json j;
  j["accuracy"] = r.accuracy;
  j["macro_precision"] = r.macro_precision;
  j["macro_recall"] = r.macro_recall;
  j["macro_f1"] = r.macro_f1;
  j["n_examples"] = r.n_examples;
  nlohmann::json per;
  for (int c = 0; c < kNumCategories; ++c) {
    nlohmann::json row;
    row["precision"] = r.precision[static_cast<std::size_t>(c)];
    row["recall"] = r.recall[static_cast<std::size_t>(c)];
    row["f1"] = r.f1[static_cast<std::size_t>(c)];
    per[std::string(category_name(category_from_index(c)))] = std::move(row);
  }
  j["per_class"] = std::move(per);
  return j;
}

inline void write_metrics_json(std::ostream& out, const MetricsReport& r) {
  out << metrics_to_json(r).dump(2) << "\n";
}

// CSV with category-name headers; counts print as integers, normalized rows
// with six decimals.
inline void write_confusion_csv(std::ostream& out, const ConfusionMatrix& m) {
  if (m.num_classes != kNumCategories)
    throw std::invalid_argument("write_confusion_csv: expected the 8-class matrix");
  out << "gold\\pred";
  for (int c = 0; c < kNumCategories; ++c) out << "," << category_name(category_from_index(c));
  out << "\n";
  char buf[32];
  for (int g = 0; g < kNumCategories; ++g) {
    out << category_name(category_from_index(g));
    for (int p = 0; p < kNumCategories; ++p) {
      if (m.normalization == ConfusionMatrix::Normalize::kCounts)
        std::snprintf(buf, sizeof(buf), "%.0f", m.at(g, p));
      else
        std::snprintf(buf, sizeof(buf), "%.6f", m.at(g, p));
      out << "," << buf;
    }
    out << "\n";
  }
}

}  // namespace poi

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "poi/category.hpp"
#include "poi/features.hpp"
#include "poi/rng.hpp"

namespace poi {

using ClassDistribution = std::array<double, kNumCategories>;

enum class Penalty { kL1, kL2 };

inline std::string_view penalty_name(Penalty p) { return p == Penalty::kL1 ? "l1" : "l2"; }
inline Penalty parse_penalty(std::string_view s) {
  if (s == "l1" || s == "L1") return Penalty::kL1;
  if (s == "l2" || s == "L2") return Penalty::kL2;
  throw std::runtime_error("unknown penalty \"" + std::string(s) + "\"");
}

// Numerically stabilized softmax over arbitrary logit vectors.
inline std::vector<double> softmax(const std::vector<double>& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += (p[i] = std::exp(logits[i] - mx));
  for (double& v : p) v /= z;
  return p;
}

// Multinomial logistic regression parameters for the 8-way task. Weights are
// stored feature-major: weights[j * 8 + c].
struct LrModel {
  int dim = 0;
  std::vector<double> weights;
  std::array<double, kNumCategories> bias{};
  Penalty penalty = Penalty::kL1;
  double alpha = 0.01;
  std::uint64_t seed = 0;
  std::string feature_space = "W";  // "T", "W" or "W+T"
  std::string vocab_ref;

  double weight(int feature, int cls) const {
    return weights[static_cast<std::size_t>(feature) * kNumCategories +
                   static_cast<std::size_t>(cls)];
  }
  double& weight(int feature, int cls) {
    return weights[static_cast<std::size_t>(feature) * kNumCategories +
                   static_cast<std::size_t>(cls)];
  }
  std::size_t zero_weight_count() const {
    return static_cast<std::size_t>(std::count(weights.begin(), weights.end(), 0.0));
  }
};

inline LrModel make_lr_model(int dim) {
  LrModel m;
  m.dim = dim;
  m.weights.assign(static_cast<std::size_t>(dim) * kNumCategories, 0.0);
  return m;
}

namespace lr_detail {

inline void logits_of(const LrModel& m, const SparseVector& x,
                      std::array<double, kNumCategories>& out) {
  out = m.bias;
  for (const auto& [j, v] : x.entries) {
    const double* wj = m.weights.data() + static_cast<std::size_t>(j) * kNumCategories;
    for (int c = 0; c < kNumCategories; ++c) out[static_cast<std::size_t>(c)] += wj[c] * v;
  }
}

inline void softmax_inplace(std::array<double, kNumCategories>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0;
  for (double& v : z) sum += (v = std::exp(v - mx));
  for (double& v : z) v /= sum;
}

inline double soft_threshold(double w, double a) {
  if (w > a) return w - a;
  if (w < -a) return w + a;
  return 0.0;
}

inline void check_xy(const std::vector<SparseVector>& X, const std::vector<CategoryLabel>& y) {
  if (X.empty() || y.empty()) throw std::invalid_argument("lr: empty training data");
  if (X.size() != y.size())
    throw std::invalid_argument("lr: feature/label count mismatch: " +
                                std::to_string(X.size()) + " vs " + std::to_string(y.size()));
  for (const SparseVector& x : X)
    if (x.dim != X.front().dim)
      throw std::invalid_argument("lr: inconsistent feature dimensionality");
}

}  // namespace lr_detail

inline ClassDistribution predict_proba(const LrModel& m, const SparseVector& x) {
  if (x.dim != m.dim)
    throw std::invalid_argument("predict_proba: dimension mismatch: x.dim=" +
                                std::to_string(x.dim) + " model.dim=" + std::to_string(m.dim));
  std::array<double, kNumCategories> z;
  lr_detail::logits_of(m, x, z);
  lr_detail::softmax_inplace(z);
  return z;
}

// Argmax with ties broken toward the lowest class index.
inline CategoryLabel predict(const LrModel& m, const SparseVector& x) {
  const ClassDistribution p = predict_proba(m, x);
  int best = 0;
  for (int c = 1; c < kNumCategories; ++c)
    if (p[static_cast<std::size_t>(c)] > p[static_cast<std::size_t>(best)]) best = c;
  return category_from_index(best);
}

// Mean cross-entropy of the model on (X, y), without the penalty term.
inline double lr_mean_cross_entropy(const LrModel& m, const std::vector<SparseVector>& X,
                                    const std::vector<CategoryLabel>& y) {
  lr_detail::check_xy(X, y);
  double loss = 0;
  std::array<double, kNumCategories> z;
  for (std::size_t i = 0; i < X.size(); ++i) {
    lr_detail::logits_of(m, X[i], z);
    const double mx = *std::max_element(z.begin(), z.end());
    double lse = 0;
    for (double v : z) lse += std::exp(v - mx);
    loss += std::log(lse) + mx - z[static_cast<std::size_t>(category_index(y[i]))];
  }
  return loss / static_cast<double>(X.size());
}

// Dense gradient of the unpenalized mean cross-entropy. Reference path for
// gradient checking and small full-batch problems.
struct LrGradient {
  double loss = 0;
  std::vector<double> d_weights;  // feature-major, same layout as LrModel
  std::array<double, kNumCategories> d_bias{};
};

inline LrGradient lr_loss_and_gradient(const LrModel& m, const std::vector<SparseVector>& X,
                                       const std::vector<CategoryLabel>& y) {
  lr_detail::check_xy(X, y);
  LrGradient g;
  g.d_weights.assign(m.weights.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(X.size());
  std::array<double, kNumCategories> p;
  for (std::size_t i = 0; i < X.size(); ++i) {
    lr_detail::logits_of(m, X[i], p);
    const double mx = *std::max_element(p.begin(), p.end());
    double lse = 0;
    for (double v : p) lse += std::exp(v - mx);
    g.loss += (std::log(lse) + mx - p[static_cast<std::size_t>(category_index(y[i]))]) * inv_n;
    lr_detail::softmax_inplace(p);
    p[static_cast<std::size_t>(category_index(y[i]))] -= 1.0;
    for (int c = 0; c < kNumCategories; ++c)
      g.d_bias[static_cast<std::size_t>(c)] += p[static_cast<std::size_t>(c)] * inv_n;
    for (const auto& [j, v] : X[i].entries) {
      double* row = g.d_weights.data() + static_cast<std::size_t>(j) * kNumCategories;
      for (int c = 0; c < kNumCategories; ++c)
        row[c] += p[static_cast<std::size_t>(c)] * v * inv_n;
    }
  }
  return g;
}

struct LrTrainConfig {
  double alpha = 0.01;
  Penalty penalty = Penalty::kL1;
  int epochs = 30;
  int batch_size = 64;
  double learning_rate = 0.5;
  bool sqrt_decay = true;  // step = learning_rate / sqrt(epoch); off = fixed step
  int patience = 2;        // consecutive dev-loss increases before stopping
  std::uint64_t seed = 1;
};

struct LrTrainResult {
  LrModel model;
  std::vector<double> objective_trace;  // mean CE + alpha * penalty, per epoch
  std::vector<double> dev_loss_trace;   // mean CE on dev, per epoch (when dev given)
  int best_epoch = 0;                   // 1-based epoch whose weights were kept
  int epochs_run = 0;
};

// Seeded shuffled mini-batch subgradient descent. The L1 term is handled by
// soft-thresholding after every batch update; for features a batch does not
// touch, the shrink is deferred and applied in one composed step on the next
// touch (the composition is exact because those features receive no gradient
// in between). L2 decay is deferred the same way, multiplicatively. Biases
// are never penalized. With dev data, training keeps the weights from the
// epoch with the lowest dev loss and stops after `patience` consecutive
// dev-loss increases.
inline LrTrainResult train_lr(const std::vector<SparseVector>& X,
                              const std::vector<CategoryLabel>& y, const LrTrainConfig& cfg,
                              const std::vector<SparseVector>* dev_X = nullptr,
                              const std::vector<CategoryLabel>* dev_y = nullptr) {
  lr_detail::check_xy(X, y);
  if (cfg.alpha <= 0) throw std::invalid_argument("lr: alpha must be > 0");
  if (cfg.epochs < 1 || cfg.batch_size < 1)
    throw std::invalid_argument("lr: epochs and batch_size must be >= 1");
  const bool use_dev = dev_X != nullptr && dev_y != nullptr && !dev_X->empty();

  const int dim = X.front().dim;
  LrModel model = make_lr_model(dim);
  model.penalty = cfg.penalty;
  model.alpha = cfg.alpha;
  model.seed = cfg.seed;

  const std::size_t n = X.size();
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  // Deferred-penalty bookkeeping, per feature column.
  std::vector<double> applied(static_cast<std::size_t>(dim), 0.0);
  double cum = 0.0;  // L1: total shrink so far; L2: total log-decay so far

  const auto catch_up = [&](int j) {
    double* wj = model.weights.data() + static_cast<std::size_t>(j) * kNumCategories;
    const double pending = cum - applied[static_cast<std::size_t>(j)];
    if (pending != 0.0) {
      if (cfg.penalty == Penalty::kL1) {
        for (int c = 0; c < kNumCategories; ++c)
          wj[c] = lr_detail::soft_threshold(wj[c], pending);
      } else {
        const double f = std::exp(pending);
        for (int c = 0; c < kNumCategories; ++c) wj[c] *= f;
      }
    }
    applied[static_cast<std::size_t>(j)] = cum;
  };
  const auto flush_all = [&]() {
    for (int j = 0; j < dim; ++j) catch_up(j);
  };

  LrTrainResult result;
  std::vector<double> best_weights;
  std::array<double, kNumCategories> best_bias{};
  double best_dev = std::numeric_limits<double>::infinity();
  int worse_streak = 0;
  double prev_dev = std::numeric_limits<double>::infinity();

  std::vector<int> touched;
  std::vector<double> grad_slots;
  std::vector<std::array<double, kNumCategories>> coeffs;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double step =
        cfg.sqrt_decay ? cfg.learning_rate / std::sqrt(static_cast<double>(epoch))
                       : cfg.learning_rate;
    rng.shuffle(order);

    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      const double inv_b = 1.0 / static_cast<double>(end - start);

      touched.clear();
      for (std::size_t k = start; k < end; ++k)
        for (const auto& [j, v] : X[order[k]].entries) touched.push_back(j);
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
      for (int j : touched) catch_up(j);

      // Forward pass with batch-start weights.
      coeffs.resize(end - start);
      std::array<double, kNumCategories> bias_grad{};
      for (std::size_t k = start; k < end; ++k) {
        auto& p = coeffs[k - start];
        lr_detail::logits_of(model, X[order[k]], p);
        lr_detail::softmax_inplace(p);
        p[static_cast<std::size_t>(category_index(y[order[k]]))] -= 1.0;
        for (int c = 0; c < kNumCategories; ++c) {
          p[static_cast<std::size_t>(c)] *= inv_b;
          bias_grad[static_cast<std::size_t>(c)] += p[static_cast<std::size_t>(c)];
        }
      }

      grad_slots.assign(touched.size() * kNumCategories, 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const auto& p = coeffs[k - start];
        for (const auto& [j, v] : X[order[k]].entries) {
          const std::size_t slot = static_cast<std::size_t>(
              std::lower_bound(touched.begin(), touched.end(), j) - touched.begin());
          double* row = grad_slots.data() + slot * kNumCategories;
          for (int c = 0; c < kNumCategories; ++c) row[c] += p[static_cast<std::size_t>(c)] * v;
        }
      }

      for (std::size_t s = 0; s < touched.size(); ++s) {
        double* wj =
            model.weights.data() + static_cast<std::size_t>(touched[s]) * kNumCategories;
        const double* row = grad_slots.data() + s * kNumCategories;
        for (int c = 0; c < kNumCategories; ++c) wj[c] -= step * row[c];
      }
      for (int c = 0; c < kNumCategories; ++c)
        model.bias[static_cast<std::size_t>(c)] -= step * bias_grad[static_cast<std::size_t>(c)];

      // This batch's penalty step, deferred until each feature's next touch.
      if (cfg.penalty == Penalty::kL1) {
        cum += step * cfg.alpha;
      } else {
        const double f = 1.0 - step * cfg.alpha;
        if (f <= 0)
          throw std::invalid_argument("lr: step * alpha >= 1, L2 decay is unstable");
        cum += std::log(f);
      }
    }

    flush_all();
    result.epochs_run = epoch;

    double penalty_term = 0;
    if (cfg.penalty == Penalty::kL1) {
      for (double w : model.weights) penalty_term += std::abs(w);
    } else {
      for (double w : model.weights) penalty_term += 0.5 * w * w;
    }
    result.objective_trace.push_back(lr_mean_cross_entropy(model, X, y) +
                                     cfg.alpha * penalty_term);

    if (use_dev) {
      const double dev_loss = lr_mean_cross_entropy(model, *dev_X, *dev_y);
      result.dev_loss_trace.push_back(dev_loss);
      if (dev_loss < best_dev) {
        best_dev = dev_loss;
        best_weights = model.weights;
        best_bias = model.bias;
        result.best_epoch = epoch;
      }
      worse_streak = dev_loss > prev_dev ? worse_streak + 1 : 0;
      prev_dev = dev_loss;
      if (worse_streak >= cfg.patience) break;
    } else {
      result.best_epoch = epoch;
    }
  }

  if (use_dev && !best_weights.empty()) {
    model.weights = std::move(best_weights);
    model.bias = best_bias;
  }
  result.model = std::move(model);
  return result;
}

// ---- model file (versioned JSON) ----

inline nlohmann::json lr_model_to_json(const LrModel& m) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["kind"] = "lr";
  j["feature_space"] = m.feature_space;
  j["alpha"] = m.alpha;
  j["penalty"] = std::string(penalty_name(m.penalty));
  j["seed"] = m.seed;
  j["dim"] = m.dim;
  j["vocab_ref"] = m.vocab_ref;
  j["bias"] = m.bias;
  nlohmann::json triplets = nlohmann::json::array();
  for (int f = 0; f < m.dim; ++f) {
    for (int c = 0; c < kNumCategories; ++c) {
      const double w = m.weight(f, c);
      if (w != 0.0) {
        if (!std::isfinite(w)) throw std::runtime_error("lr model has non-finite weight");
        triplets.push_back(nlohmann::json::array({f, c, w}));
      }
    }
  }
  j["weights"] = std::move(triplets);
  return j;
}

inline LrModel lr_model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("kind", "") != "lr")
    throw std::runtime_error("not an lr model file");
  if (j.value("format_version", -1) != 1)
    throw std::runtime_error("unsupported lr model format_version");
  LrModel m = make_lr_model(j.at("dim").get<int>());
  m.feature_space = j.at("feature_space").get<std::string>();
  m.alpha = j.at("alpha").get<double>();
  m.penalty = parse_penalty(j.at("penalty").get<std::string>());
  m.seed = j.at("seed").get<std::uint64_t>();
  m.vocab_ref = j.value("vocab_ref", "");
  const auto& bias = j.at("bias");
  if (bias.size() != kNumCategories) throw std::runtime_error("lr model: bad bias length");
  for (int c = 0; c < kNumCategories; ++c)
    m.bias[static_cast<std::size_t>(c)] = bias[static_cast<std::size_t>(c)].get<double>();
  for (const auto& t : j.at("weights")) {
    const int f = t.at(0).get<int>();
    const int c = t.at(1).get<int>();
    if (f < 0 || f >= m.dim || c < 0 || c >= kNumCategories)
      throw std::runtime_error("lr model: weight index out of range");
    m.weight(f, c) = t.at(2).get<double>();
  }
  return m;
}

inline void save_lr_model(const std::string& path, const LrModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
  out << lr_model_to_json(m).dump(2) << "\n";
}

inline LrModel load_lr_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error("model file is not valid JSON: " + path);
  return lr_model_from_json(j);
}

}  // namespace poi

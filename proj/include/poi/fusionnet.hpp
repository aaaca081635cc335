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
#include "poi/linear_model.hpp"
#include "poi/rng.hpp"
#include "poi/textproc.hpp"

namespace poi {

// Desk-scale classifier around the two temporal-fusion mechanisms. The text
// encoder is a mean of token embeddings over the first kMaxSeqLen tokens;
// the time vector is fused either by concatenation before the output layer
// or by a dense projection added to the text representation.
struct FusionNet {
  enum class Mode { kConcat, kSumProject };

  static constexpr int kMaxSeqLen = 26;

  Mode mode = Mode::kConcat;
  int embed_dim = 50;
  std::vector<std::string> tokens;   // sorted; embedding row i+1; row 0 = unknown
  std::vector<double> embedding;     // (tokens.size()+1) x embed_dim, row-major
  std::vector<double> proj;          // embed_dim x 31, row-major (sum_project)
  std::vector<double> proj_bias;     // embed_dim (sum_project)
  std::vector<double> out;           // 8 x out_cols(), row-major
  std::array<double, kNumCategories> out_bias{};
  std::uint64_t seed = 0;

  int out_cols() const {
    return mode == Mode::kConcat ? embed_dim + TemporalVector::kDim : embed_dim;
  }
  int vocab_rows() const { return static_cast<int>(tokens.size()) + 1; }

  int row_of(std::string_view token) const {
    auto it = std::lower_bound(tokens.begin(), tokens.end(), token);
    if (it == tokens.end() || *it != token) return 0;
    return static_cast<int>(it - tokens.begin()) + 1;
  }
};

inline std::string_view fusion_mode_name(FusionNet::Mode m) {
  return m == FusionNet::Mode::kConcat ? "concat" : "sum_project";
}
inline FusionNet::Mode parse_fusion_mode(std::string_view s) {
  if (s == "concat") return FusionNet::Mode::kConcat;
  if (s == "sum_project" || s == "sum") return FusionNet::Mode::kSumProject;
  throw std::runtime_error("unknown fusion mode \"" + std::string(s) + "\"");
}

// Seeded uniform(-0.05, 0.05) init for embeddings, projection, and output
// weights; biases start at zero.
inline FusionNet make_fusion_net(const Vocabulary& vocab, FusionNet::Mode mode,
                                 int embed_dim = 50, std::uint64_t seed = 1) {
  if (embed_dim < 1) throw std::invalid_argument("fusionnet: embed_dim must be >= 1");
  FusionNet net;
  net.mode = mode;
  net.embed_dim = embed_dim;
  net.seed = seed;
  net.tokens.reserve(vocab.tweet_count.size());
  for (const auto& [tok, count] : vocab.tweet_count) net.tokens.push_back(tok);
  std::sort(net.tokens.begin(), net.tokens.end());

  Rng rng(seed);
  const auto uniform_fill = [&](std::vector<double>& v, std::size_t size) {
    v.resize(size);
    for (double& x : v) x = (rng.next_double() - 0.5) * 0.1;
  };
  uniform_fill(net.embedding,
               static_cast<std::size_t>(net.vocab_rows()) * static_cast<std::size_t>(embed_dim));
  if (mode == FusionNet::Mode::kSumProject) {
    uniform_fill(net.proj,
                 static_cast<std::size_t>(embed_dim) * static_cast<std::size_t>(TemporalVector::kDim));
    net.proj_bias.assign(static_cast<std::size_t>(embed_dim), 0.0);
  }
  uniform_fill(net.out,
               static_cast<std::size_t>(kNumCategories) * static_cast<std::size_t>(net.out_cols()));
  return net;
}

namespace fusion_detail {

struct ForwardState {
  std::vector<int> rows;                          // token rows actually used
  std::vector<double> text_mean;                  // E
  std::vector<double> hidden;                     // out_cols(): [x;t] or x+P t+p_b
  std::array<double, kNumCategories> probs{};
};

inline void forward(const FusionNet& net, const std::vector<int>& rows,
                    const TemporalVector& time, ForwardState& st) {
  const int e = net.embed_dim;
  st.text_mean.assign(static_cast<std::size_t>(e), 0.0);
  for (int r : rows) {
    const double* emb = net.embedding.data() + static_cast<std::size_t>(r) * e;
    for (int k = 0; k < e; ++k) st.text_mean[static_cast<std::size_t>(k)] += emb[k];
  }
  const double inv_len = 1.0 / static_cast<double>(rows.size());
  for (double& v : st.text_mean) v *= inv_len;

  const auto tdense = time.dense();
  if (net.mode == FusionNet::Mode::kConcat) {
    st.hidden.resize(static_cast<std::size_t>(e + TemporalVector::kDim));
    std::copy(st.text_mean.begin(), st.text_mean.end(), st.hidden.begin());
    std::copy(tdense.begin(), tdense.end(), st.hidden.begin() + e);
  } else {
    st.hidden.assign(st.text_mean.begin(), st.text_mean.end());
    // h = x + P t + p_b; t is two-hot, so P t is two columns of P.
    for (int idx : time.one_indices()) {
      for (int k = 0; k < e; ++k)
        st.hidden[static_cast<std::size_t>(k)] +=
            net.proj[static_cast<std::size_t>(k) * TemporalVector::kDim +
                     static_cast<std::size_t>(idx)];
    }
    for (int k = 0; k < e; ++k)
      st.hidden[static_cast<std::size_t>(k)] += net.proj_bias[static_cast<std::size_t>(k)];
  }

  const int cols = net.out_cols();
  for (int c = 0; c < kNumCategories; ++c) {
    const double* row = net.out.data() + static_cast<std::size_t>(c) * cols;
    double z = net.out_bias[static_cast<std::size_t>(c)];
    for (int k = 0; k < cols; ++k) z += row[k] * st.hidden[static_cast<std::size_t>(k)];
    st.probs[static_cast<std::size_t>(c)] = z;
  }
  lr_detail::softmax_inplace(st.probs);
}

inline std::vector<int> map_rows(const FusionNet& net, const std::vector<std::string>& tokens) {
  if (tokens.empty())
    throw std::invalid_argument("fusionnet: empty token sequence has no representation");
  std::vector<int> rows;
  const std::size_t limit =
      std::min(tokens.size(), static_cast<std::size_t>(FusionNet::kMaxSeqLen));
  rows.reserve(limit);
  for (std::size_t i = 0; i < limit; ++i) rows.push_back(net.row_of(tokens[i]));
  return rows;
}

}  // namespace fusion_detail

inline ClassDistribution fusion_forward(const FusionNet& net,
                                        const std::vector<std::string>& tokens,
                                        const TemporalVector& time) {
  fusion_detail::ForwardState st;
  fusion_detail::forward(net, fusion_detail::map_rows(net, tokens), time, st);
  return st.probs;
}

inline CategoryLabel fusion_predict(const FusionNet& net, const std::vector<std::string>& tokens,
                                    const TemporalVector& time) {
  const ClassDistribution p = fusion_forward(net, tokens, time);
  int best = 0;
  for (int c = 1; c < kNumCategories; ++c)
    if (p[static_cast<std::size_t>(c)] > p[static_cast<std::size_t>(best)]) best = c;
  return category_from_index(best);
}

// One labeled example for training and gradient checking.
struct FusionExample {
  std::vector<std::string> tokens;
  TemporalVector time;
  CategoryLabel label = CategoryLabel::kArtsEntertainment;
};

// Gradients with the same shapes as the parameter blocks.
struct FusionGradients {
  std::vector<double> embedding;
  std::vector<double> proj;
  std::vector<double> proj_bias;
  std::vector<double> out;
  std::array<double, kNumCategories> out_bias{};
};

// Mean cross-entropy over `examples` and its gradient w.r.t. every parameter.
inline double fusion_loss_and_gradients(const FusionNet& net,
                                        const std::vector<FusionExample>& examples,
                                        FusionGradients& grads) {
  if (examples.empty()) throw std::invalid_argument("fusionnet: no examples");
  const int e = net.embed_dim;
  const int cols = net.out_cols();
  grads.embedding.assign(net.embedding.size(), 0.0);
  grads.proj.assign(net.proj.size(), 0.0);
  grads.proj_bias.assign(net.proj_bias.size(), 0.0);
  grads.out.assign(net.out.size(), 0.0);
  grads.out_bias.fill(0.0);

  const double inv_n = 1.0 / static_cast<double>(examples.size());
  double loss = 0;
  fusion_detail::ForwardState st;
  std::vector<double> dh(static_cast<std::size_t>(cols));
  for (const FusionExample& ex : examples) {
    const std::vector<int> rows = fusion_detail::map_rows(net, ex.tokens);
    fusion_detail::forward(net, rows, ex.time, st);
    const int y = category_index(ex.label);
    loss -= std::log(std::max(st.probs[static_cast<std::size_t>(y)],
                              std::numeric_limits<double>::min())) *
            inv_n;

    std::array<double, kNumCategories> dz = st.probs;
    dz[static_cast<std::size_t>(y)] -= 1.0;
    for (double& v : dz) v *= inv_n;

    std::fill(dh.begin(), dh.end(), 0.0);
    for (int c = 0; c < kNumCategories; ++c) {
      const double g = dz[static_cast<std::size_t>(c)];
      grads.out_bias[static_cast<std::size_t>(c)] += g;
      double* gout = grads.out.data() + static_cast<std::size_t>(c) * cols;
      const double* wout = net.out.data() + static_cast<std::size_t>(c) * cols;
      for (int k = 0; k < cols; ++k) {
        gout[k] += g * st.hidden[static_cast<std::size_t>(k)];
        dh[static_cast<std::size_t>(k)] += g * wout[k];
      }
    }

    // d/d(text_mean) is the first E entries of dh in both modes.
    if (net.mode == FusionNet::Mode::kSumProject) {
      for (int idx : ex.time.one_indices()) {
        for (int k = 0; k < e; ++k)
          grads.proj[static_cast<std::size_t>(k) * TemporalVector::kDim +
                     static_cast<std::size_t>(idx)] += dh[static_cast<std::size_t>(k)];
      }
      for (int k = 0; k < e; ++k)
        grads.proj_bias[static_cast<std::size_t>(k)] += dh[static_cast<std::size_t>(k)];
    }
    const double inv_len = 1.0 / static_cast<double>(rows.size());
    for (int r : rows) {
      double* gemb = grads.embedding.data() + static_cast<std::size_t>(r) * e;
      for (int k = 0; k < e; ++k) gemb[k] += dh[static_cast<std::size_t>(k)] * inv_len;
    }
  }
  return loss;
}

inline double fusion_loss(const FusionNet& net, const std::vector<FusionExample>& examples) {
  double loss = 0;
  fusion_detail::ForwardState st;
  const double inv_n = 1.0 / static_cast<double>(examples.size());
  for (const FusionExample& ex : examples) {
    fusion_detail::forward(net, fusion_detail::map_rows(net, ex.tokens), ex.time, st);
    loss -= std::log(std::max(st.probs[static_cast<std::size_t>(category_index(ex.label))],
                              std::numeric_limits<double>::min())) *
            inv_n;
  }
  return loss;
}

// Compares analytic gradients against central finite differences over every
// parameter, returning the maximum relative error. Intended for small nets.
inline double fusion_grad_check(const FusionNet& net, const std::vector<FusionExample>& examples,
                                double step = 1e-4) {
  FusionGradients analytic;
  fusion_loss_and_gradients(net, examples, analytic);

  FusionNet probe = net;
  double max_rel = 0;
  const auto check_block = [&](std::vector<double>& params, const std::vector<double>& grad) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double saved = params[i];
      params[i] = saved + step;
      const double up = fusion_loss(probe, examples);
      params[i] = saved - step;
      const double down = fusion_loss(probe, examples);
      params[i] = saved;
      const double numeric = (up - down) / (2 * step);
      const double denom = std::max(1e-8, std::abs(numeric) + std::abs(grad[i]));
      max_rel = std::max(max_rel, std::abs(numeric - grad[i]) / denom);
    }
  };
  check_block(probe.embedding, analytic.embedding);
  check_block(probe.proj, analytic.proj);
  check_block(probe.proj_bias, analytic.proj_bias);
  check_block(probe.out, analytic.out);
  {
    std::vector<double> bias(probe.out_bias.begin(), probe.out_bias.end());
    std::vector<double> gbias(analytic.out_bias.begin(), analytic.out_bias.end());
    for (std::size_t i = 0; i < bias.size(); ++i) {
      const double saved = bias[i];
      probe.out_bias[i] = saved + step;
      const double up = fusion_loss(probe, examples);
      probe.out_bias[i] = saved - step;
      const double down = fusion_loss(probe, examples);
      probe.out_bias[i] = saved;
      const double numeric = (up - down) / (2 * step);
      const double denom = std::max(1e-8, std::abs(numeric) + std::abs(gbias[i]));
      max_rel = std::max(max_rel, std::abs(numeric - gbias[i]) / denom);
    }
  }
  return max_rel;
}

struct FusionTrainConfig {
  int epochs = 10;
  int batch_size = 32;
  double learning_rate = 0.5;
  int patience = 2;  // consecutive dev-loss increases before stopping
  std::uint64_t seed = 1;
};

struct FusionTrainResult {
  FusionNet net;
  std::vector<double> train_loss_trace;  // mean CE after each epoch
  std::vector<double> dev_loss_trace;
  int best_epoch = 0;
  int epochs_run = 0;
};

// Seeded mini-batch SGD on cross-entropy. With dev data, keeps the weights
// from the epoch with the lowest dev loss and halts after `patience`
// consecutive dev-loss increases.
inline FusionTrainResult train_fusion_net(FusionNet net, const std::vector<FusionExample>& train,
                                          const std::vector<FusionExample>& dev,
                                          const FusionTrainConfig& cfg) {
  if (train.empty()) throw std::invalid_argument("fusionnet: empty training data");
  if (cfg.epochs < 1 || cfg.batch_size < 1)
    throw std::invalid_argument("fusionnet: epochs and batch_size must be >= 1");

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  FusionTrainResult result;
  FusionNet best = net;
  double best_dev = std::numeric_limits<double>::infinity();
  double prev_dev = std::numeric_limits<double>::infinity();
  int worse_streak = 0;

  FusionGradients grads;
  std::vector<FusionExample> batch;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < train.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(train.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(train[order[k]]);
      fusion_loss_and_gradients(net, batch, grads);
      const auto apply = [&](std::vector<double>& params, const std::vector<double>& g) {
        for (std::size_t i = 0; i < params.size(); ++i)
          params[i] -= cfg.learning_rate * g[i];
      };
      apply(net.embedding, grads.embedding);
      apply(net.proj, grads.proj);
      apply(net.proj_bias, grads.proj_bias);
      apply(net.out, grads.out);
      for (int c = 0; c < kNumCategories; ++c)
        net.out_bias[static_cast<std::size_t>(c)] -=
            cfg.learning_rate * grads.out_bias[static_cast<std::size_t>(c)];
    }

    result.epochs_run = epoch;
    result.train_loss_trace.push_back(fusion_loss(net, train));
    if (!dev.empty()) {
      const double dev_loss = fusion_loss(net, dev);
      result.dev_loss_trace.push_back(dev_loss);
      if (dev_loss < best_dev) {
        best_dev = dev_loss;
        best = net;
        result.best_epoch = epoch;
      }
      worse_streak = dev_loss > prev_dev ? worse_streak + 1 : 0;
      prev_dev = dev_loss;
      if (worse_streak >= cfg.patience) break;
    } else {
      result.best_epoch = epoch;
    }
  }

  result.net = dev.empty() ? std::move(net) : std::move(best);
  return result;
}

// ---- model file (versioned JSON, dense row-major arrays) ----

inline nlohmann::json fusion_net_to_json(const FusionNet& net) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["kind"] = "fusionnet";
  j["mode"] = std::string(fusion_mode_name(net.mode));
  j["embed_dim"] = net.embed_dim;
  j["time_dim"] = TemporalVector::kDim;
  j["num_classes"] = kNumCategories;
  j["seed"] = net.seed;
  j["tokens"] = net.tokens;
  j["embedding"] = net.embedding;
  j["proj"] = net.proj;
  j["proj_bias"] = net.proj_bias;
  j["out"] = net.out;
  j["out_bias"] = net.out_bias;
  return j;
}

inline FusionNet fusion_net_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("kind", "") != "fusionnet")
    throw std::runtime_error("not a fusionnet model file");
  if (j.value("format_version", -1) != 1)
    throw std::runtime_error("unsupported fusionnet format_version");
  FusionNet net;
  net.mode = parse_fusion_mode(j.at("mode").get<std::string>());
  net.embed_dim = j.at("embed_dim").get<int>();
  net.seed = j.at("seed").get<std::uint64_t>();
  net.tokens = j.at("tokens").get<std::vector<std::string>>();
  if (!std::is_sorted(net.tokens.begin(), net.tokens.end()))
    throw std::runtime_error("fusionnet model: token list not sorted");
  net.embedding = j.at("embedding").get<std::vector<double>>();
  net.proj = j.at("proj").get<std::vector<double>>();
  net.proj_bias = j.at("proj_bias").get<std::vector<double>>();
  net.out = j.at("out").get<std::vector<double>>();
  const auto& bias = j.at("out_bias");
  if (bias.size() != kNumCategories)
    throw std::runtime_error("fusionnet model: bad out_bias length");
  for (int c = 0; c < kNumCategories; ++c)
    net.out_bias[static_cast<std::size_t>(c)] = bias[static_cast<std::size_t>(c)].get<double>();

  const auto expect = [](std::size_t got, std::size_t want, const char* what) {
    if (got != want)
      throw std::runtime_error(std::string("fusionnet model: bad ") + what + " size");
  };
  expect(net.embedding.size(),
         static_cast<std::size_t>(net.vocab_rows()) * static_cast<std::size_t>(net.embed_dim),
         "embedding");
  if (net.mode == FusionNet::Mode::kSumProject) {
    expect(net.proj.size(),
           static_cast<std::size_t>(net.embed_dim) * static_cast<std::size_t>(TemporalVector::kDim),
           "proj");
    expect(net.proj_bias.size(), static_cast<std::size_t>(net.embed_dim), "proj_bias");
  }
  expect(net.out.size(),
         static_cast<std::size_t>(kNumCategories) * static_cast<std::size_t>(net.out_cols()),
         "out");
  return net;
}

inline void save_fusion_net(const std::string& path, const FusionNet& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
  out << fusion_net_to_json(net).dump(2) << "\n";
}

inline FusionNet load_fusion_net(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error("model file is not valid JSON: " + path);
  return fusion_net_from_json(j);
}

}  // namespace poi

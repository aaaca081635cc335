#include "poi/fusionnet.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "poi/rng.hpp"
#include "test_util.hpp"

using namespace poi;
using poi::test::TempDir;
using poi::test::read_file;

namespace {

Vocabulary toy_vocab(const std::vector<std::string>& tokens) {
  Vocabulary v;
  v.min_tweet_freq = 1;
  for (const auto& t : tokens) v.tweet_count[t] = 1;
  return v;
}

TemporalVector time_at(int hour, int dow) { return {hour, dow}; }

// Text-only reference: softmax over the net's output block applied to the
// mean embedding alone. Used as the side-by-side oracle for both fusion
// ablations.
ClassDistribution text_only_forward(const FusionNet& net, const std::vector<std::string>& tokens) {
  const int e = net.embed_dim;
  std::vector<double> mean(static_cast<std::size_t>(e), 0.0);
  int used = 0;
  for (std::size_t i = 0; i < tokens.size() && i < FusionNet::kMaxSeqLen; ++i) {
    const int row = net.row_of(tokens[i]);
    for (int k = 0; k < e; ++k)
      mean[static_cast<std::size_t>(k)] +=
          net.embedding[static_cast<std::size_t>(row) * e + static_cast<std::size_t>(k)];
    ++used;
  }
  for (double& v : mean) v /= used;
  std::vector<double> logits(kNumCategories);
  for (int c = 0; c < kNumCategories; ++c) {
    double z = net.out_bias[static_cast<std::size_t>(c)];
    for (int k = 0; k < e; ++k)
      z += net.out[static_cast<std::size_t>(c) * net.out_cols() + static_cast<std::size_t>(k)] *
           mean[static_cast<std::size_t>(k)];
    logits[static_cast<std::size_t>(c)] = z;
  }
  const auto p = softmax(logits);
  ClassDistribution out{};
  for (int c = 0; c < kNumCategories; ++c) out[static_cast<std::size_t>(c)] = p[static_cast<std::size_t>(c)];
  return out;
}

}  // namespace

TEST_CASE("all-zero parameters give the uniform distribution") {
  for (auto mode : {FusionNet::Mode::kConcat, FusionNet::Mode::kSumProject}) {
    FusionNet net = make_fusion_net(toy_vocab({"a", "b"}), mode, 4, 1);
    std::fill(net.embedding.begin(), net.embedding.end(), 0.0);
    std::fill(net.proj.begin(), net.proj.end(), 0.0);
    std::fill(net.out.begin(), net.out.end(), 0.0);
    const auto p = fusion_forward(net, {"a", "b"}, time_at(10, 3));
    for (double v : p) CHECK_THAT(v, Catch::Matchers::WithinAbs(1.0 / 8, 1e-12));
  }
}

TEST_CASE("concat mode with zeroed temporal output columns is text-only") {
  FusionNet net = make_fusion_net(toy_vocab({"a", "b", "c"}), FusionNet::Mode::kConcat, 6, 3);
  for (int c = 0; c < kNumCategories; ++c)
    for (int k = net.embed_dim; k < net.out_cols(); ++k)
      net.out[static_cast<std::size_t>(c) * net.out_cols() + static_cast<std::size_t>(k)] = 0.0;

  const std::vector<std::string> tokens = {"a", "c", "zz"};
  const auto fused = fusion_forward(net, tokens, time_at(22, 5));
  const auto plain = text_only_forward(net, tokens);
  for (int c = 0; c < kNumCategories; ++c)
    CHECK_THAT(fused[static_cast<std::size_t>(c)],
               Catch::Matchers::WithinAbs(plain[static_cast<std::size_t>(c)], 1e-12));
}

TEST_CASE("sum_project with a zero projection equals the text-only pass") {
  FusionNet net = make_fusion_net(toy_vocab({"a", "b", "c"}), FusionNet::Mode::kSumProject, 6, 4);
  std::fill(net.proj.begin(), net.proj.end(), 0.0);
  std::fill(net.proj_bias.begin(), net.proj_bias.end(), 0.0);

  const std::vector<std::string> tokens = {"b", "b", "a"};
  const auto fused = fusion_forward(net, tokens, time_at(1, 6));
  const auto plain = text_only_forward(net, tokens);
  for (int c = 0; c < kNumCategories; ++c)
    CHECK_THAT(fused[static_cast<std::size_t>(c)],
               Catch::Matchers::WithinAbs(plain[static_cast<std::size_t>(c)], 1e-12));

  SECTION("and time slots do not matter in that case") {
    const auto other = fusion_forward(net, tokens, time_at(13, 2));
    for (int c = 0; c < kNumCategories; ++c)
      CHECK(other[static_cast<std::size_t>(c)] == fused[static_cast<std::size_t>(c)]);
  }
}

TEST_CASE("empty token sequences are rejected") {
  FusionNet net = make_fusion_net(toy_vocab({"a"}), FusionNet::Mode::kConcat, 4, 1);
  CHECK_THROWS_AS(fusion_forward(net, {}, time_at(0, 0)), std::invalid_argument);
}

TEST_CASE("outputs stay on the probability simplex (property)") {
  Rng rng(8);
  for (auto mode : {FusionNet::Mode::kConcat, FusionNet::Mode::kSumProject}) {
    FusionNet net = make_fusion_net(toy_vocab({"a", "b", "c", "d"}), mode, 5, rng.next_u64());
    for (double& w : net.out) w = (rng.next_double() - 0.5) * 50;
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<std::string> tokens;
      const std::size_t len = 1 + rng.next_below(30);  // may exceed kMaxSeqLen
      const char* pool[] = {"a", "b", "c", "d", "oov"};
      for (std::size_t i = 0; i < len; ++i) tokens.push_back(pool[rng.next_below(5)]);
      const auto p =
          fusion_forward(net, tokens, time_at(static_cast<int>(rng.next_below(24)),
                                              static_cast<int>(rng.next_below(7))));
      double sum = 0;
      for (double v : p) {
        REQUIRE(v >= 0.0);
        sum += v;
      }
      REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-9));
    }
  }
}

TEST_CASE("gradient check passes in both modes at three seeds") {
  const std::vector<std::string> vocab_tokens = {"a", "b", "c", "d", "e"};
  std::vector<FusionExample> examples;
  examples.push_back({{"a", "b", "oov"}, time_at(3, 1), CategoryLabel::kFood});
  examples.push_back({{"e"}, time_at(20, 6), CategoryLabel::kTravelTransport});

  for (auto mode : {FusionNet::Mode::kConcat, FusionNet::Mode::kSumProject}) {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
      FusionNet net = make_fusion_net(toy_vocab(vocab_tokens), mode, 5, seed);
      const double err = fusion_grad_check(net, examples, 1e-4);
      INFO("mode=" << fusion_mode_name(mode) << " seed=" << seed);
      CHECK(err < 1e-4);
    }
  }
}

TEST_CASE("finite-difference error grows with the step size") {
  FusionNet net = make_fusion_net(toy_vocab({"a", "b"}), FusionNet::Mode::kSumProject, 4, 9);
  const std::vector<FusionExample> examples = {
      {{"a", "b"}, time_at(12, 4), CategoryLabel::kNightlifeSpot}};
  const double e_small = fusion_grad_check(net, examples, 1e-4);
  const double e_mid = fusion_grad_check(net, examples, 1e-3);
  const double e_large = fusion_grad_check(net, examples, 1e-2);
  CHECK(e_large > e_mid);
  CHECK(e_mid > e_small);
}

TEST_CASE("unused temporal columns have zero analytic and numeric gradient") {
  FusionNet net = make_fusion_net(toy_vocab({"a"}), FusionNet::Mode::kSumProject, 3, 5);
  const std::vector<FusionExample> examples = {{{"a"}, time_at(2, 0), CategoryLabel::kFood}};
  FusionGradients grads;
  fusion_loss_and_gradients(net, examples, grads);

  const int unused_time_index = 7;  // hour 7: not hour 2 and not dow slot 24
  for (int k = 0; k < net.embed_dim; ++k) {
    const std::size_t at =
        static_cast<std::size_t>(k) * TemporalVector::kDim + unused_time_index;
    CHECK(grads.proj[at] == 0.0);
    // Numeric side of the oracle.
    FusionNet probe = net;
    const double h = 1e-4;
    probe.proj[at] += h;
    const double up = fusion_loss(probe, examples);
    probe.proj[at] -= 2 * h;
    const double down = fusion_loss(probe, examples);
    CHECK_THAT((up - down) / (2 * h), Catch::Matchers::WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("a 20-example memorization set is learned within 10 epochs") {
  std::vector<std::string> tokens;
  std::vector<FusionExample> train;
  for (int i = 0; i < 20; ++i) {
    const std::string tok = "w" + std::to_string(i);
    tokens.push_back(tok);
    train.push_back({{tok}, time_at(i % 24, i % 7), category_from_index(i % 8)});
  }
  FusionNet net = make_fusion_net(toy_vocab(tokens), FusionNet::Mode::kConcat, 16, 12);
  FusionTrainConfig cfg;
  cfg.epochs = 10;
  cfg.batch_size = 2;
  cfg.learning_rate = 2.0;
  cfg.seed = 7;
  const auto result = train_fusion_net(net, train, {}, cfg);

  int correct = 0;
  for (const auto& ex : train)
    if (fusion_predict(result.net, ex.tokens, ex.time) == ex.label) ++correct;
  CHECK(correct == static_cast<int>(train.size()));
}

TEST_CASE("training is deterministic for a fixed seed") {
  std::vector<std::string> tokens = {"a", "b", "c", "d"};
  std::vector<FusionExample> train;
  Rng rng(66);
  for (int i = 0; i < 24; ++i)
    train.push_back({{tokens[rng.next_below(4)], tokens[rng.next_below(4)]},
                     time_at(static_cast<int>(rng.next_below(24)), static_cast<int>(rng.next_below(7))),
                     category_from_index(static_cast<int>(rng.next_below(8)))});
  FusionNet net = make_fusion_net(toy_vocab(tokens), FusionNet::Mode::kSumProject, 6, 2);
  FusionTrainConfig cfg;
  cfg.epochs = 4;
  cfg.seed = 19;
  const auto a = train_fusion_net(net, train, {}, cfg);
  const auto b = train_fusion_net(net, train, {}, cfg);
  CHECK(a.train_loss_trace == b.train_loss_trace);
  CHECK(a.net.embedding == b.net.embedding);
  CHECK(a.net.out == b.net.out);
}

TEST_CASE("two consecutive dev-loss increases halt training at the checkpoint") {
  // Dev labels contradict the training labels so the dev loss rises while
  // training fits.
  std::vector<std::string> tokens = {"x", "y"};
  std::vector<FusionExample> train, dev;
  for (int i = 0; i < 12; ++i) {
    const int cls = i % 2;
    train.push_back({{tokens[static_cast<std::size_t>(cls)]}, time_at(5, 2),
                     category_from_index(cls)});
    dev.push_back({{tokens[static_cast<std::size_t>(cls)]}, time_at(5, 2),
                   category_from_index(1 - cls)});
  }
  FusionNet net = make_fusion_net(toy_vocab(tokens), FusionNet::Mode::kConcat, 4, 3);
  FusionTrainConfig cfg;
  cfg.epochs = 10;
  cfg.batch_size = 4;
  cfg.learning_rate = 1.0;
  cfg.seed = 4;
  const auto result = train_fusion_net(net, train, dev, cfg);
  CHECK(result.epochs_run < cfg.epochs);
  const double best = *std::min_element(result.dev_loss_trace.begin(),
                                        result.dev_loss_trace.end());
  CHECK(result.dev_loss_trace[static_cast<std::size_t>(result.best_epoch - 1)] == best);
  CHECK(fusion_loss(result.net, dev) == best);
}

TEST_CASE("fusion net files round-trip byte-identically") {
  for (auto mode : {FusionNet::Mode::kConcat, FusionNet::Mode::kSumProject}) {
    FusionNet net = make_fusion_net(toy_vocab({"b", "a", "z"}), mode, 5, 31);
    TempDir dir;
    const std::string first = dir.file("net.json");
    const std::string second = dir.file("net2.json");
    save_fusion_net(first, net);
    const FusionNet loaded = load_fusion_net(first);
    CHECK(loaded.embedding == net.embedding);
    CHECK(loaded.mode == net.mode);
    CHECK(loaded.tokens == net.tokens);
    save_fusion_net(second, loaded);
    CHECK(read_file(first) == read_file(second));

    const auto p1 = fusion_forward(net, {"a", "q"}, time_at(9, 1));
    const auto p2 = fusion_forward(loaded, {"a", "q"}, time_at(9, 1));
    CHECK(p1 == p2);
  }
}

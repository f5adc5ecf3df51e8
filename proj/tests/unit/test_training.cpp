#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace taste;
using namespace taste::testing;

namespace {

struct Synthetic {
  std::vector<SstExample> train, dev;
  EmbeddingTable emb{8};
};

// Sentences over a small lexicon whose label is the sign of the balance of
// positive and negative words. Trees are random.
Synthetic make_corpus(std::uint64_t seed, std::size_t n_train, std::size_t n_dev) {
  Synthetic s;
  Rng rng(seed);
  const std::vector<std::string> pos = {"great", "tasty", "lovely", "superb"};
  const std::vector<std::string> neg = {"awful", "bland", "rude", "dirty"};
  const std::vector<std::string> neu = {"the", "food", "was", "service", "table", "and"};
  for (const auto* group : {&pos, &neg, &neu})
    for (const auto& w : *group) {
      std::vector<float> v(8);
      for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
      s.emb.insert(w, v);
    }
  auto make = [&](std::size_t count, std::vector<SstExample>& out) {
    while (out.size() < count) {
      const int n = 3 + static_cast<int>(rng.below(4));
      const auto tree = random_tree(rng, n);
      SstExample ex;
      int balance = 0;
      for (int i = 0; i < n; ++i) {
        const auto r = rng.below(10);
        const auto& group = r < 2 ? pos : r < 4 ? neg : neu;
        balance += r < 2 ? 1 : r < 4 ? -1 : 0;
        ex.tokens.push_back(group[rng.below(group.size())]);
        ex.parents.push_back(tree.head(i) == kRoot ? 0 : tree.head(i) + 1);
      }
      ex.label = balance > 0 ? Sentiment::Positive : balance < 0 ? Sentiment::Negative : Sentiment::Neutral;
      out.push_back(std::move(ex));
    }
  };
  make(n_train, s.train);
  make(n_dev, s.dev);
  return s;
}

}  // namespace

TEST_CASE("training on a learnable synthetic corpus beats the majority baseline", "[training]") {
  const auto data = make_corpus(1, 400, 100);
  TrainConfig cfg;
  cfg.epochs = 8;
  cfg.seed = 3;
  cfg.lr = 0.05;
  auto params = ModelParams::initialized(12, 8, 3);
  std::vector<EpochRecord> seen;
  const auto result = train(params, data.train, data.dev, data.emb, cfg, [&](const EpochRecord& r) { seen.push_back(r); });
  const auto& rep = result.report;
  REQUIRE(rep.curve.size() == 8);
  CHECK(seen.size() == 8);
  CHECK(rep.best_epoch >= 1);
  CHECK(rep.best_dev_accuracy >= rep.dev_majority_baseline + 0.10);
  CHECK(rep.curve.back().train_loss < rep.curve.front().train_loss);
  double best = 0.0;
  for (const auto& r : rep.curve) best = std::max(best, r.dev_accuracy);
  CHECK(rep.best_dev_accuracy == best);
}

TEST_CASE("a single example is overfit and the earliest best epoch is returned", "[training]") {
  SstExample ex{{"the", "food", "was", "great"}, {2, 3, 0, 3}, Sentiment::Positive, {}};
  SstExample flipped = ex;
  flipped.label = Sentiment::Negative;
  EmbeddingTable emb(4);
  Rng rng(8);
  for (const auto& w : ex.tokens) {
    std::vector<float> v(4);
    for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
    emb.insert(w, v);
  }
  const std::vector<SstExample> train_set{ex}, dev_set{flipped};
  TrainConfig cfg;
  cfg.epochs = 6;
  cfg.seed = 1;
  cfg.lr = 0.1;
  const auto init = ModelParams::initialized(5, 4, 2);
  const auto result = train(init, train_set, dev_set, emb, cfg);
  const auto& curve = result.report.curve;
  REQUIRE(curve.size() == 6);
  for (std::size_t e = 1; e < 4; ++e) CHECK(curve[e].train_loss < curve[e - 1].train_loss);

  // Dev accuracy never improves on epoch 1, so epoch 1 is kept.
  CHECK(result.report.best_epoch == 1);
  TrainConfig one = cfg;
  one.epochs = 1;
  const auto first = train(init, train_set, dev_set, emb, one);
  CHECK(serialize_checkpoint(result.params, 0) == serialize_checkpoint(first.params, 0));
  CHECK(result.report.dev_overlap == 1);
}

TEST_CASE("zero epochs return the initial parameters", "[training]") {
  const auto data = make_corpus(4, 10, 5);
  TrainConfig cfg;
  cfg.epochs = 0;
  const auto init = ModelParams::initialized(4, 8, 6);
  const auto result = train(init, data.train, data.dev, data.emb, cfg);
  CHECK(result.report.curve.empty());
  CHECK(result.report.best_epoch == 0);
  CHECK(serialize_checkpoint(result.params, 0) == serialize_checkpoint(init, 0));
}

TEST_CASE("training is deterministic for a seed", "[training]") {
  const auto data = make_corpus(9, 60, 20);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.seed = 77;
  cfg.dropout = 0.2;
  const auto init = ModelParams::initialized(6, 8, 77);
  const auto a = train(init, data.train, data.dev, data.emb, cfg);
  const auto b = train(init, data.train, data.dev, data.emb, cfg);
  CHECK(serialize_checkpoint(a.params, 0) == serialize_checkpoint(b.params, 0));
}

TEST_CASE("interior labels are used only when asked", "[training]") {
  SstExample ex{{"not", "bad"}, {2, 0}, Sentiment::Positive, {Sentiment::Negative, Sentiment::Positive}};
  const auto tree = to_dep_tree(ex);
  CHECK(supervision_for(ex, tree, false) == Supervision{{1, Sentiment::Positive}});
  CHECK(supervision_for(ex, tree, true) == Supervision{{0, Sentiment::Negative}, {1, Sentiment::Positive}});
}

TEST_CASE("training preconditions", "[training]") {
  const auto data = make_corpus(4, 10, 5);
  TrainConfig cfg;
  auto params = ModelParams::initialized(4, 8, 6);
  CHECK_THROWS_AS(train(params, std::span<const SstExample>{}, data.dev, data.emb, cfg), Error);
  auto wide = ModelParams::initialized(4, 9, 6);
  try {
    train(wide, data.train, data.dev, data.emb, cfg);
    FAIL();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Dimension);
  }
}

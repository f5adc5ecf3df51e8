#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "taste/taste.hpp"

namespace taste::testing {

struct Tok {
  std::string surface;
  std::string upos;
  int head;  // CoNLL convention: 1-based, 0 = root
  std::string deprel;
};

inline DepTree tree_of(const std::vector<Tok>& rows, std::optional<std::vector<Span>> chunks = std::nullopt) {
  std::vector<Token> toks;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Token t;
    t.index = static_cast<int>(i) + 1;
    t.surface = rows[i].surface;
    t.lemma = text::to_lower(rows[i].surface);
    t.upos = rows[i].upos;
    t.head = rows[i].head == 0 ? kRoot : rows[i].head - 1;
    t.deprel = rows[i].deprel;
    toks.push_back(t);
  }
  return DepTree::build(std::move(toks), std::move(chunks));
}

/// "The food is pretty good" with the copula as head and the adjective as
/// its complement.
inline DepTree food_sentence() {
  return tree_of({{"The", "DET", 2, "det"},
                  {"food", "NOUN", 3, "nsubj"},
                  {"is", "AUX", 0, "ROOT"},
                  {"pretty", "ADV", 5, "advmod"},
                  {"good", "ADJ", 3, "acomp"}});
}

/// Random tree over n nodes: node i > 0 attaches to a uniformly chosen
/// earlier node of a random permutation.
inline DepTree random_tree(Rng& rng, int n) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  rng.shuffle(perm);
  std::vector<Token> toks(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const int node = perm[static_cast<std::size_t>(k)];
    auto& t = toks[static_cast<std::size_t>(node)];
    t.index = node + 1;
    t.surface = "w" + std::to_string(node);
    t.head = k == 0 ? kRoot : perm[rng.below(static_cast<std::uint64_t>(k))];
    t.deprel = k == 0 ? "ROOT" : "dep";
  }
  return DepTree::build(std::move(toks));
}

inline std::vector<Vector> random_inputs(Rng& rng, int n, std::size_t dim) {
  std::vector<Vector> xs;
  for (int i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    xs.emplace_back(std::move(v));
  }
  return xs;
}

/// Per-node predictions from a random logit vector; `coarse` draws logits
/// from a tiny grid so ties are common.
inline std::vector<NodePrediction> random_predictions(Rng& rng, int n, bool coarse = false) {
  std::vector<NodePrediction> out;
  for (int i = 0; i < n; ++i) {
    std::array<double, kNumClasses> logits{};
    for (auto& l : logits) l = coarse ? static_cast<double>(rng.below(3)) : rng.uniform(-3.0, 3.0);
    const auto lp = log_softmax(logits);
    NodePrediction p;
    for (std::size_t c = 0; c < kNumClasses; ++c) p.log_probs[c] = lp[c];
    out.push_back(p);
  }
  return out;
}

inline NodePrediction prediction_for(Sentiment s, double strength = 2.0) {
  std::array<double, kNumClasses> logits{};
  logits[index_of(s)] = strength;
  const auto lp = log_softmax(logits);
  NodePrediction p;
  for (std::size_t c = 0; c < kNumClasses; ++c) p.log_probs[c] = lp[c];
  return p;
}

/// Analytic gradients of the supervised loss against central differences.
inline GradCheckReport check_tree_gradients(ModelParams& params, const DepTree& tree, const std::vector<Vector>& inputs,
                                            const Supervision& sup, double h, const DropoutMasks* masks = nullptr) {
  params.store().zero_grad();
  const auto fwd = tree_forward(params, tree, inputs);
  backward(params, tree, inputs, fwd, sup, masks);
  std::vector<Matrix> analytic;
  for (const auto& p : params.store()) analytic.push_back(p.grad);
  params.store().zero_grad();
  auto loss = [&](const ParamStore&) { return supervised_loss(params, tree_forward(params, tree, inputs), sup, masks); };
  return gradient_check(loss, params.store(), analytic, h);
}

inline std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  for (auto w : text::split_ws(s)) out.emplace_back(w);
  return out;
}

inline std::string fixture(const std::string& name) { return std::string(TASTE_FIXTURES) + "/" + name; }

/// [num, den] pairs in the hand-counted expectation files.
inline double fraction(const nlohmann::json& j) { return j.at(0).get<double>() / j.at(1).get<double>(); }

inline MeanSd mean_sd_of(const nlohmann::json& fractions) {
  std::vector<double> xs;
  for (const auto& f : fractions) xs.push_back(fraction(f));
  MeanSd m;
  m.count = xs.size();
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x / static_cast<double>(xs.size());
  for (double x : xs) m.sd += (x - m.mean) * (x - m.mean) / static_cast<double>(xs.size());
  m.sd = std::sqrt(m.sd);
  return m;
}

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

}  // namespace taste::testing

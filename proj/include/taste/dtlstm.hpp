#pragma once

// Child-sum dependency Tree-LSTM with a per-node three-class sentiment
// classifier.
//
//   h~_j  = sum_k h_k
//   i_j   = sigmoid(W_i x_j + U_i h~_j + b_i)
//   f_jk  = sigmoid(W_f x_j + U_f h_k  + b_f)      one per child k
//   o_j   = sigmoid(W_o x_j + U_o h~_j + b_o)
//   u_j   = tanh   (W_u x_j + U_u h~_j + b_u)      (sigmoid when configured)
//   c_j   = i_j * u_j + sum_k f_jk * c_k
//   h_j   = o_j * tanh(c_j)
//   log p = log_softmax(P h_j + b_p)
//
// Gradients are derived by hand and checked against central differences in
// the test suite.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "taste/corpus_io.hpp"
#include "taste/error.hpp"
#include "taste/neural.hpp"
#include "taste/sentiment.hpp"

namespace taste {

enum class CandidateActivation : std::uint32_t { Tanh = 0, Sigmoid = 1 };

inline std::string_view to_string(CandidateActivation a) {
  return a == CandidateActivation::Tanh ? "tanh" : "sigmoid";
}

/// All Tree-LSTM weights, stored in a ParamStore in a fixed order which is
/// also the checkpoint order.
class ModelParams {
 public:
  enum Slot : std::size_t { Wi, Wf, Wo, Wu, Ui, Uf, Uo, Uu, Bi, Bf, Bo, Bu, P, Bp, kSlotCount };

  static constexpr std::array<const char*, kSlotCount> kNames = {
      "W_i", "W_f", "W_o", "W_u", "U_i", "U_f", "U_o", "U_u", "b_i", "b_f", "b_o", "b_u", "P", "b_p"};

  ModelParams() = default;

  static ModelParams zeros(std::size_t hidden_dim, std::size_t embed_dim,
                           CandidateActivation act = CandidateActivation::Tanh) {
    if (hidden_dim == 0 || embed_dim == 0) throw Error(ErrorKind::Dimension, "model dimensions must be positive");
    ModelParams m;
    m.hidden_ = hidden_dim;
    m.embed_ = embed_dim;
    m.activation_ = act;
    for (std::size_t s = 0; s < kSlotCount; ++s) {
      auto [r, c] = m.expected_shape(static_cast<Slot>(s));
      m.store_.add(kNames[s], Matrix(r, c));
    }
    return m;
  }

  /// Glorot-uniform weights, zero biases; one derived seed per tensor.
  static ModelParams initialized(std::size_t hidden_dim, std::size_t embed_dim, std::uint64_t seed,
                                 CandidateActivation act = CandidateActivation::Tanh) {
    ModelParams m = zeros(hidden_dim, embed_dim, act);
    std::uint64_t s = seed;
    for (std::size_t k = 0; k < kSlotCount; ++k) {
      s = splitmix64(s);
      if (is_bias(static_cast<Slot>(k))) continue;
      auto& p = m.store_[k];
      p.value = glorot_init(p.value.rows(), p.value.cols(), s);
    }
    return m;
  }

  static constexpr bool is_bias(Slot s) { return s == Bi || s == Bf || s == Bo || s == Bu || s == Bp; }

  std::pair<std::size_t, std::size_t> expected_shape(Slot s) const {
    switch (s) {
      case Wi: case Wf: case Wo: case Wu: return {hidden_, embed_};
      case Ui: case Uf: case Uo: case Uu: return {hidden_, hidden_};
      case Bi: case Bf: case Bo: case Bu: return {hidden_, 1};
      case P: return {kNumClasses, hidden_};
      case Bp: return {kNumClasses, 1};
      default: return {0, 0};
    }
  }

  std::size_t hidden_dim() const { return hidden_; }
  std::size_t embed_dim() const { return embed_; }
  CandidateActivation activation() const { return activation_; }
  void set_activation(CandidateActivation a) { activation_ = a; }

  const Matrix& operator[](Slot s) const { return store_[s].value; }
  Matrix& operator[](Slot s) { return store_[s].value; }
  Matrix& grad(Slot s) { return store_[s].grad; }
  const Matrix& grad(Slot s) const { return store_[s].grad; }

  ParamStore& store() { return store_; }
  const ParamStore& store() const { return store_; }

 private:
  ParamStore store_;
  std::size_t hidden_ = 0;
  std::size_t embed_ = 0;
  CandidateActivation activation_ = CandidateActivation::Tanh;
};

struct NodeState {
  Vector h;
  Vector c;
  Vector h_tilde;
  Vector i;
  Vector o;
  Vector u;
  std::vector<Vector> forgets;  // f_jk, in child order
};

struct NodePrediction {
  std::array<double, kNumClasses> log_probs{};

  double log_prob(Sentiment s) const { return log_probs[index_of(s)]; }

  /// Ties go to the higher class index (negative < neutral < positive).
  Sentiment label() const {
    std::size_t best = 0;
    for (std::size_t k = 1; k < kNumClasses; ++k)
      if (log_probs[k] >= log_probs[best]) best = k;
    return sentiment_from_index(best);
  }
};

inline NodePrediction classify(const ModelParams& params, std::span<const double> h) {
  Vector logits(kNumClasses);
  for (std::size_t k = 0; k < kNumClasses; ++k) logits[k] = params[ModelParams::Bp][k];
  gemv_acc(params[ModelParams::P], h, logits.values());
  const Vector lp = log_softmax(logits);
  NodePrediction out;
  for (std::size_t k = 0; k < kNumClasses; ++k) out.log_probs[k] = lp[k];
  return out;
}

inline NodeState node_forward(const ModelParams& params, std::span<const double> x,
                              std::span<const NodeState* const> children) {
  const std::size_t hd = params.hidden_dim();
  if (x.size() != params.embed_dim())
    throw Error(ErrorKind::Dimension, "input width " + std::to_string(x.size()) + " != embed_dim " +
                                          std::to_string(params.embed_dim()));
  for (const NodeState* ch : children)
    if (ch->h.size() != hd || ch->c.size() != hd) throw Error(ErrorKind::Dimension, "child state width mismatch");

  using S = ModelParams::Slot;
  NodeState st;
  st.h_tilde = Vector(hd);
  for (const NodeState* ch : children) st.h_tilde += ch->h;

  auto preact = [&](S w, S u, S b, std::span<const double> hin) {
    Vector z(hd);
    for (std::size_t r = 0; r < hd; ++r) z[r] = params[b][r];
    gemv_acc(params[w], x, z.values());
    gemv_acc(params[u], hin, z.values());
    return z;
  };

  st.i = preact(S::Wi, S::Ui, S::Bi, st.h_tilde.values());
  st.o = preact(S::Wo, S::Uo, S::Bo, st.h_tilde.values());
  st.u = preact(S::Wu, S::Uu, S::Bu, st.h_tilde.values());
  for (std::size_t r = 0; r < hd; ++r) {
    st.i[r] = sigmoid(st.i[r]);
    st.o[r] = sigmoid(st.o[r]);
    st.u[r] = params.activation() == CandidateActivation::Tanh ? std::tanh(st.u[r]) : sigmoid(st.u[r]);
  }

  st.c = Vector(hd);
  for (std::size_t r = 0; r < hd; ++r) st.c[r] = st.i[r] * st.u[r];
  if (!children.empty()) {
    // W_f x + b_f is shared by every child's forget gate.
    Vector base(hd);
    for (std::size_t r = 0; r < hd; ++r) base[r] = params[S::Bf][r];
    gemv_acc(params[S::Wf], x, base.values());
    st.forgets.reserve(children.size());
    for (const NodeState* ch : children) {
      Vector f = base;
      gemv_acc(params[S::Uf], ch->h.values(), f.values());
      for (std::size_t r = 0; r < hd; ++r) {
        f[r] = sigmoid(f[r]);
        st.c[r] += f[r] * ch->c[r];
      }
      st.forgets.push_back(std::move(f));
    }
  }

  st.h = Vector(hd);
  for (std::size_t r = 0; r < hd; ++r) st.h[r] = st.o[r] * std::tanh(st.c[r]);
  return st;
}

inline NodeState node_forward(const ModelParams& params, std::span<const double> x,
                              const std::vector<NodeState>& children) {
  std::vector<const NodeState*> ptrs;
  for (const auto& c : children) ptrs.push_back(&c);
  return node_forward(params, x, ptrs);
}

/// States and predictions indexed by token position.
struct TreeOutput {
  std::vector<NodeState> states;
  std::vector<NodePrediction> predictions;
  std::vector<int> order;  // post-order used for the pass
};

/// One input vector per token position.
inline TreeOutput tree_forward(const ModelParams& params, const DepTree& tree, const std::vector<Vector>& inputs) {
  if (inputs.size() != static_cast<std::size_t>(tree.size()))
    throw Error(ErrorKind::Dimension, "one input vector per token required");
  TreeOutput out;
  out.states.resize(inputs.size());
  out.predictions.resize(inputs.size());
  out.order = tree.post_order();
  std::vector<const NodeState*> kids;
  for (int j : out.order) {
    kids.clear();
    for (int k : tree.children(j)) kids.push_back(&out.states[static_cast<std::size_t>(k)]);
    try {
      out.states[j] = node_forward(params, inputs[j].values(), kids);
      out.predictions[j] = classify(params, out.states[j].h.values());
    } catch (const Error& e) {
      throw Error(e.kind(), "node " + std::to_string(j + 1) + ": " + e.detail());
    }
  }
  return out;
}

inline std::vector<Vector> embed_tokens(const DepTree& tree, const EmbeddingTable& emb) {
  std::vector<Vector> inputs;
  inputs.reserve(static_cast<std::size_t>(tree.size()));
  for (const auto& tok : tree.tokens()) {
    auto v = emb.lookup(tok.surface);
    inputs.emplace_back(std::vector<double>(v.begin(), v.end()));
  }
  return inputs;
}

inline TreeOutput tree_forward(const ModelParams& params, const DepTree& tree, const EmbeddingTable& emb) {
  if (emb.dim() != params.embed_dim())
    throw Error(ErrorKind::Dimension, "embedding width " + std::to_string(emb.dim()) + " != model embed_dim " +
                                          std::to_string(params.embed_dim()));
  return tree_forward(params, tree, embed_tokens(tree, emb));
}

// ---------------------------------------------------------------------------
// Backpropagation through structure

/// Supervised nodes of one example: (token position, gold label).
using Supervision = std::vector<std::pair<int, Sentiment>>;

/// Optional dropout on the classifier input of supervised nodes. Masks are
/// inverted-dropout scale factors (0 or 1/(1-rate)).
struct DropoutMasks {
  std::unordered_map<int, Vector> by_node;
};

/// Negative log-likelihood of the supervised labels. When `masks` is given,
/// the classifier sees h scaled element-wise by the node's mask.
inline double supervised_loss(const ModelParams& params, const TreeOutput& fwd, const Supervision& sup,
                              const DropoutMasks* masks = nullptr) {
  double loss = 0.0;
  for (auto [node, label] : sup) {
    const auto& h = fwd.states[node].h;
    if (masks) {
      if (auto it = masks->by_node.find(node); it != masks->by_node.end()) {
        Vector hm = h;
        for (std::size_t r = 0; r < hm.size(); ++r) hm[r] *= it->second[r];
        loss -= classify(params, hm.values()).log_prob(label);
        continue;
      }
    }
    loss -= fwd.predictions[node].log_prob(label);
  }
  return loss;
}

/// Accumulates d(loss)/d(params) into the parameter gradient slots and returns
/// the loss. `fwd` must be the forward pass of `params` over `tree`/`inputs`.
inline double backward(ModelParams& params, const DepTree& tree, const std::vector<Vector>& inputs,
                       const TreeOutput& fwd, const Supervision& sup, const DropoutMasks* masks = nullptr) {
  using S = ModelParams::Slot;
  const std::size_t hd = params.hidden_dim();
  const std::size_t n = static_cast<std::size_t>(tree.size());
  std::vector<Vector> dh(n, Vector(hd));
  std::vector<Vector> dc(n, Vector(hd));
  double loss = 0.0;

  // Classifier layer.
  for (auto [node, label] : sup) {
    Vector h = fwd.states[node].h;
    const Vector* mask = nullptr;
    if (masks) {
      if (auto it = masks->by_node.find(node); it != masks->by_node.end()) mask = &it->second;
    }
    if (mask)
      for (std::size_t r = 0; r < hd; ++r) h[r] *= (*mask)[r];
    const NodePrediction pred = mask ? classify(params, h.values()) : fwd.predictions[node];
    loss -= pred.log_prob(label);
    std::array<double, kNumClasses> dlogits{};
    for (std::size_t k = 0; k < kNumClasses; ++k)
      dlogits[k] = std::exp(pred.log_probs[k]) - (k == index_of(label) ? 1.0 : 0.0);
    outer_acc(params.grad(S::P), dlogits, h.values());
    for (std::size_t k = 0; k < kNumClasses; ++k) params.grad(S::Bp)[k] += dlogits[k];
    Vector dhn(hd);
    gemv_t_acc(params[S::P], dlogits, dhn.values());
    if (mask)
      for (std::size_t r = 0; r < hd; ++r) dhn[r] *= (*mask)[r];
    dh[node] += dhn;
  }

  const bool tanh_candidate = params.activation() == CandidateActivation::Tanh;
  Vector dzi(hd), dzo(dzi), dzu(dzi), dht(dzi), dct(dzi), dzf(dzi);
  for (auto it = fwd.order.rbegin(); it != fwd.order.rend(); ++it) {
    const int j = *it;
    const NodeState& st = fwd.states[j];
    const auto x = inputs[j].values();
    for (std::size_t r = 0; r < hd; ++r) {
      const double tc = std::tanh(st.c[r]);
      const double do_r = dh[j][r] * tc;
      dct[r] = dc[j][r] + dh[j][r] * st.o[r] * (1.0 - tc * tc);
      dzi[r] = dct[r] * st.u[r] * st.i[r] * (1.0 - st.i[r]);
      dzo[r] = do_r * st.o[r] * (1.0 - st.o[r]);
      const double du = dct[r] * st.i[r];
      dzu[r] = tanh_candidate ? du * (1.0 - st.u[r] * st.u[r]) : du * st.u[r] * (1.0 - st.u[r]);
    }
    outer_acc(params.grad(S::Wi), dzi.values(), x);
    outer_acc(params.grad(S::Wo), dzo.values(), x);
    outer_acc(params.grad(S::Wu), dzu.values(), x);
    const auto& kids = tree.children(j);
    if (!kids.empty()) {
      outer_acc(params.grad(S::Ui), dzi.values(), st.h_tilde.values());
      outer_acc(params.grad(S::Uo), dzo.values(), st.h_tilde.values());
      outer_acc(params.grad(S::Uu), dzu.values(), st.h_tilde.values());
    }
    for (std::size_t r = 0; r < hd; ++r) {
      params.grad(S::Bi)[r] += dzi[r];
      params.grad(S::Bo)[r] += dzo[r];
      params.grad(S::Bu)[r] += dzu[r];
    }
    if (kids.empty()) continue;

    dht.fill(0.0);
    gemv_t_acc(params[S::Ui], dzi.values(), dht.values());
    gemv_t_acc(params[S::Uo], dzo.values(), dht.values());
    gemv_t_acc(params[S::Uu], dzu.values(), dht.values());

    for (std::size_t m = 0; m < kids.size(); ++m) {
      const int k = kids[m];
      const NodeState& child = fwd.states[k];
      const Vector& f = st.forgets[m];
      for (std::size_t r = 0; r < hd; ++r) {
        dzf[r] = dct[r] * child.c[r] * f[r] * (1.0 - f[r]);
        dc[k][r] += dct[r] * f[r];
      }
      outer_acc(params.grad(S::Wf), dzf.values(), x);
      outer_acc(params.grad(S::Uf), dzf.values(), child.h.values());
      for (std::size_t r = 0; r < hd; ++r) params.grad(S::Bf)[r] += dzf[r];
      dh[k] += dht;
      gemv_t_acc(params[S::Uf], dzf.values(), dh[k].values());
    }
  }
  return loss;
}

/// Root-only supervision, or every labeled node when asked and available.
inline Supervision supervision_for(const SstExample& ex, const DepTree& tree, bool interior) {
  Supervision sup;
  if (interior && !ex.node_labels.empty()) {
    for (std::size_t i = 0; i < ex.node_labels.size(); ++i)
      if (ex.node_labels[i]) sup.emplace_back(static_cast<int>(i), *ex.node_labels[i]);
  } else {
    sup.emplace_back(tree.root(), ex.label);
  }
  return sup;
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  int epochs = 10;
  double lr = 0.05;
  double eps = 1e-8;
  std::size_t batch_size = 25;
  double l2 = 1e-4;
  double dropout = 0.0;
  std::uint64_t seed = 0;
  bool supervise_interior = false;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;  // mean supervised NLL per example
  double dev_accuracy = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> curve;
  int best_epoch = 0;  // 0 means the initial parameters were kept
  double best_dev_accuracy = 0.0;
  double dev_majority_baseline = 0.0;
  std::size_t dev_overlap = 0;  // dev sentences also present in the training set
};

struct TrainResult {
  ModelParams params;
  TrainReport report;
};

/// Word vectors for a corpus, converted to doubles once and shared by index.
class InputCache {
 public:
  InputCache(const EmbeddingTable& emb, std::span<const SstExample> a, std::span<const SstExample> b = {}) {
    auto add = [&](std::span<const SstExample> set, std::vector<std::vector<std::size_t>>& ids) {
      for (const auto& ex : set) {
        std::vector<std::size_t> row;
        for (const auto& w : ex.tokens) {
          auto [it, fresh] = index_.try_emplace(w, vectors_.size());
          if (fresh) {
            auto v = emb.lookup(w);
            vectors_.emplace_back(std::vector<double>(v.begin(), v.end()));
          }
          row.push_back(it->second);
        }
        ids.push_back(std::move(row));
      }
    };
    add(a, ids_a_);
    add(b, ids_b_);
  }

  std::vector<Vector> inputs(bool second, std::size_t example) const {
    const auto& ids = second ? ids_b_[example] : ids_a_[example];
    std::vector<Vector> out;
    out.reserve(ids.size());
    for (auto id : ids) out.push_back(vectors_[id]);
    return out;
  }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Vector> vectors_;
  std::vector<std::vector<std::size_t>> ids_a_;
  std::vector<std::vector<std::size_t>> ids_b_;
};

/// Fraction of examples whose root argmax equals the root label.
inline double root_accuracy(const ModelParams& params, std::span<const SstExample> set,
                            const std::vector<DepTree>& trees, const InputCache& cache, bool second) {
  if (set.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t e = 0; e < set.size(); ++e) {
    const auto out = tree_forward(params, trees[e], cache.inputs(second, e));
    if (out.predictions[trees[e].root()].label() == set[e].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(set.size());
}

inline double majority_baseline(std::span<const SstExample> set) {
  if (set.empty()) return 0.0;
  std::array<std::size_t, kNumClasses> counts{};
  for (const auto& ex : set) ++counts[index_of(ex.label)];
  return static_cast<double>(*std::max_element(counts.begin(), counts.end())) / static_cast<double>(set.size());
}

/// Mini-batch Adagrad over shuffled examples. After each epoch the dev root
/// accuracy is measured and the parameters of the best epoch (earliest on
/// ties) are returned. With an empty dev set the final epoch is returned.
inline TrainResult train(ModelParams params, std::span<const SstExample> train_set,
                         std::span<const SstExample> dev_set, const EmbeddingTable& emb, const TrainConfig& cfg,
                         const std::function<void(const EpochRecord&)>& on_epoch = {}) {
  if (train_set.empty()) throw Error(ErrorKind::Config, "training set is empty");
  if (emb.dim() != params.embed_dim())
    throw Error(ErrorKind::Dimension, "embedding width does not match model embed_dim");
  if (cfg.epochs < 0) throw Error(ErrorKind::Config, "epochs must be >= 0");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) throw Error(ErrorKind::Config, "dropout must lie in [0, 1)");

  TrainReport report;
  report.dev_majority_baseline = majority_baseline(dev_set);
  {
    std::unordered_set<std::string> seen;
    for (const auto& ex : train_set) seen.insert(text::join(ex.tokens, " "));
    for (const auto& ex : dev_set) report.dev_overlap += seen.count(text::join(ex.tokens, " "));
  }
  if (cfg.epochs == 0) return {std::move(params), std::move(report)};

  std::vector<DepTree> train_trees, dev_trees;
  for (const auto& ex : train_set) train_trees.push_back(to_dep_tree(ex));
  for (const auto& ex : dev_set) dev_trees.push_back(to_dep_tree(ex));
  const InputCache cache(emb, train_set, dev_set);

  params.store().zero_grad();
  params.store().reset_accumulators();
  Rng rng(splitmix64(cfg.seed ^ 0x747261696eULL));
  const std::size_t batch = std::max<std::size_t>(1, cfg.batch_size);
  const std::size_t hd = params.hidden_dim();

  std::optional<ModelParams> best;
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double total_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t e = order[b];
        const auto inputs = cache.inputs(false, e);
        const auto fwd = tree_forward(params, train_trees[e], inputs);
        const auto sup = supervision_for(train_set[e], train_trees[e], cfg.supervise_interior);
        DropoutMasks masks;
        if (cfg.dropout > 0.0) {
          const double keep = 1.0 - cfg.dropout;
          for (auto [node, label] : sup) {
            Vector m(hd);
            for (std::size_t r = 0; r < hd; ++r) m[r] = rng.uniform() < keep ? 1.0 / keep : 0.0;
            masks.by_node.emplace(node, std::move(m));
          }
        }
        const double loss =
            backward(params, train_trees[e], inputs, fwd, sup, cfg.dropout > 0.0 ? &masks : nullptr);
        if (!std::isfinite(loss))
          throw Error(ErrorKind::Numeric, "non-finite loss at training example " + std::to_string(e + 1));
        total_loss += loss;
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (std::size_t k = 0; k < ModelParams::kSlotCount; ++k) {
        auto& p = params.store()[k];
        const bool decay = cfg.l2 > 0.0 && !ModelParams::is_bias(static_cast<ModelParams::Slot>(k));
        for (std::size_t i = 0; i < p.value.size(); ++i) {
          p.grad[i] *= scale;
          if (decay) p.grad[i] += cfg.l2 * p.value[i];
        }
      }
      adagrad_step(params.store(), cfg.lr, cfg.eps);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = total_loss / static_cast<double>(train_set.size());
    rec.dev_accuracy = root_accuracy(params, dev_set, dev_trees, cache, true);
    report.curve.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (dev_set.empty() || !best || rec.dev_accuracy > report.best_dev_accuracy) {
      best = params;
      report.best_epoch = epoch;
      report.best_dev_accuracy = rec.dev_accuracy;
    }
  }
  ModelParams out = std::move(*best);
  out.store().zero_grad();
  return {std::move(out), std::move(report)};
}

// ---------------------------------------------------------------------------
// Checkpoints
//
// Layout (all integers little-endian):
//   "TASTE001"                      8 bytes
//   u32 hidden_dim, u32 embed_dim, u32 candidate activation (0 tanh, 1 sigmoid)
//   u32 class count, then per class: u32 length + UTF-8 name
//   u64 FNV-1a hash of the embedding file
//   u32 tensor count, then per tensor:
//     u32 name length + name, u32 rows, u32 cols, rows*cols f32 row-major

inline constexpr std::string_view kCheckpointMagic = "TASTE001";

struct Checkpoint {
  ModelParams params;
  std::uint64_t embedding_hash = 0;
};

namespace detail {

class LeWriter {
 public:
  void u32(std::uint32_t v) {
    for (int b = 0; b < 4; ++b) buf_.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) buf_.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
  }
  void f32(float f) { u32(std::bit_cast<std::uint32_t>(f)); }
  void bytes(std::string_view s) { buf_.append(s); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }
  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

class LeReader {
 public:
  explicit LeReader(std::string data) : buf_(std::move(data)) {}

  std::string_view bytes(std::size_t n) {
    need(n);
    std::string_view out(buf_.data() + pos_, n);
    pos_ += n;
    return out;
  }
  std::uint32_t u32() {
    auto b = bytes(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
    return v;
  }
  std::uint64_t u64() {
    auto b = bytes(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str(std::size_t max_len = 1024) {
    const auto n = u32();
    if (n > max_len) throw Error(ErrorKind::Corruption, "implausible string length in checkpoint");
    return std::string(bytes(n));
  }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) throw Error(ErrorKind::Corruption, "checkpoint is truncated");
  }
  std::string buf_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_checkpoint(const ModelParams& params, std::uint64_t embedding_hash) {
  detail::LeWriter w;
  w.bytes(kCheckpointMagic);
  w.u32(static_cast<std::uint32_t>(params.hidden_dim()));
  w.u32(static_cast<std::uint32_t>(params.embed_dim()));
  w.u32(static_cast<std::uint32_t>(params.activation()));
  w.u32(static_cast<std::uint32_t>(kNumClasses));
  for (auto s : kAllSentiments) w.str(to_string(s));
  w.u64(embedding_hash);
  w.u32(static_cast<std::uint32_t>(ModelParams::kSlotCount));
  for (std::size_t k = 0; k < ModelParams::kSlotCount; ++k) {
    const Matrix& m = params[static_cast<ModelParams::Slot>(k)];
    w.str(ModelParams::kNames[k]);
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.cols()));
    for (double v : m.values()) w.f32(static_cast<float>(v));
  }
  return w.data();
}

inline Checkpoint deserialize_checkpoint(std::string data) {
  if (data.size() < kCheckpointMagic.size() || std::string_view(data).substr(0, kCheckpointMagic.size()) != kCheckpointMagic)
    throw Error(ErrorKind::Format, "not a checkpoint (bad magic)");
  detail::LeReader r(std::move(data));
  r.bytes(kCheckpointMagic.size());
  const auto hidden = r.u32();
  const auto embed = r.u32();
  const auto act = r.u32();
  if (hidden == 0 || embed == 0 || hidden > (1u << 16) || embed > (1u << 16))
    throw Error(ErrorKind::Corruption, "implausible model dimensions in checkpoint header");
  if (act > 1) throw Error(ErrorKind::Corruption, "unknown candidate activation code " + std::to_string(act));
  if (r.u32() != kNumClasses) throw Error(ErrorKind::Corruption, "checkpoint class count is not 3");
  for (auto s : kAllSentiments)
    if (r.str() != to_string(s)) throw Error(ErrorKind::Corruption, "checkpoint class order differs");
  Checkpoint ck;
  ck.embedding_hash = r.u64();
  if (r.u32() != ModelParams::kSlotCount) throw Error(ErrorKind::Corruption, "unexpected tensor count");
  ck.params = ModelParams::zeros(hidden, embed, static_cast<CandidateActivation>(act));
  for (std::size_t k = 0; k < ModelParams::kSlotCount; ++k) {
    const auto slot = static_cast<ModelParams::Slot>(k);
    if (r.str() != ModelParams::kNames[k])
      throw Error(ErrorKind::Corruption, std::string("expected tensor ") + ModelParams::kNames[k]);
    const auto rows = r.u32();
    const auto cols = r.u32();
    const auto [er, ec] = ck.params.expected_shape(slot);
    if (rows != er || cols != ec)
      throw Error(ErrorKind::Corruption, std::string("tensor ") + ModelParams::kNames[k] + " is " +
                                             std::to_string(rows) + "x" + std::to_string(cols) + ", header implies " +
                                             std::to_string(er) + "x" + std::to_string(ec));
    Matrix& m = ck.params[slot];
    for (auto& v : m.values()) {
      const float f = r.f32();
      if (!std::isfinite(f)) throw Error(ErrorKind::Corruption, "non-finite value in checkpoint");
      v = static_cast<double>(f);
    }
  }
  if (r.remaining() != 0) throw Error(ErrorKind::Corruption, "trailing bytes after checkpoint payload");
  return ck;
}

/// Written to a sibling temporary and renamed into place.
inline void save_checkpoint(const ModelParams& params, const std::string& path, std::uint64_t embedding_hash = 0) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write checkpoint '" + path + "'");
    const auto bytes = serialize_checkpoint(params, embedding_hash);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::Io, "short write to '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot move checkpoint into place: " + ec.message());
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open checkpoint '" + path + "'");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(std::move(data));
}

}  // namespace taste

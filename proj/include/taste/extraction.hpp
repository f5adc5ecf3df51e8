#pragma once

// Symbolic layer over the per-node sentiment predictions: noun chunks,
// target identification under the nearest governing verb, trickle-down
// sentiment, and opinion-term search (highest node / sentiment search).

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taste/corpus_io.hpp"
#include "taste/dtlstm.hpp"
#include "taste/sentiment.hpp"
#include "taste/text.hpp"

namespace taste {

enum class Method { HN, SS, Union };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::HN: return "HN";
    case Method::SS: return "SS";
    case Method::Union: return "UNION";
  }
  return "HN";
}

inline std::optional<Method> parse_method(std::string_view s) {
  const auto l = text::to_lower(s);
  if (l == "hn") return Method::HN;
  if (l == "ss") return Method::SS;
  if (l == "union" || l == "hn&ss" || l == "hn+ss") return Method::Union;
  return std::nullopt;
}

inline constexpr std::array<Method, 3> kAllMethods = {Method::HN, Method::SS, Method::Union};

/// Which tokens can govern a target.
enum class VerbRule {
  Pos,           // upos VERB or AUX
  PosOrAuxRel,   // additionally any token attached as aux / auxpass / aux:pass / cop
};

struct ExtractionOptions {
  bool exclude_target = true;  // keep the target's own chunk out of the opinion search
  VerbRule verb_rule = VerbRule::Pos;
  /// In sentences that do contain verbs, also emit chunks that no verb
  /// governs (with no parent verb), instead of dropping them.
  bool orphan_chunks_as_targets = false;
};

struct TargetCandidate {
  Span chunk;
  int head_noun_index = 0;
  std::optional<int> parent_verb_index;
  Sentiment sentiment = Sentiment::Neutral;

  /// Where sentiment is read and where the opinion search starts.
  int search_root() const { return parent_verb_index.value_or(head_noun_index); }
};

struct SearchResult {
  std::optional<int> hn_token_index;
  double hn_activation = 0.0;
  std::vector<int> ss_token_indices;  // sentence order
  bool empty = false;                 // every node of the subtree was excluded
};

struct Triplet {
  std::vector<int> target_indices;
  std::vector<std::string> target_tokens;
  Sentiment sentiment = Sentiment::Neutral;
  std::vector<int> opinion_indices;
  std::vector<std::string> opinion_tokens;
  Method method = Method::HN;
  /// For UNION: the HN term and the SS term that were merged.
  std::vector<std::vector<int>> alternatives;
  bool empty_opinion = false;
};

namespace detail {

inline bool is_one_of(std::string_view rel, std::initializer_list<std::string_view> set) {
  const auto l = text::to_lower(rel);
  return std::find(set.begin(), set.end(), l) != set.end();
}

}  // namespace detail

inline bool is_chunk_head_relation(std::string_view deprel) {
  return detail::is_one_of(deprel, {"nsubj", "nsubjpass", "dobj", "iobj", "pobj", "attr", "dative", "appos", "conj",
                                    "root", "nsubj:pass", "obj", "obl", "nmod"});
}

inline bool is_verb(const DepTree& tree, int i, VerbRule rule = VerbRule::Pos) {
  const Token& t = tree.token(i);
  if (t.upos == "VERB" || t.upos == "AUX") return true;
  return rule == VerbRule::PosOrAuxRel && detail::is_one_of(t.deprel, {"aux", "auxpass", "aux:pass", "cop"});
}

/// External spans when the parse carries them; otherwise a rule-based
/// approximation of base noun phrases over the dependency tree.
inline std::vector<Span> noun_chunks(const DepTree& tree) {
  if (tree.chunk_spans()) return *tree.chunk_spans();

  std::vector<Span> raw;
  for (int h = 0; h < tree.size(); ++h) {
    const Token& t = tree.token(h);
    if (t.upos != "NOUN" && t.upos != "PROPN" && t.upos != "PRON") continue;
    if (!is_chunk_head_relation(t.deprel)) continue;
    int left = h;
    std::vector<int> stack{h};
    while (!stack.empty()) {
      const int n = stack.back();
      stack.pop_back();
      for (int c : tree.children(n)) {
        if (c >= h) continue;
        const auto& rel = tree.token(c).deprel;
        bool ok = detail::is_one_of(rel, {"det", "poss", "nmod:poss", "amod", "compound", "nummod"});
        if (!ok && detail::is_one_of(rel, {"advmod"}))
          ok = detail::is_one_of(tree.token(n).deprel, {"amod"});
        if (!ok) continue;
        left = std::min(left, c);
        stack.push_back(c);
      }
    }
    raw.push_back({left, h + 1});
  }

  // Longer chunk wins an overlap; equal lengths keep the earlier one.
  std::vector<Span> by_size = raw;
  std::stable_sort(by_size.begin(), by_size.end(), [](const Span& a, const Span& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.start < b.start;
  });
  std::vector<Span> kept;
  for (const Span& s : by_size)
    if (std::none_of(kept.begin(), kept.end(), [&](const Span& k) { return k.overlaps(s); })) kept.push_back(s);
  std::sort(kept.begin(), kept.end());
  return kept;
}

/// The chunk token attached outside the chunk; the shallowest such token,
/// rightmost on ties.
inline int chunk_head(const DepTree& tree, const Span& chunk) {
  int best = chunk.end - 1;
  int best_depth = -1;
  for (int i = chunk.start; i < chunk.end; ++i) {
    const int h = tree.head(i);
    if (h != kRoot && chunk.contains(h)) continue;
    int depth = 0;
    for (int cur = i; tree.head(cur) != kRoot; cur = tree.head(cur)) ++depth;
    if (best_depth < 0 || depth <= best_depth) {
      best = i;
      best_depth = depth;
    }
  }
  return best;
}

inline std::vector<TargetCandidate> identify_targets(const DepTree& tree, std::span<const Span> chunks,
                                                     const ExtractionOptions& opts = {}) {
  bool has_verb = false;
  for (int i = 0; i < tree.size() && !has_verb; ++i) has_verb = is_verb(tree, i, opts.verb_rule);

  std::vector<TargetCandidate> out;
  for (const Span& chunk : chunks) {
    TargetCandidate cand;
    cand.chunk = chunk;
    cand.head_noun_index = chunk_head(tree, chunk);
    if (has_verb) {
      // Nearest ancestor verb whose yield holds the whole chunk.
      for (int a = tree.head(cand.head_noun_index); a != kRoot; a = tree.head(a)) {
        if (!is_verb(tree, a, opts.verb_rule)) continue;
        bool inside = true;
        for (int i = chunk.start; i < chunk.end && inside; ++i) inside = tree.dominates(a, i);
        if (inside) {
          cand.parent_verb_index = a;
          break;
        }
      }
      if (!cand.parent_verb_index && !opts.orphan_chunks_as_targets) continue;
    }
    out.push_back(cand);
  }
  return out;
}

/// Argmax label at the parent verb, or at the head noun when there is none.
inline Sentiment assign_sentiment(const TargetCandidate& cand, std::span<const NodePrediction> preds) {
  return preds[static_cast<std::size_t>(cand.search_root())].label();
}

/// Depth-first, pre-order, children in sentence order, over the subtree at
/// `root_index`. Excluded tokens are traversed but never selected. HN keeps
/// the last-visited maximum of the target class log-probability; SS keeps
/// every node whose argmax is the target class.
inline SearchResult recursive_search(const DepTree& tree, std::span<const NodePrediction> preds, int root_index,
                                     Sentiment target, std::optional<Span> exclusion = std::nullopt) {
  SearchResult res;
  std::vector<int> stack{root_index};
  while (!stack.empty()) {
    const int n = stack.back();
    stack.pop_back();
    const auto& kids = tree.children(n);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    if (exclusion && exclusion->contains(n)) continue;
    const auto& p = preds[static_cast<std::size_t>(n)];
    const double act = p.log_prob(target);
    if (!res.hn_token_index || act >= res.hn_activation) {
      res.hn_token_index = n;
      res.hn_activation = act;
    }
    if (p.label() == target) res.ss_token_indices.push_back(n);
  }
  std::sort(res.ss_token_indices.begin(), res.ss_token_indices.end());
  res.empty = !res.hn_token_index;
  return res;
}

inline const std::vector<std::string>& determiner_words() {
  static const std::vector<std::string> words = {"the", "a", "an"};
  return words;
}

inline const std::vector<std::string>& copula_words() {
  static const std::vector<std::string> words = {"is", "was", "were", "are", "'s"};
  return words;
}

/// Case-insensitive removal of determiners and/or copulas; survivors keep order.
inline std::vector<std::string> strip_function_words(std::span<const std::string> tokens, bool strip_dets,
                                                     bool strip_copula) {
  auto in = [](const std::vector<std::string>& list, const std::string& w) {
    return std::find(list.begin(), list.end(), w) != list.end();
  };
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    const auto l = text::to_lower(t);
    if (strip_dets && in(determiner_words(), l)) continue;
    if (strip_copula && in(copula_words(), l)) continue;
    out.push_back(t);
  }
  return out;
}

namespace detail {

inline std::vector<std::string> surfaces_at(const DepTree& tree, std::span<const int> idx) {
  std::vector<std::string> out;
  for (int i : idx) out.push_back(tree.token(i).surface);
  return out;
}

}  // namespace detail

inline Triplet make_triplet(const DepTree& tree, const TargetCandidate& cand, const SearchResult& sr, Method method) {
  Triplet t;
  for (int i = cand.chunk.start; i < cand.chunk.end; ++i) t.target_indices.push_back(i);
  t.target_tokens = detail::surfaces_at(tree, t.target_indices);
  t.sentiment = cand.sentiment;
  t.method = method;
  std::vector<int> hn;
  if (sr.hn_token_index) hn.push_back(*sr.hn_token_index);
  switch (method) {
    case Method::HN: t.opinion_indices = hn; break;
    case Method::SS: t.opinion_indices = sr.ss_token_indices; break;
    case Method::Union: {
      t.opinion_indices = sr.ss_token_indices;
      for (int i : hn)
        if (std::find(t.opinion_indices.begin(), t.opinion_indices.end(), i) == t.opinion_indices.end())
          t.opinion_indices.push_back(i);
      std::sort(t.opinion_indices.begin(), t.opinion_indices.end());
      t.alternatives = {hn, sr.ss_token_indices};
      break;
    }
  }
  t.opinion_tokens = detail::surfaces_at(tree, t.opinion_indices);
  t.empty_opinion = t.opinion_indices.empty();
  return t;
}

/// Targets of a sentence together with their search results.
struct SentenceExtraction {
  std::vector<TargetCandidate> targets;
  std::vector<SearchResult> searches;  // parallel to targets
};

inline SentenceExtraction analyze_sentence(const DepTree& tree, std::span<const NodePrediction> preds,
                                           const ExtractionOptions& opts = {}) {
  if (preds.size() != static_cast<std::size_t>(tree.size()))
    throw Error(ErrorKind::Dimension, "one prediction per token required");
  SentenceExtraction out;
  const auto chunks = noun_chunks(tree);
  out.targets = identify_targets(tree, chunks, opts);
  for (auto& cand : out.targets) {
    cand.sentiment = assign_sentiment(cand, preds);
    std::optional<Span> excl;
    if (opts.exclude_target) excl = cand.chunk;
    out.searches.push_back(recursive_search(tree, preds, cand.search_root(), cand.sentiment, excl));
  }
  return out;
}

/// One triplet per target for the given method.
inline std::vector<Triplet> extract_triplets(const DepTree& tree, std::span<const NodePrediction> preds, Method method,
                                             const ExtractionOptions& opts = {}) {
  const auto sx = analyze_sentence(tree, preds, opts);
  std::vector<Triplet> out;
  for (std::size_t k = 0; k < sx.targets.size(); ++k)
    out.push_back(make_triplet(tree, sx.targets[k], sx.searches[k], method));
  return out;
}

}  // namespace taste

#pragma once

// Metrics: GLEU, boundary-respecting substring matching, and the target,
// sentiment, opinion-term and triplet scores with their text and
// line-delimited renderings.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "taste/corpus_io.hpp"
#include "taste/extraction.hpp"
#include "taste/sentiment.hpp"
#include "taste/text.hpp"

namespace taste {

struct GleuScore {
  double value = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t matches = 0;
  std::size_t candidate_total = 0;
  std::size_t reference_total = 0;
  std::vector<std::size_t> matches_by_n;  // index n-1
};

/// Clipped n-gram matches pooled over n = 1..max_n; the score is
/// min(matches / candidate n-grams, matches / reference n-grams).
inline GleuScore gleu(std::span<const std::string> candidate, std::span<const std::string> reference,
                      std::size_t max_n = 4) {
  GleuScore s;
  if (max_n == 0) max_n = 1;
  s.matches_by_n.assign(max_n, 0);
  for (std::size_t n = 1; n <= max_n; ++n) {
    std::map<std::vector<std::string>, std::size_t> cand, ref;
    if (candidate.size() >= n)
      for (std::size_t i = 0; i + n <= candidate.size(); ++i)
        ++cand[std::vector<std::string>(candidate.begin() + i, candidate.begin() + i + n)];
    if (reference.size() >= n)
      for (std::size_t i = 0; i + n <= reference.size(); ++i)
        ++ref[std::vector<std::string>(reference.begin() + i, reference.begin() + i + n)];
    for (const auto& [gram, c] : cand) {
      s.candidate_total += c;
      if (auto it = ref.find(gram); it != ref.end()) s.matches_by_n[n - 1] += std::min(c, it->second);
    }
    for (const auto& [gram, c] : ref) s.reference_total += c;
    s.matches += s.matches_by_n[n - 1];
  }
  if (s.candidate_total == 0 || s.reference_total == 0) return s;
  s.precision = static_cast<double>(s.matches) / static_cast<double>(s.candidate_total);
  s.recall = static_cast<double>(s.matches) / static_cast<double>(s.reference_total);
  s.value = std::min(s.precision, s.recall);
  return s;
}

namespace detail {

inline bool contains_run(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

inline std::vector<std::string> lowered(std::span<const std::string> v) {
  std::vector<std::string> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(text::to_lower(s));
  return out;
}

}  // namespace detail

/// True when one lowercased token sequence occurs contiguously inside the
/// other. Comparison is per token, so "cake" never matches "pancake".
inline bool span_match(std::span<const std::string> predicted, std::span<const std::string> gold) {
  if (predicted.empty() || gold.empty()) return false;
  const auto p = detail::lowered(predicted);
  const auto g = detail::lowered(gold);
  return detail::contains_run(g, p) || detail::contains_run(p, g);
}

// ---------------------------------------------------------------------------
// Evaluation inputs

struct PredictedOpinion {
  std::vector<int> indices;
  /// Additional terms accepted for matching (the HN and SS parts of UNION).
  std::vector<std::vector<int>> alternatives;
};

struct PredictedTarget {
  std::vector<int> indices;
  Sentiment sentiment = Sentiment::Neutral;
  std::optional<int> parent_verb;
  std::map<Method, PredictedOpinion> opinions;
};

struct SentencePrediction {
  std::vector<std::string> tokens;
  std::vector<PredictedTarget> targets;
  std::string error;  // set when the sentence could not be processed
};

inline SentencePrediction to_sentence_prediction(const DepTree& tree, const SentenceExtraction& sx,
                                                 std::span<const Method> methods) {
  SentencePrediction sp;
  sp.tokens = tree.surfaces();
  for (std::size_t k = 0; k < sx.targets.size(); ++k) {
    PredictedTarget pt;
    const auto& cand = sx.targets[k];
    for (int i = cand.chunk.start; i < cand.chunk.end; ++i) pt.indices.push_back(i);
    pt.sentiment = cand.sentiment;
    pt.parent_verb = cand.parent_verb_index;
    for (Method m : methods) {
      const Triplet t = make_triplet(tree, cand, sx.searches[k], m);
      pt.opinions[m] = {t.opinion_indices, t.alternatives};
    }
    sp.targets.push_back(std::move(pt));
  }
  return sp;
}

// ---------------------------------------------------------------------------
// Report

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t correct_predicted = 0;
  std::size_t predicted = 0;
  std::size_t correct_gold = 0;
  std::size_t gold = 0;
};

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // population standard deviation
  std::size_t count = 0;
};

inline MeanSd mean_sd(std::span<const double> xs) {
  MeanSd m;
  m.count = xs.size();
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - m.mean) * (x - m.mean);
  m.sd = std::sqrt(var / static_cast<double>(xs.size()));
  return m;
}

inline double safe_ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

inline double f1_of(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

struct MethodScores {
  Method method = Method::HN;
  // Among correctly matched targets (one prediction per target, so P = R = F1).
  std::size_t conditioned_total = 0;
  std::size_t ote_correct = 0;
  std::size_t full_correct = 0;
  double ote_f1 = 0.0;
  double full_f1 = 0.0;
  // Corpus-level triplets over all predictions and all gold triplets.
  Prf ote_corpus;
  Prf full_corpus;
  MeanSd opinion_gleu;  // over matched targets whose opinion matched
};

struct EvalReport {
  std::string dataset;
  std::size_t sentences = 0;         // sentences with at least one gold triplet
  std::size_t skipped_sentences = 0;  // sentences without gold triplets
  std::size_t gold_targets = 0;
  std::size_t predicted_targets = 0;
  std::size_t matched_targets = 0;
  std::size_t gold_triplets = 0;
  double target_precision = 0.0;
  double target_recall = 0.0;
  MeanSd target_gleu;
  std::size_t sentiment_correct = 0;
  double sentiment_accuracy = 0.0;
  MeanSd full_sentence_gleu;
  std::vector<MethodScores> methods;
  std::vector<std::string> warnings;

  const MethodScores* find(Method m) const {
    for (const auto& s : methods)
      if (s.method == m) return &s;
    return nullptr;
  }
};

struct EvalOptions {
  std::string dataset = "dataset";
  std::vector<Method> methods = {Method::HN, Method::SS, Method::Union};
  bool strip_determiners = true;
  bool strip_copula = true;
  std::size_t gleu_max_n = 4;
};

namespace detail {

inline std::vector<std::string> pick(std::span<const std::string> tokens, std::span<const int> idx) {
  std::vector<std::string> out;
  for (int i : idx) out.push_back(tokens[static_cast<std::size_t>(i)]);
  return out;
}

struct GoldTarget {
  std::vector<int> indices;
  std::vector<const GoldTriplet*> triplets;
};

inline std::vector<GoldTarget> group_gold_targets(const GoldRecord& rec) {
  std::vector<GoldTarget> out;
  for (const auto& t : rec.triplets) {
    auto it = std::find_if(out.begin(), out.end(), [&](const GoldTarget& g) { return g.indices == t.target; });
    if (it == out.end()) {
      out.push_back({t.target, {}});
      it = out.end() - 1;
    }
    it->triplets.push_back(&t);
  }
  return out;
}

/// Maximum bipartite matching size (augmenting paths, left vertices in order).
inline std::size_t max_matching(const std::vector<std::vector<std::size_t>>& adj, std::size_t right_count) {
  std::vector<int> match_right(right_count, -1);
  std::size_t size = 0;
  for (std::size_t l = 0; l < adj.size(); ++l) {
    std::vector<char> seen(right_count, 0);
    std::function<bool(std::size_t)> augment = [&](std::size_t u) {
      for (std::size_t v : adj[u]) {
        if (seen[v]) continue;
        seen[v] = 1;
        if (match_right[v] < 0 || augment(static_cast<std::size_t>(match_right[v]))) {
          match_right[v] = static_cast<int>(u);
          return true;
        }
      }
      return false;
    };
    if (augment(l)) ++size;
  }
  return size;
}

inline std::vector<std::vector<int>> opinion_terms(const PredictedOpinion& op) {
  std::vector<std::vector<int>> terms{op.indices};
  for (const auto& alt : op.alternatives)
    if (!alt.empty()) terms.push_back(alt);
  return terms;
}

}  // namespace detail

/// Scores predictions against gold. Sentences without gold triplets are
/// skipped. Targets pair greedily one-to-one in sentence order; corpus-level
/// triplets pair by maximum bipartite matching.
inline EvalReport evaluate(std::span<const SentencePrediction> preds, std::span<const GoldRecord> gold,
                           const EvalOptions& opts = {}) {
  if (preds.size() != gold.size())
    throw Error(ErrorKind::Alignment, std::to_string(preds.size()) + " predicted sentences vs " +
                                          std::to_string(gold.size()) + " gold sentences");
  for (std::size_t s = 0; s < preds.size(); ++s)
    if (preds[s].error.empty() && preds[s].tokens != gold[s].tokens)
      throw Error(ErrorKind::Alignment, "sentence " + std::to_string(s + 1) + ": tokens differ (predicted '" +
                                            text::join(preds[s].tokens, " ") + "' vs gold '" +
                                            text::join(gold[s].tokens, " ") + "')");

  EvalReport rep;
  rep.dataset = opts.dataset;
  std::vector<double> target_gleus, sentence_gleus;
  struct PerMethod {
    std::vector<double> gleus;
  };
  std::map<Method, PerMethod> per;
  for (Method m : opts.methods) {
    MethodScores ms;
    ms.method = m;
    rep.methods.push_back(ms);
  }
  auto scores_for = [&](Method m) -> MethodScores& {
    return *std::find_if(rep.methods.begin(), rep.methods.end(), [&](const MethodScores& s) { return s.method == m; });
  };
  auto strip_opinion = [&](Method m, std::span<const std::string> toks) {
    const bool ss_like = m != Method::HN;
    return strip_function_words(toks, ss_like && opts.strip_determiners, ss_like && opts.strip_copula);
  };

  for (std::size_t s = 0; s < preds.size(); ++s) {
    const GoldRecord& g = gold[s];
    if (g.triplets.empty()) {
      ++rep.skipped_sentences;
      continue;
    }
    ++rep.sentences;
    const SentencePrediction& p = preds[s];
    if (!p.error.empty()) rep.warnings.push_back("sentence " + std::to_string(s + 1) + " has no prediction: " + p.error);
    const auto& toks = g.tokens;
    const auto gtargets = detail::group_gold_targets(g);
    rep.gold_targets += gtargets.size();
    rep.predicted_targets += p.targets.size();
    rep.gold_triplets += g.triplets.size();

    // Greedy one-to-one target pairing.
    std::vector<int> gold_of(p.targets.size(), -1);
    std::vector<char> taken(gtargets.size(), 0);
    for (std::size_t i = 0; i < p.targets.size(); ++i) {
      const auto ptoks = detail::pick(toks, p.targets[i].indices);
      for (std::size_t j = 0; j < gtargets.size(); ++j) {
        if (taken[j]) continue;
        if (span_match(ptoks, detail::pick(toks, gtargets[j].indices))) {
          taken[j] = 1;
          gold_of[i] = static_cast<int>(j);
          break;
        }
      }
    }

    for (std::size_t i = 0; i < p.targets.size(); ++i) {
      if (gold_of[i] < 0) continue;
      const auto& pt = p.targets[i];
      const auto& gt = gtargets[static_cast<std::size_t>(gold_of[i])];
      ++rep.matched_targets;
      const auto ptoks = detail::pick(toks, pt.indices);
      const auto gtoks = detail::pick(toks, gt.indices);
      target_gleus.push_back(gleu(strip_function_words(ptoks, opts.strip_determiners, false),
                                  strip_function_words(gtoks, opts.strip_determiners, false), opts.gleu_max_n)
                                 .value);
      if (std::any_of(gt.triplets.begin(), gt.triplets.end(),
                      [&](const GoldTriplet* t) { return t->sentiment == pt.sentiment; }))
        ++rep.sentiment_correct;
      double best_sentence = 0.0;
      for (const GoldTriplet* t : gt.triplets)
        best_sentence = std::max(best_sentence, gleu(toks, detail::pick(toks, t->opinion), opts.gleu_max_n).value);
      sentence_gleus.push_back(best_sentence);

      for (Method m : opts.methods) {
        auto& ms = scores_for(m);
        ++ms.conditioned_total;
        auto it = pt.opinions.find(m);
        if (it == pt.opinions.end()) continue;
        bool ote = false, full = false;
        double best_gleu = 0.0;
        for (const auto& term : detail::opinion_terms(it->second)) {
          const auto otoks = detail::pick(toks, term);
          for (const GoldTriplet* t : gt.triplets) {
            const auto gop = detail::pick(toks, t->opinion);
            if (!span_match(otoks, gop)) continue;
            ote = true;
            full = full || t->sentiment == pt.sentiment;
          }
        }
        if (ote) {
          const auto cand = strip_opinion(m, detail::pick(toks, it->second.indices));
          for (const GoldTriplet* t : gt.triplets) {
            const auto ref = strip_opinion(m, detail::pick(toks, t->opinion));
            best_gleu = std::max(best_gleu, gleu(cand, ref, opts.gleu_max_n).value);
          }
          per[m].gleus.push_back(best_gleu);
        }
        ms.ote_correct += ote;
        ms.full_correct += full;
      }
    }

    // Corpus-level triplets.
    for (Method m : opts.methods) {
      auto& ms = scores_for(m);
      for (int stage = 0; stage < 2; ++stage) {
        const bool need_sentiment = stage == 1;
        std::vector<std::vector<std::size_t>> adj(p.targets.size());
        std::vector<char> gold_hit(g.triplets.size(), 0);
        for (std::size_t i = 0; i < p.targets.size(); ++i) {
          const auto& pt = p.targets[i];
          auto it = pt.opinions.find(m);
          if (it == pt.opinions.end()) continue;
          const auto ptoks = detail::pick(toks, pt.indices);
          const auto terms = detail::opinion_terms(it->second);
          for (std::size_t j = 0; j < g.triplets.size(); ++j) {
            const auto& t = g.triplets[j];
            if (need_sentiment && t.sentiment != pt.sentiment) continue;
            if (!span_match(ptoks, detail::pick(toks, t.target))) continue;
            const auto gop = detail::pick(toks, t.opinion);
            if (std::any_of(terms.begin(), terms.end(),
                            [&](const std::vector<int>& term) { return span_match(detail::pick(toks, term), gop); }))
              adj[i].push_back(j);
          }
        }
        const std::size_t matched = detail::max_matching(adj, g.triplets.size());
        Prf& prf = need_sentiment ? ms.full_corpus : ms.ote_corpus;
        prf.correct_predicted += matched;
        prf.correct_gold += matched;
        prf.predicted += p.targets.size();
        prf.gold += g.triplets.size();
      }
    }
  }

  rep.target_precision = safe_ratio(rep.matched_targets, rep.predicted_targets);
  rep.target_recall = safe_ratio(rep.matched_targets, rep.gold_targets);
  rep.target_gleu = mean_sd(target_gleus);
  rep.full_sentence_gleu = mean_sd(sentence_gleus);
  rep.sentiment_accuracy = safe_ratio(rep.sentiment_correct, rep.matched_targets);
  if (rep.sentences == 0) rep.warnings.push_back("dataset has no sentences with gold triplets; all scores are 0");
  if (rep.predicted_targets == 0) rep.warnings.push_back("no predicted targets; precision reported as 0");
  if (rep.matched_targets == 0) rep.warnings.push_back("no matched targets; sentiment accuracy reported as 0");
  for (auto& ms : rep.methods) {
    ms.ote_f1 = safe_ratio(ms.ote_correct, ms.conditioned_total);
    ms.full_f1 = safe_ratio(ms.full_correct, ms.conditioned_total);
    for (Prf* prf : {&ms.ote_corpus, &ms.full_corpus}) {
      prf->precision = safe_ratio(prf->correct_predicted, prf->predicted);
      prf->recall = safe_ratio(prf->correct_gold, prf->gold);
      prf->f1 = f1_of(prf->precision, prf->recall);
    }
    ms.opinion_gleu = mean_sd(per[ms.method].gleus);
  }
  return rep;
}

/// Ordering properties every report must satisfy; returns the violations.
inline std::vector<std::string> check_report_invariants(const EvalReport& r) {
  std::vector<std::string> bad;
  for (const auto& ms : r.methods) {
    const std::string name(to_string(ms.method));
    if (ms.full_f1 > ms.ote_f1) bad.push_back(name + "-3 F1 exceeds " + name + " F1");
    if (ms.full_corpus.f1 > ms.ote_corpus.f1) bad.push_back(name + " corpus triplet F1 exceeds opinion F1");
  }
  const auto* hn = r.find(Method::HN);
  const auto* ss = r.find(Method::SS);
  const auto* un = r.find(Method::Union);
  if (hn && ss && un) {
    if (un->ote_f1 < std::max(hn->ote_f1, ss->ote_f1)) bad.push_back("UNION recall below max(HN, SS)");
    if (un->full_f1 < std::max(hn->full_f1, ss->full_f1)) bad.push_back("UNION-3 recall below max(HN-3, SS-3)");
    if (un->full_corpus.recall < std::max(hn->full_corpus.recall, ss->full_corpus.recall))
      bad.push_back("UNION triplet recall below max(HN, SS)");
  }
  auto rate = [&](double v, const char* what) {
    if (v < 0.0 || v > 1.0) bad.push_back(std::string(what) + " outside [0, 1]");
  };
  rate(r.target_precision, "target precision");
  rate(r.target_recall, "target recall");
  rate(r.sentiment_accuracy, "sentiment accuracy");
  return bad;
}

// ---------------------------------------------------------------------------
// Rendering

/// Which table families a report shows: conditioned on correctly extracted
/// targets, corpus level, or both.
enum class Conditioning { Both, Conditioned, Corpus };

struct RenderedReport {
  std::string text;
  std::string records;  // one JSON object per line
};

namespace detail {

inline std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.insert(0, w - s.size(), ' ');
  return s;
}

inline std::string pad_right(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

}  // namespace detail

/// Text tables (targets, sentiment accuracy, opinion F1, opinion GLEU,
/// triplet P/R) with one column group per dataset, plus machine records.
inline RenderedReport render_report(std::span<const EvalReport> reports, Conditioning cond = Conditioning::Both) {
  using detail::fixed3;
  using detail::pad;
  using detail::pad_right;
  RenderedReport out;
  std::ostringstream t;
  std::ostringstream rec;
  constexpr std::size_t kLabel = 12;
  constexpr std::size_t kCol = 9;

  auto header = [&](const std::vector<std::string>& cols) {
    t << pad_right("", kLabel);
    for (const auto& c : cols) t << pad(c, kCol);
    t << '\n';
  };

  t << "Targets\n";
  header({"dataset", "targets", "P", "R", "GLEU", "sd"});
  for (const auto& r : reports)
    t << pad_right("", kLabel) << pad(r.dataset, kCol) << pad(std::to_string(r.gold_targets), kCol)
      << pad(fixed3(r.target_precision), kCol) << pad(fixed3(r.target_recall), kCol)
      << pad(fixed3(r.target_gleu.mean), kCol) << pad(fixed3(r.target_gleu.sd), kCol) << '\n';

  t << "\nSentiment accuracy\n";
  header({"dataset", "matched", "acc"});
  for (const auto& r : reports)
    t << pad_right("", kLabel) << pad(r.dataset, kCol) << pad(std::to_string(r.matched_targets), kCol)
      << pad(fixed3(r.sentiment_accuracy), kCol) << '\n';

  std::vector<std::string> names;
  for (const auto& r : reports) names.push_back(r.dataset);
  std::vector<Method> methods;
  if (!reports.empty())
    for (const auto& ms : reports.front().methods) methods.push_back(ms.method);

  const bool show_cond = cond != Conditioning::Corpus;
  const bool show_corpus = cond != Conditioning::Conditioned;

  if (show_cond) t << "\nOpinion F1 among matched targets\n";
  if (show_cond) header(names);
  for (int stage = 0; stage < 2 && show_cond; ++stage)
    for (Method m : methods) {
      std::string label(to_string(m));
      if (stage == 1) label += "-3";
      t << pad_right(label, kLabel);
      for (const auto& r : reports) {
        const auto* ms = r.find(m);
        t << pad(fixed3(ms ? (stage ? ms->full_f1 : ms->ote_f1) : 0.0), kCol);
      }
      t << '\n';
    }

  t << "\nOpinion GLEU (mean / sd)\n";
  {
    std::vector<std::string> cols;
    for (const auto& n : names) {
      cols.push_back(n);
      cols.push_back("sd");
    }
    header(cols);
  }
  t << pad_right("Full Sent", kLabel);
  for (const auto& r : reports) t << pad(fixed3(r.full_sentence_gleu.mean), kCol) << pad(fixed3(r.full_sentence_gleu.sd), kCol);
  t << '\n';
  for (Method m : methods) {
    t << pad_right(std::string(to_string(m)), kLabel);
    for (const auto& r : reports) {
      const auto* ms = r.find(m);
      t << pad(fixed3(ms ? ms->opinion_gleu.mean : 0.0), kCol) << pad(fixed3(ms ? ms->opinion_gleu.sd : 0.0), kCol);
    }
    t << '\n';
  }

  if (show_corpus) {
    t << "\nTriplets (corpus level)\n";
    {
      std::vector<std::string> cols;
      for (const auto& n : names) {
        cols.push_back(n + " P");
        cols.push_back("R");
      }
      header(cols);
    }
    for (Method m : methods) {
      t << pad_right("TASTE " + std::string(to_string(m)), kLabel);
      for (const auto& r : reports) {
        const auto* ms = r.find(m);
        t << pad(fixed3(ms ? ms->full_corpus.precision : 0.0), kCol) << pad(fixed3(ms ? ms->full_corpus.recall : 0.0), kCol);
      }
      t << '\n';
    }
  }
  if (show_cond && std::find(methods.begin(), methods.end(), Method::SS) != methods.end()) {
    t << "\nTriplets given correct targets\n";
    t << pad_right("TASTE* SS", kLabel);
    for (const auto& r : reports) {
      const auto* ss = r.find(Method::SS);
      const double v = ss ? ss->full_f1 : 0.0;
      t << pad(fixed3(v), kCol) << pad(fixed3(v), kCol);
    }
    t << '\n';
  }

  for (const auto& r : reports) {
    const auto bad = check_report_invariants(r);
    t << "\n[" << r.dataset << "] invariants: " << (bad.empty() ? "ok" : "VIOLATED") << '\n';
    for (const auto& b : bad) t << "  violation: " << b << '\n';
    for (const auto& w : r.warnings) t << "  warning: " << w << '\n';
  }

  auto emit = [&](nlohmann::json j) { rec << j.dump() << '\n'; };
  for (const auto& r : reports) {
    emit({{"table", "targets"},
          {"dataset", r.dataset},
          {"sentences", r.sentences},
          {"gold_targets", r.gold_targets},
          {"predicted_targets", r.predicted_targets},
          {"matched_targets", r.matched_targets},
          {"precision", r.target_precision},
          {"recall", r.target_recall},
          {"avg_gleu", r.target_gleu.mean},
          {"gleu_sd", r.target_gleu.sd}});
    emit({{"table", "sentiment"},
          {"dataset", r.dataset},
          {"matched_targets", r.matched_targets},
          {"correct", r.sentiment_correct},
          {"accuracy", r.sentiment_accuracy}});
    emit({{"table", "opinion_gleu"},
          {"dataset", r.dataset},
          {"method", "FULL_SENT"},
          {"avg_gleu", r.full_sentence_gleu.mean},
          {"gleu_sd", r.full_sentence_gleu.sd},
          {"count", r.full_sentence_gleu.count}});
    for (const auto& ms : r.methods) {
      const std::string m(to_string(ms.method));
      emit({{"table", "opinion_f1"},
            {"dataset", r.dataset},
            {"method", m},
            {"conditioned_targets", ms.conditioned_total},
            {"ote_correct", ms.ote_correct},
            {"ote_f1", ms.ote_f1},
            {"triplet_correct", ms.full_correct},
            {"triplet_f1", ms.full_f1}});
      emit({{"table", "opinion_gleu"},
            {"dataset", r.dataset},
            {"method", m},
            {"avg_gleu", ms.opinion_gleu.mean},
            {"gleu_sd", ms.opinion_gleu.sd},
            {"count", ms.opinion_gleu.count}});
      emit({{"table", "triplets"},
            {"dataset", r.dataset},
            {"method", m},
            {"precision", ms.full_corpus.precision},
            {"recall", ms.full_corpus.recall},
            {"f1", ms.full_corpus.f1},
            {"correct", ms.full_corpus.correct_predicted},
            {"predicted", ms.full_corpus.predicted},
            {"gold", ms.full_corpus.gold},
            {"opinion_precision", ms.ote_corpus.precision},
            {"opinion_recall", ms.ote_corpus.recall}});
    }
    emit({{"table", "checks"},
          {"dataset", r.dataset},
          {"violations", check_report_invariants(r)},
          {"warnings", r.warnings}});
  }

  out.text = t.str();
  out.records = rec.str();
  return out;
}

inline RenderedReport render_report(const EvalReport& report, Conditioning cond = Conditioning::Both) {
  return render_report(std::span(&report, 1), cond);
}

}  // namespace taste

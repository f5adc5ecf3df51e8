#pragma once

// Declarative run configuration: one JSON document, optionally patched by
// `section.key=value` overrides from the command line.

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "taste/dtlstm.hpp"
#include "taste/error.hpp"
#include "taste/eval.hpp"
#include "taste/extraction.hpp"

namespace taste {

struct Config {
  std::uint64_t seed = 0;

  struct Paths {
    std::string embeddings;
    std::string sst_dir;  // holds train/ and dev/ in the toks/parents/labels layout
    std::string parses;
    std::string gold;
    std::string checkpoint;
    std::string predictions;
    std::string report;  // text report; records go to <report>.jsonl
    std::string curve;
  } paths;

  struct Model {
    std::size_t hidden_dim = 150;
    std::size_t embed_dim = 300;
    CandidateActivation candidate_activation = CandidateActivation::Tanh;
    bool fine_tune_embeddings = false;
  } model;

  TrainConfig training;

  struct Extraction {
    std::vector<Method> methods = {Method::HN, Method::SS, Method::Union};
    ExtractionOptions options;
    bool embed_log_probs = false;
  } extraction;

  struct Evaluation {
    std::string dataset = "dataset";
    bool strip_determiners = true;
    bool strip_copula = true;
    Conditioning conditioning = Conditioning::Both;
  } evaluation;
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known, const std::string& where) {
  if (!obj.is_object()) config_fail(where + " must be an object");
  for (const auto& [k, v] : obj.items()) {
    bool ok = false;
    for (const char* name : known) ok = ok || k == name;
    if (!ok) config_fail("unknown key '" + (where.empty() ? k : where + "." + k) + "'");
  }
}

template <class T>
void read(const nlohmann::json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    config_fail("bad value for '" + where + "." + key + "'");
  }
}

}  // namespace detail

inline Config config_from_json(const nlohmann::json& j) {
  using detail::read;
  detail::reject_unknown(j, {"seed", "paths", "model", "training", "extraction", "evaluation"}, "");
  Config c;
  if (!j.contains("seed") || !j["seed"].is_number_integer()) detail::config_fail("'seed' is mandatory and must be an integer");
  c.seed = j["seed"].get<std::uint64_t>();

  if (j.contains("paths")) {
    const auto& p = j["paths"];
    detail::reject_unknown(p, {"embeddings", "sst_dir", "parses", "gold", "checkpoint", "predictions", "report", "curve"},
                           "paths");
    read(p, "embeddings", c.paths.embeddings, "paths");
    read(p, "sst_dir", c.paths.sst_dir, "paths");
    read(p, "parses", c.paths.parses, "paths");
    read(p, "gold", c.paths.gold, "paths");
    read(p, "checkpoint", c.paths.checkpoint, "paths");
    read(p, "predictions", c.paths.predictions, "paths");
    read(p, "report", c.paths.report, "paths");
    read(p, "curve", c.paths.curve, "paths");
  }
  if (j.contains("model")) {
    const auto& m = j["model"];
    detail::reject_unknown(m, {"hidden_dim", "embed_dim", "candidate_activation", "fine_tune_embeddings"}, "model");
    read(m, "hidden_dim", c.model.hidden_dim, "model");
    read(m, "embed_dim", c.model.embed_dim, "model");
    std::string act = "tanh";
    read(m, "candidate_activation", act, "model");
    if (act == "tanh") c.model.candidate_activation = CandidateActivation::Tanh;
    else if (act == "sigmoid") c.model.candidate_activation = CandidateActivation::Sigmoid;
    else detail::config_fail("model.candidate_activation must be 'tanh' or 'sigmoid'");
    read(m, "fine_tune_embeddings", c.model.fine_tune_embeddings, "model");
  }
  if (j.contains("training")) {
    const auto& t = j["training"];
    detail::reject_unknown(t, {"epochs", "lr", "eps", "batch_size", "l2", "dropout", "supervise_interior"}, "training");
    read(t, "epochs", c.training.epochs, "training");
    read(t, "lr", c.training.lr, "training");
    read(t, "eps", c.training.eps, "training");
    read(t, "batch_size", c.training.batch_size, "training");
    read(t, "l2", c.training.l2, "training");
    read(t, "dropout", c.training.dropout, "training");
    read(t, "supervise_interior", c.training.supervise_interior, "training");
  }
  c.training.seed = c.seed;
  if (j.contains("extraction")) {
    const auto& e = j["extraction"];
    detail::reject_unknown(e, {"methods", "exclude_target", "verb_rule", "orphan_chunks", "embed_log_probs"}, "extraction");
    if (e.contains("methods")) {
      c.extraction.methods.clear();
      if (!e["methods"].is_array()) detail::config_fail("extraction.methods must be a list");
      for (const auto& m : e["methods"]) {
        auto parsed = m.is_string() ? parse_method(m.get<std::string>()) : std::nullopt;
        if (!parsed) detail::config_fail("unknown method tag " + m.dump() + " (expected HN, SS or UNION)");
        c.extraction.methods.push_back(*parsed);
      }
      if (c.extraction.methods.empty()) detail::config_fail("extraction.methods is empty");
    }
    read(e, "exclude_target", c.extraction.options.exclude_target, "extraction");
    std::string rule = "pos";
    read(e, "verb_rule", rule, "extraction");
    if (rule == "pos") c.extraction.options.verb_rule = VerbRule::Pos;
    else if (rule == "pos_or_aux_relation") c.extraction.options.verb_rule = VerbRule::PosOrAuxRel;
    else detail::config_fail("extraction.verb_rule must be 'pos' or 'pos_or_aux_relation'");
    read(e, "orphan_chunks", c.extraction.options.orphan_chunks_as_targets, "extraction");
    read(e, "embed_log_probs", c.extraction.embed_log_probs, "extraction");
  }
  if (j.contains("evaluation")) {
    const auto& v = j["evaluation"];
    detail::reject_unknown(v, {"dataset", "strip_determiners", "strip_copula", "conditioning"}, "evaluation");
    read(v, "dataset", c.evaluation.dataset, "evaluation");
    read(v, "strip_determiners", c.evaluation.strip_determiners, "evaluation");
    read(v, "strip_copula", c.evaluation.strip_copula, "evaluation");
    std::string cond = "both";
    read(v, "conditioning", cond, "evaluation");
    if (cond == "both") c.evaluation.conditioning = Conditioning::Both;
    else if (cond == "conditioned") c.evaluation.conditioning = Conditioning::Conditioned;
    else if (cond == "corpus") c.evaluation.conditioning = Conditioning::Corpus;
    else detail::config_fail("evaluation.conditioning must be 'both', 'conditioned' or 'corpus'");
  }

  if (c.model.hidden_dim == 0 || c.model.embed_dim == 0) detail::config_fail("model dimensions must be positive");
  if (c.model.fine_tune_embeddings) detail::config_fail("model.fine_tune_embeddings is not supported; embeddings stay frozen");
  if (c.training.epochs < 0) detail::config_fail("training.epochs must be >= 0");
  if (!(c.training.lr > 0.0)) detail::config_fail("training.lr must be positive");
  if (c.training.eps < 0.0) detail::config_fail("training.eps must be >= 0");
  if (c.training.batch_size == 0) detail::config_fail("training.batch_size must be positive");
  if (c.training.l2 < 0.0) detail::config_fail("training.l2 must be >= 0");
  if (c.training.dropout < 0.0 || c.training.dropout >= 1.0) detail::config_fail("training.dropout must lie in [0, 1)");
  return c;
}

/// Applies `a.b=value`; the value is parsed as JSON when possible, else taken as a string.
inline void apply_override(nlohmann::json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) detail::config_fail("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    value = raw;
  }
  nlohmann::json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) detail::config_fail("override key '" + key + "' is malformed");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    if (!node->contains(part)) (*node)[part] = nlohmann::json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

inline nlohmann::json read_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) detail::config_fail("cannot open config '" + path + "'");
  try {
    return nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    detail::config_fail("config '" + path + "' is not valid JSON: " + e.what());
  }
}

inline Config load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  auto j = read_config_json(path);
  for (const auto& o : overrides) apply_override(j, o);
  return config_from_json(j);
}

inline EvalOptions eval_options(const Config& c) {
  EvalOptions o;
  o.dataset = c.evaluation.dataset;
  o.methods = c.extraction.methods;
  o.strip_determiners = c.evaluation.strip_determiners;
  o.strip_copula = c.evaluation.strip_copula;
  return o;
}

}  // namespace taste

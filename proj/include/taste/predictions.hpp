#pragma once

// Line-delimited prediction records, one JSON object per sentence:
//
//   {"sentence": 1, "tokens": [...],
//    "targets": [{"span": [s, e], "head": h, "parent": p | null,
//                 "sentiment": "positive",
//                 "opinions": {"HN": {"indices": [...]}, "SS": {...},
//                              "UNION": {"indices": [...], "alternatives": [[...], [...]]}}}],
//    "triplets": {"SS": [{"target": "the food", "sentiment": "positive", "opinion": "is good"}]},
//    "log_probs": [[neg, neu, pos], ...],      (optional, one row per token)
//    "error": "..."}                           (only for sentences that failed)

#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "taste/dtlstm.hpp"
#include "taste/error.hpp"
#include "taste/eval.hpp"
#include "taste/text.hpp"

namespace taste {

inline nlohmann::json prediction_to_json(const SentencePrediction& sp, std::size_t ordinal,
                                         std::span<const NodePrediction> log_probs = {}) {
  using nlohmann::json;
  json j;
  j["sentence"] = ordinal;
  j["tokens"] = sp.tokens;
  json targets = json::array();
  json triplets = json::object();
  auto words = [&](const std::vector<int>& idx) {
    std::vector<std::string> w;
    for (int i : idx) w.push_back(sp.tokens.at(static_cast<std::size_t>(i)));
    return text::join(w, " ");
  };
  for (const auto& t : sp.targets) {
    json jt;
    jt["span"] = {t.indices.empty() ? 0 : t.indices.front(), t.indices.empty() ? 0 : t.indices.back() + 1};
    jt["parent"] = t.parent_verb ? json(*t.parent_verb) : json(nullptr);
    jt["sentiment"] = to_string(t.sentiment);
    json ops = json::object();
    for (const auto& [m, op] : t.opinions) {
      json jo{{"indices", op.indices}};
      if (!op.alternatives.empty()) jo["alternatives"] = op.alternatives;
      ops[std::string(to_string(m))] = jo;
      triplets[std::string(to_string(m))].push_back(
          {{"target", words(t.indices)}, {"sentiment", to_string(t.sentiment)}, {"opinion", words(op.indices)}});
    }
    jt["opinions"] = ops;
    targets.push_back(jt);
  }
  j["targets"] = targets;
  j["triplets"] = triplets;
  if (!log_probs.empty()) {
    json rows = json::array();
    for (const auto& p : log_probs) rows.push_back(p.log_probs);
    j["log_probs"] = rows;
  }
  if (!sp.error.empty()) j["error"] = sp.error;
  return j;
}

inline SentencePrediction prediction_from_json(const nlohmann::json& j) {
  SentencePrediction sp;
  sp.tokens = j.at("tokens").get<std::vector<std::string>>();
  sp.error = j.value("error", std::string());
  const auto n = static_cast<int>(sp.tokens.size());
  auto check = [&](const std::vector<int>& idx) {
    for (int i : idx)
      if (i < 0 || i >= n) throw Error(ErrorKind::Range, "token index " + std::to_string(i) + " out of range");
    return idx;
  };
  for (const auto& jt : j.value("targets", nlohmann::json::array())) {
    PredictedTarget t;
    const auto span = jt.at("span").get<std::vector<int>>();
    if (span.size() != 2 || span[0] < 0 || span[1] > n || span[0] >= span[1])
      throw Error(ErrorKind::Range, "bad target span");
    for (int i = span[0]; i < span[1]; ++i) t.indices.push_back(i);
    if (jt.contains("parent") && !jt["parent"].is_null()) t.parent_verb = jt["parent"].get<int>();
    auto s = parse_sentiment(jt.at("sentiment").get<std::string>());
    if (!s) throw Error(ErrorKind::Format, "unknown sentiment in prediction record");
    t.sentiment = *s;
    const auto opinions = jt.value("opinions", nlohmann::json::object());
    for (const auto& [name, jo] : opinions.items()) {
      auto m = parse_method(name);
      if (!m) throw Error(ErrorKind::Config, "unknown method tag '" + name + "'");
      PredictedOpinion op;
      op.indices = check(jo.at("indices").get<std::vector<int>>());
      if (jo.contains("alternatives"))
        for (const auto& alt : jo["alternatives"]) op.alternatives.push_back(check(alt.get<std::vector<int>>()));
      t.opinions[*m] = std::move(op);
    }
    sp.targets.push_back(std::move(t));
  }
  return sp;
}

inline std::vector<SentencePrediction> read_predictions(const std::string& path) {
  const auto lines = text::read_lines(path);
  std::vector<SentencePrediction> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    try {
      out.push_back(prediction_from_json(nlohmann::json::parse(lines[i])));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Format, path + " line " + std::to_string(i + 1) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), path + " line " + std::to_string(i + 1) + ": " + e.detail());
    }
  }
  return out;
}

}  // namespace taste

#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace taste;
using nlohmann::json;

namespace {

ErrorKind kind_of(const json& j) {
  try {
    config_from_json(j);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;  // sentinel: no error
}

bool rejected(const json& j) { return kind_of(j) == ErrorKind::Config; }

}  // namespace

TEST_CASE("defaults", "[config]") {
  const auto c = config_from_json(json{{"seed", 3}});
  CHECK(c.seed == 3);
  CHECK(c.training.seed == 3);
  CHECK(c.model.hidden_dim == 150);
  CHECK(c.model.embed_dim == 300);
  CHECK(c.model.candidate_activation == CandidateActivation::Tanh);
  CHECK(c.training.lr == 0.05);
  CHECK(c.training.batch_size == 25);
  CHECK(c.training.l2 == 1e-4);
  CHECK(c.extraction.methods == std::vector<Method>{Method::HN, Method::SS, Method::Union});
  CHECK(c.extraction.options.exclude_target);
  CHECK_FALSE(c.extraction.options.orphan_chunks_as_targets);
  CHECK(c.extraction.options.verb_rule == VerbRule::Pos);
  CHECK(c.evaluation.conditioning == Conditioning::Both);
}

TEST_CASE("seed is mandatory", "[config]") {
  CHECK(rejected(json::object()));
  CHECK(rejected(json{{"seed", "7"}}));
  CHECK(rejected(json{{"seed", 1.5}}));
}

TEST_CASE("unknown keys are rejected", "[config]") {
  CHECK(rejected(json{{"seed", 1}, {"sed", 1}}));
  CHECK(rejected(json{{"seed", 1}, {"training", {{"epoch", 3}}}}));
  CHECK(rejected(json{{"seed", 1}, {"model", {{"hidden", 3}}}}));
  try {
    config_from_json(json{{"seed", 1}, {"paths", {{"embedding", "x"}}}});
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK_THAT(e.detail(), Catch::Matchers::ContainsSubstring("paths.embedding"));
  }
}

TEST_CASE("enumerations and ranges are validated", "[config]") {
  CHECK(rejected(json{{"seed", 1}, {"model", {{"candidate_activation", "relu"}}}}));
  CHECK(rejected(json{{"seed", 1}, {"extraction", {{"methods", {"HN", "XX"}}}}}));
  CHECK(rejected(json{{"seed", 1}, {"extraction", {{"methods", json::array()}}}}));
  CHECK(rejected(json{{"seed", 1}, {"extraction", {{"verb_rule", "deprel"}}}}));
  CHECK(rejected(json{{"seed", 1}, {"evaluation", {{"conditioning", "some"}}}}));
  CHECK(rejected(json{{"seed", 1}, {"training", {{"lr", 0}}}}));
  CHECK(rejected(json{{"seed", 1}, {"training", {{"epochs", -1}}}}));
  CHECK(rejected(json{{"seed", 1}, {"training", {{"dropout", 1.0}}}}));
  CHECK(rejected(json{{"seed", 1}, {"training", {{"batch_size", 0}}}}));
  CHECK(rejected(json{{"seed", 1}, {"model", {{"hidden_dim", 0}}}}));
  CHECK(rejected(json{{"seed", 1}, {"model", {{"hidden_dim", "big"}}}}));

  const auto c = config_from_json(json{{"seed", 1},
                                       {"model", {{"candidate_activation", "sigmoid"}}},
                                       {"extraction",
                                        {{"methods", {"SS"}},
                                         {"verb_rule", "pos_or_aux_relation"},
                                         {"orphan_chunks", true},
                                         {"exclude_target", false}}},
                                       {"evaluation", {{"conditioning", "corpus"}}}});
  CHECK(c.model.candidate_activation == CandidateActivation::Sigmoid);
  CHECK(c.extraction.methods == std::vector<Method>{Method::SS});
  CHECK(c.extraction.options.verb_rule == VerbRule::PosOrAuxRel);
  CHECK(c.extraction.options.orphan_chunks_as_targets);
  CHECK_FALSE(c.extraction.options.exclude_target);
  CHECK(c.evaluation.conditioning == Conditioning::Corpus);
}

TEST_CASE("embedding fine-tuning is refused", "[config]") {
  CHECK(rejected(json{{"seed", 1}, {"model", {{"fine_tune_embeddings", true}}}}));
  CHECK_FALSE(rejected(json{{"seed", 1}, {"model", {{"fine_tune_embeddings", false}}}}));
}

TEST_CASE("overrides patch nested keys", "[config]") {
  json j{{"seed", 1}, {"training", {{"epochs", 5}}}};
  apply_override(j, "training.epochs=2");
  apply_override(j, "paths.gold=data/gold.txt");
  apply_override(j, "extraction.methods=[\"HN\"]");
  apply_override(j, "seed=9");
  const auto c = config_from_json(j);
  CHECK(c.training.epochs == 2);
  CHECK(c.paths.gold == "data/gold.txt");
  CHECK(c.extraction.methods == std::vector<Method>{Method::HN});
  CHECK(c.seed == 9);
  CHECK(c.training.seed == 9);

  CHECK_THROWS_AS(apply_override(j, "training.epochs"), Error);
  CHECK_THROWS_AS(apply_override(j, "=3"), Error);
  CHECK_THROWS_AS(apply_override(j, "training..epochs=3"), Error);
}

TEST_CASE("config files allow comments", "[config]") {
  const auto path = std::filesystem::temp_directory_path() / "taste_config_test.json";
  {
    std::ofstream out(path);
    out << "{\n  // run seed\n  \"seed\": 11,\n  \"training\": {\"epochs\": 4}\n}\n";
  }
  const auto c = load_config(path.string(), {"training.epochs=1"});
  CHECK(c.seed == 11);
  CHECK(c.training.epochs == 1);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config(path.string()), Error);
}

TEST_CASE("the shipped example config loads", "[config]") {
  const auto c = load_config(testing::fixture("../../configs/example.json"));
  CHECK(c.seed == 1);
  CHECK(c.evaluation.dataset == "14res");
  CHECK(c.extraction.methods.size() == 3);
}

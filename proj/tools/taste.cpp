// taste: train the sentiment Tree-LSTM, extract triplets, score them.
//
//   taste [--config FILE] [--set key=value ...] train|extract|evaluate
//
// The config path falls back to $TASTE_CONFIG. Exit codes: 0 ok, 1 other,
// 2 config, 3 model, 4 data alignment.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>
#include <unordered_set>

#include <CLI11.hpp>

#include "taste/taste.hpp"

namespace fs = std::filesystem;
using namespace taste;

namespace {

enum Exit { kOk = 0, kOther = 1, kConfigExit = 2, kModelExit = 3, kAlignExit = 4 };

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config: return kConfigExit;
    case ErrorKind::Model:
    case ErrorKind::Dimension:
    case ErrorKind::Corruption: return kModelExit;
    case ErrorKind::Alignment: return kAlignExit;
    default: return kOther;
  }
}

const std::string& require_set(const std::string& value, const char* key) {
  if (value.empty()) throw Error(ErrorKind::Config, std::string(key) + " is not set");
  return value;
}

const std::string& require_file(const std::string& value, const char* key) {
  require_set(value, key);
  if (!fs::is_regular_file(value))
    throw Error(ErrorKind::Config, std::string(key) + ": no such file '" + value + "'");
  return value;
}

const std::string& require_dir(const std::string& value, const char* key) {
  require_set(value, key);
  if (!fs::is_directory(value)) throw Error(ErrorKind::Config, std::string(key) + ": no such directory '" + value + "'");
  return value;
}

// Output paths only need an existing parent directory.
const std::string& require_output(const std::string& value, const char* key) {
  require_set(value, key);
  const auto parent = fs::path(value).parent_path();
  if (!parent.empty() && !fs::is_directory(parent))
    throw Error(ErrorKind::Config, std::string(key) + ": directory '" + parent.string() + "' does not exist");
  return value;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  return out;
}

int cmd_train(const Config& cfg) {
  const auto& emb_path = require_file(cfg.paths.embeddings, "paths.embeddings");
  const auto& sst = require_dir(cfg.paths.sst_dir, "paths.sst_dir");
  require_dir((fs::path(sst) / "train").string(), "paths.sst_dir/train");
  require_dir((fs::path(sst) / "dev").string(), "paths.sst_dir/dev");
  const auto& ckpt = require_output(cfg.paths.checkpoint, "paths.checkpoint");
  const auto& curve_path = require_output(cfg.paths.curve, "paths.curve");

  const auto train_set = read_sst((fs::path(sst) / "train").string());
  const auto dev_set = read_sst((fs::path(sst) / "dev").string());
  std::cerr << "train: " << train_set.size() << " sentences, dev: " << dev_set.size() << '\n';

  std::unordered_set<std::string> vocab;
  for (const auto* set : {&train_set, &dev_set})
    for (const auto& ex : *set) vocab.insert(ex.tokens.begin(), ex.tokens.end());
  const auto emb = load_embeddings(emb_path, cfg.model.embed_dim, &vocab);
  std::cerr << "embeddings: " << emb.size() << " of " << vocab.size() << " word types covered, " << emb.skipped()
            << " malformed lines skipped\n";

  if (cfg.training.epochs == 0) std::cerr << "warning: epochs = 0, writing the initial parameters\n";
  auto params = ModelParams::initialized(cfg.model.hidden_dim, cfg.model.embed_dim, cfg.seed,
                                         cfg.model.candidate_activation);
  auto result = train(std::move(params), train_set, dev_set, emb, cfg.training, [](const EpochRecord& r) {
    std::cerr << "epoch " << r.epoch << "  loss " << r.train_loss << "  dev acc " << r.dev_accuracy << '\n';
  });
  const auto& rep = result.report;
  if (rep.dev_overlap > 0) std::cerr << "warning: " << rep.dev_overlap << " dev sentences also occur in train\n";

  save_checkpoint(result.params, ckpt, emb.content_hash());
  auto curve = open_out(curve_path);
  curve << "epoch\ttrain_loss\tdev_accuracy\n";
  for (const auto& r : rep.curve) curve << r.epoch << '\t' << r.train_loss << '\t' << r.dev_accuracy << '\n';
  if (!curve) throw Error(ErrorKind::Io, "short write to '" + curve_path + "'");

  std::cerr << "best epoch " << rep.best_epoch << " (dev acc " << rep.best_dev_accuracy << ", majority baseline "
            << rep.dev_majority_baseline << ") -> " << ckpt << '\n';
  return kOk;
}

int cmd_extract(const Config& cfg) {
  const auto& ckpt_path = require_file(cfg.paths.checkpoint, "paths.checkpoint");
  const auto& parses = require_file(cfg.paths.parses, "paths.parses");
  const auto& emb_path = require_file(cfg.paths.embeddings, "paths.embeddings");
  const auto& out_path = require_output(cfg.paths.predictions, "paths.predictions");

  auto ckpt = load_checkpoint(ckpt_path);
  const ModelParams& params = ckpt.params;
  if (params.embed_dim() != cfg.model.embed_dim || params.hidden_dim() != cfg.model.hidden_dim)
    throw Error(ErrorKind::Model, "checkpoint has hidden " + std::to_string(params.hidden_dim()) + " / embed " +
                                      std::to_string(params.embed_dim()) + ", config asks for hidden " +
                                      std::to_string(cfg.model.hidden_dim) + " / embed " +
                                      std::to_string(cfg.model.embed_dim));

  const auto doc = read_conllu(parses);
  for (const auto& r : doc.rejected)
    std::cerr << "warning: sentence " << r.sentence << " (line " << r.line << ") rejected: " << r.message << '\n';

  auto out = open_out(out_path);
  if (doc.block_count == 0) return kOk;

  std::unordered_set<std::string> vocab;
  for (const auto& t : doc.trees)
    for (const auto& tok : t.tokens()) vocab.insert(tok.surface);
  const auto emb = load_embeddings(emb_path, params.embed_dim(), &vocab);
  if (ckpt.embedding_hash != 0 && ckpt.embedding_hash != emb.content_hash())
    std::cerr << "warning: embeddings differ from the ones the checkpoint was trained with\n";

  // Records are built in parallel and written in input order.
  std::vector<std::string> lines(doc.trees.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < doc.trees.size(); i = next++) {
      const auto& tree = doc.trees[i];
      SentencePrediction sp;
      std::vector<NodePrediction> preds;
      try {
        preds = tree_forward(params, tree, emb).predictions;
        const auto sx = analyze_sentence(tree, preds, cfg.extraction.options);
        sp = to_sentence_prediction(tree, sx, cfg.extraction.methods);
      } catch (const Error& e) {
        sp = SentencePrediction{tree.surfaces(), {}, e.what()};
        preds.clear();
      }
      std::span<const NodePrediction> lp;
      if (cfg.extraction.embed_log_probs) lp = preds;
      lines[i] = prediction_to_json(sp, doc.ordinals[i], lp).dump();
    }
  };
  const unsigned n_threads = std::clamp(std::thread::hardware_concurrency(), 1u, 16u);
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }

  std::size_t tree_pos = 0, rej_pos = 0;
  for (std::size_t ord = 1; ord <= doc.block_count; ++ord) {
    if (tree_pos < doc.ordinals.size() && doc.ordinals[tree_pos] == ord) {
      out << lines[tree_pos++] << '\n';
    } else {
      const auto& r = doc.rejected.at(rej_pos++);
      nlohmann::json j{{"sentence", ord}, {"tokens", nlohmann::json::array()}, {"targets", nlohmann::json::array()},
                       {"triplets", nlohmann::json::object()}, {"error", r.message}};
      out << j.dump() << '\n';
    }
  }
  if (!out) throw Error(ErrorKind::Io, "short write to '" + out_path + "'");
  std::cerr << "extracted " << doc.trees.size() << " sentences -> " << out_path << '\n';
  return kOk;
}

int cmd_evaluate(const Config& cfg) {
  const auto& pred_path = require_file(cfg.paths.predictions, "paths.predictions");
  const auto& gold_path = require_file(cfg.paths.gold, "paths.gold");
  const auto& report_path = require_output(cfg.paths.report, "paths.report");

  const auto preds = read_predictions(pred_path);
  const auto gold = read_triplet_gold(gold_path);
  const auto report = evaluate(preds, gold, eval_options(cfg));
  const auto rendered = render_report(report, cfg.evaluation.conditioning);

  open_out(report_path) << rendered.text;
  open_out(report_path + ".jsonl") << rendered.records;
  std::cout << rendered.text;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Target / sentiment / opinion triplet extraction with a dependency Tree-LSTM"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "JSON config file (default: $TASTE_CONFIG)");
  app.add_option("--set", overrides, "Override a config value, e.g. --set training.epochs=3");
  auto* train_cmd = app.add_subcommand("train", "Train on SST and write the best-dev checkpoint and a curve file");
  auto* extract_cmd = app.add_subcommand("extract", "Run the model over CoNLL-U parses and write prediction records");
  auto* eval_cmd = app.add_subcommand("evaluate", "Score prediction records against triplet gold");
  for (auto* sub : {train_cmd, extract_cmd, eval_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }

  try {
    if (config_path.empty()) {
      if (const char* env = std::getenv("TASTE_CONFIG")) config_path = env;
    }
    if (config_path.empty()) throw Error(ErrorKind::Config, "no config given (use --config or TASTE_CONFIG)");
    const Config cfg = load_config(config_path, overrides);
    if (*train_cmd) return cmd_train(cfg);
    if (*extract_cmd) return cmd_extract(cfg);
    return cmd_evaluate(cfg);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) std::cerr << "config error: " << e.detail() << '\n';
    else std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
}

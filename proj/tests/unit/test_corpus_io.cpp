#include <filesystem>
#include <fstream>
#include <sstream>

#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace taste;
using namespace taste::testing;
namespace fs = std::filesystem;

namespace {

std::string conllu_line(int id, const std::string& form, const std::string& upos, int head, const std::string& rel,
                        const std::string& misc = "_") {
  std::ostringstream s;
  s << id << '\t' << form << '\t' << text::to_lower(form) << '\t' << upos << "\t_\t_\t" << head << '\t' << rel
    << "\t_\t" << misc << '\n';
  return s.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("taste_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string& name, const std::string& body) const {
    const auto p = path / name;
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << body;
    return p.string();
  }
};

}  // namespace

TEST_CASE("two-token block builds the minimal tree", "[conllu]") {
  std::istringstream in(conllu_line(1, "Good", "ADJ", 2, "amod") + conllu_line(2, "food", "NOUN", 0, "ROOT") + "\n");
  const auto doc = read_conllu(in);
  REQUIRE(doc.trees.size() == 1);
  const auto& t = doc.trees[0];
  CHECK(t.root() == 1);
  CHECK(t.token(t.root()).surface == "food");
  CHECK(t.children(1) == std::vector<int>{0});
  CHECK(t.edge_count() == 1);
  CHECK_FALSE(t.chunk_spans().has_value());
}

TEST_CASE("chunk marks become half-open spans", "[conllu]") {
  std::istringstream in(conllu_line(1, "Good", "ADJ", 2, "amod", "Chunk=B") +
                        conllu_line(2, "food", "NOUN", 0, "ROOT", "Chunk=I|SpaceAfter=No") +
                        conllu_line(3, ".", "PUNCT", 2, "punct", "Chunk=O") + "\n");
  const auto doc = read_conllu(in);
  REQUIRE(doc.trees.size() == 1);
  const auto& spans = doc.trees[0].chunk_spans();
  REQUIRE(spans.has_value());
  // IDs 1..2 inclusive in CoNLL terms.
  CHECK(*spans == std::vector<Span>{{0, 2}});
  CHECK(doc.trees[0].token(1).misc == "SpaceAfter=No");
}

TEST_CASE("Chunk=O alone marks a sentence as chunked with no chunks", "[conllu]") {
  std::istringstream in(conllu_line(1, "Run", "VERB", 0, "ROOT", "Chunk=O") + "\n");
  const auto doc = read_conllu(in);
  REQUIRE(doc.trees.size() == 1);
  REQUIRE(doc.trees[0].chunk_spans().has_value());
  CHECK(doc.trees[0].chunk_spans()->empty());
}

TEST_CASE("invalid blocks are rejected individually with positions", "[conllu]") {
  std::string body;
  body += conllu_line(1, "ok", "NOUN", 0, "ROOT") + "\n";
  body += conllu_line(1, "a", "DET", 3, "det") + conllu_line(2, "b", "NOUN", 0, "ROOT") +
          conllu_line(3, "c", "NOUN", 3, "dep") + "\n";
  body += "1\tonly\tthree\n\n";
  body += conllu_line(1, "x", "NOUN", 2, "dep") + conllu_line(2, "y", "NOUN", 1, "dep") + "\n";
  body += conllu_line(1, "fine", "ADJ", 0, "ROOT") + "\n";
  std::istringstream in(body);
  const auto doc = read_conllu(in);
  CHECK(doc.block_count == 5);
  REQUIRE(doc.trees.size() == 2);
  CHECK(doc.ordinals == std::vector<std::size_t>{1, 5});
  REQUIRE(doc.rejected.size() == 3);
  CHECK(doc.rejected[0].sentence == 2);
  CHECK_THAT(doc.rejected[0].message, Catch::Matchers::ContainsSubstring("self-loop at token 3"));
  CHECK(doc.rejected[1].sentence == 3);
  CHECK_THAT(doc.rejected[1].message, Catch::Matchers::ContainsSubstring("line 7"));
  CHECK_THAT(doc.rejected[1].message, Catch::Matchers::ContainsSubstring("10 tab-separated columns"));
  CHECK_THAT(doc.rejected[2].message, Catch::Matchers::ContainsSubstring("no root token"));
}

TEST_CASE("cycles and multiple roots are tree errors", "[conllu]") {
  CHECK_THROWS_WITH(tree_of({{"a", "X", 2, "dep"}, {"b", "X", 3, "dep"}, {"c", "X", 2, "dep"}, {"r", "X", 0, "ROOT"}}),
                    Catch::Matchers::ContainsSubstring("cycle"));
  CHECK_THROWS_WITH(tree_of({{"a", "X", 0, "ROOT"}, {"b", "X", 0, "ROOT"}}),
                    Catch::Matchers::ContainsSubstring("multiple root tokens (1, 2)"));
  try {
    tree_of({{"a", "X", 1, "dep"}});
    FAIL("expected a tree error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Tree);
  }
}

TEST_CASE("Chunk=I without an opening B is rejected", "[conllu]") {
  std::istringstream in(conllu_line(1, "food", "NOUN", 0, "ROOT", "Chunk=I") + "\n");
  const auto doc = read_conllu(in);
  CHECK(doc.trees.empty());
  REQUIRE(doc.rejected.size() == 1);
}

TEST_CASE("multiword ranges and empty nodes are skipped", "[conllu]") {
  std::string body = "# text = don't go\n1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n";
  body += conllu_line(1, "do", "AUX", 3, "aux") + conllu_line(2, "n't", "PART", 3, "advmod");
  body += "2.1\tghost\t_\t_\t_\t_\t_\t_\t_\t_\n";
  body += conllu_line(3, "go", "VERB", 0, "ROOT") + "\n";
  std::istringstream in(body);
  const auto doc = read_conllu(in);
  REQUIRE(doc.trees.size() == 1);
  CHECK(doc.trees[0].size() == 3);
  CHECK(doc.trees[0].comments() == std::vector<std::string>{"# text = don't go"});
}

TEST_CASE("write then read is the identity", "[conllu]") {
  const auto a = tree_of({{"Good", "ADJ", 2, "amod"}, {"food", "NOUN", 0, "ROOT"}, {".", "PUNCT", 2, "punct"}},
                         std::vector<Span>{{0, 2}});
  const auto b = food_sentence();
  std::ostringstream out;
  write_conllu(out, a);
  write_conllu(out, b);
  std::istringstream in(out.str());
  const auto doc = read_conllu(in);
  REQUIRE(doc.trees.size() == 2);
  CHECK(doc.trees[0] == a);
  CHECK(doc.trees[1] == b);
}

TEST_CASE("read_conllu_strict raises on the first bad block", "[conllu]") {
  TempDir dir;
  const auto path = dir.write("bad.conllu", conllu_line(1, "x", "X", 1, "dep") + "\n");
  CHECK_THROWS_AS(read_conllu_strict(path), Error);
}

TEST_CASE("embedding loader skips malformed lines and zero-fills unknown words", "[embeddings]") {
  TempDir dir;
  const auto path = dir.write("emb.txt", "good 0.1 0.2\nbad 0.3\nfood 1 2\nnan nan 1\n. 0.5 -0.5\n\n");
  const auto emb = load_embeddings(path, 2);
  CHECK(emb.dim() == 2);
  CHECK(emb.size() == 3);
  CHECK(emb.skipped() == 2);
  const auto g = emb.lookup("good");
  CHECK(g[0] == 0.1f);
  CHECK(g[1] == 0.2f);
  const auto z = emb.lookup("zzzqq");
  REQUIRE(z.size() == 2);
  CHECK(z[0] == 0.0f);
  CHECK(z[1] == 0.0f);
}

TEST_CASE("embedding file with three valid rows and one short row", "[embeddings]") {
  TempDir dir;
  std::string body;
  for (const char* w : {"alpha", "beta", "gamma"}) {
    body += w;
    for (int k = 0; k < 300; ++k) body += " " + std::to_string(k * 0.001);
    body += '\n';
  }
  body += "short 1 2 3\n";
  const auto emb = load_embeddings(dir.write("e300.txt", body), 300);
  CHECK(emb.size() == 3);
  CHECK(emb.skipped() == 1);
}

TEST_CASE("vocabulary filter keeps the hash of the whole file", "[embeddings]") {
  TempDir dir;
  const auto path = dir.write("emb.txt", "good 0.1 0.2\nfood 1 2\n");
  const std::unordered_set<std::string> keep{"food"};
  const auto full = load_embeddings(path, 2);
  const auto part = load_embeddings(path, 2, &keep);
  CHECK(part.size() == 1);
  CHECK(part.contains("food"));
  CHECK_FALSE(part.contains("good"));
  CHECK(part.content_hash() == full.content_hash());
}

TEST_CASE("embedding errors", "[embeddings]") {
  TempDir dir;
  try {
    load_embeddings((dir.path / "missing.txt").string(), 2);
    FAIL();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
  try {
    load_embeddings(dir.write("junk.txt", "a b c d\n"), 2);
    FAIL();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Format);
  }
}

TEST_CASE("SST layout reading and label collapse", "[sst]") {
  TempDir dir;
  dir.write("train/a.toks", "good\nit is fine\n");
  dir.write("train/a.parents", "0\n2 0 2\n");
  dir.write("train/a.labels", "4\n2\n");
  const auto set = read_sst((dir.path / "train").string());
  REQUIRE(set.size() == 2);
  CHECK(set[0].label == Sentiment::Positive);
  CHECK(set[1].label == Sentiment::Neutral);
  CHECK(set[1].parents == std::vector<int>{2, 0, 2});
  CHECK(to_dep_tree(set[1]).root() == 1);
}

TEST_CASE("SST per-node labels", "[sst]") {
  TempDir dir;
  dir.write("d/x.toks", "not bad\n");
  dir.write("d/x.parents", "2 0\n");
  dir.write("d/x.labels", "# 3\n");
  const auto set = read_sst((dir.path / "d").string());
  REQUIRE(set.size() == 1);
  CHECK(set[0].label == Sentiment::Positive);
  REQUIRE(set[0].node_labels.size() == 2);
  CHECK_FALSE(set[0].node_labels[0].has_value());
}

TEST_CASE("SST misalignment names the files", "[sst]") {
  TempDir dir;
  dir.write("d/x.toks", "a b c d e\n");
  dir.write("d/x.parents", "0 1 1 1\n");
  dir.write("d/x.labels", "1\n");
  try {
    read_sst((dir.path / "d").string());
    FAIL();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Alignment);
    CHECK_THAT(e.detail(), Catch::Matchers::ContainsSubstring("x.toks"));
  }
  dir.write("e/x.toks", "a\nb\n");
  dir.write("e/x.parents", "0\n");
  dir.write("e/x.labels", "1\n1\n");
  try {
    read_sst((dir.path / "e").string());
    FAIL();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Alignment);
    CHECK_THAT(e.detail(), Catch::Matchers::ContainsSubstring("x.parents"));
  }
}

TEST_CASE("gold in the #### format", "[gold]") {
  TempDir dir;
  const auto path = dir.write("gold.txt",
                              "the food was excellent####[([0, 1], [3], 'POS')]\n"
                              "nothing here####[]\n"
                              "bad service , great view####[([1], [0], 'NEG'), ([4], [3], 'POS')]\n");
  const auto gold = read_triplet_gold(path);
  REQUIRE(gold.size() == 3);
  REQUIRE(gold[0].triplets.size() == 1);
  CHECK(gold[0].triplets[0].target == std::vector<int>{0, 1});
  CHECK(gold[0].triplets[0].opinion == std::vector<int>{3});
  CHECK(gold[0].triplets[0].sentiment == Sentiment::Positive);
  CHECK(gold[1].triplets.empty());
  CHECK(gold[2].triplets.size() == 2);
  CHECK(gold[2].triplets[0].sentiment == Sentiment::Negative);
}

TEST_CASE("gold in the JSON-lines format round-trips", "[gold]") {
  TempDir dir;
  GoldRecord rec{{"the", "food", "was", "excellent"}, {{{0, 1}, {3}, Sentiment::Positive}}};
  const auto path = dir.write("gold.jsonl", gold_to_json(rec).dump() + "\n");
  const auto back = read_triplet_gold(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].tokens == rec.tokens);
  CHECK(back[0].triplets == rec.triplets);
}

TEST_CASE("gold errors carry line numbers", "[gold]") {
  TempDir dir;
  try {
    read_triplet_gold(dir.write("g1.txt", "fine####[]\nthe food####[([0, 5], [1], 'POS')]\n"));
    FAIL();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Range);
    CHECK_THAT(e.detail(), Catch::Matchers::ContainsSubstring("line 2"));
  }
  try {
    read_triplet_gold(dir.write("g2.txt", "the food####[([0], [1], 'POS'\n"));
    FAIL();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Format);
    CHECK_THAT(e.detail(), Catch::Matchers::ContainsSubstring("line 1"));
  }
}

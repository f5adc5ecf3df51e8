#pragma once

// Readers and writers for every on-disk format the pipeline consumes:
// enriched CoNLL-U parses, the toks/parents/labels sentiment treebank layout,
// whitespace-separated embedding files and triplet gold files.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "taste/error.hpp"
#include "taste/sentiment.hpp"
#include "taste/text.hpp"

namespace taste {

/// Half-open token range [start, end) over 0-based token positions.
struct Span {
  int start = 0;
  int end = 0;

  int size() const { return end - start; }
  bool empty() const { return end <= start; }
  bool contains(int i) const { return i >= start && i < end; }
  bool overlaps(const Span& o) const { return start < o.end && o.start < end; }
  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

inline constexpr int kRoot = -1;

struct Token {
  int index = 0;  // 1-based position, as in the CoNLL-U ID column
  std::string surface;
  std::string lemma;
  std::string upos;
  std::string xpos;
  std::string feats;
  int head = kRoot;  // 0-based position of the parent, or kRoot
  std::string deprel;
  std::string deps;
  std::string misc;  // MISC entries other than the Chunk marks; "_" columns are read as ""
  // Optional columns given as "_" in the file are held as empty strings.

  friend bool operator==(const Token&, const Token&) = default;
};

/// A validated dependency tree. Construction checks every structural
/// invariant, so holding a DepTree means the parse is a well-formed tree.
class DepTree {
 public:
  DepTree() = default;

  /// Throws Error(Tree) naming the offending token on any violation.
  static DepTree build(std::vector<Token> tokens,
                       std::optional<std::vector<Span>> chunk_spans = std::nullopt,
                       std::vector<std::string> comments = {}) {
    DepTree t;
    t.tokens_ = std::move(tokens);
    t.comments_ = std::move(comments);
    const int n = static_cast<int>(t.tokens_.size());
    if (n == 0) throw Error(ErrorKind::Tree, "empty sentence");

    t.children_.assign(n, {});
    int root = kRoot;
    for (int i = 0; i < n; ++i) {
      const Token& tok = t.tokens_[i];
      if (tok.index != i + 1)
        throw Error(ErrorKind::Tree, "token ids must run 1..n; found id " +
                                         std::to_string(tok.index) + " at position " +
                                         std::to_string(i + 1));
      if (tok.head == i) throw Error(ErrorKind::Tree, "self-loop at token " + std::to_string(i + 1));
      if (tok.head == kRoot) {
        if (root != kRoot)
          throw Error(ErrorKind::Tree, "multiple root tokens (" + std::to_string(root + 1) + ", " +
                                           std::to_string(i + 1) + ")");
        root = i;
      } else if (tok.head < 0 || tok.head >= n) {
        throw Error(ErrorKind::Tree, "head of token " + std::to_string(i + 1) + " out of range");
      } else {
        t.children_[tok.head].push_back(i);
      }
    }
    if (root == kRoot) throw Error(ErrorKind::Tree, "no root token");
    t.root_ = root;

    // Every token must reach the root; anything else sits on a cycle.
    std::vector<char> state(n, 0);  // 0 unknown, 1 on current path, 2 reaches root
    state[root] = 2;
    for (int i = 0; i < n; ++i) {
      std::vector<int> path;
      int cur = i;
      while (state[cur] == 0) {
        state[cur] = 1;
        path.push_back(cur);
        cur = t.tokens_[cur].head;
      }
      if (state[cur] == 1) throw Error(ErrorKind::Tree, "cycle through token " + std::to_string(cur + 1));
      for (int p : path) state[p] = 2;
    }

    if (chunk_spans) {
      auto spans = std::move(*chunk_spans);
      std::sort(spans.begin(), spans.end());
      for (std::size_t k = 0; k < spans.size(); ++k) {
        const Span& s = spans[k];
        if (s.start < 0 || s.end > n || s.empty())
          throw Error(ErrorKind::Tree, "chunk span out of bounds");
        if (k > 0 && spans[k - 1].overlaps(s)) throw Error(ErrorKind::Tree, "overlapping chunk spans");
      }
      t.chunk_spans_ = std::move(spans);
    }
    return t;
  }

  int size() const { return static_cast<int>(tokens_.size()); }
  int root() const { return root_; }
  const std::vector<Token>& tokens() const { return tokens_; }
  const Token& token(int i) const { return tokens_.at(static_cast<std::size_t>(i)); }
  int head(int i) const { return token(i).head; }
  /// Dependents of node i in ascending position order.
  const std::vector<int>& children(int i) const { return children_.at(static_cast<std::size_t>(i)); }
  const std::optional<std::vector<Span>>& chunk_spans() const { return chunk_spans_; }
  const std::vector<std::string>& comments() const { return comments_; }

  std::size_t edge_count() const {
    std::size_t e = 0;
    for (const auto& c : children_) e += c.size();
    return e;
  }

  /// Children before parents; siblings in ascending order.
  std::vector<int> post_order() const {
    std::vector<int> order;
    order.reserve(tokens_.size());
    std::vector<std::pair<int, std::size_t>> stack{{root_, 0}};
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < children_[node].size()) {
        const int child = children_[node][next++];
        stack.emplace_back(child, 0);
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }
    return order;
  }

  /// Node i and all of its descendants, ascending.
  std::vector<int> yield(int i) const {
    std::vector<int> out;
    std::vector<int> stack{i};
    while (!stack.empty()) {
      const int n = stack.back();
      stack.pop_back();
      out.push_back(n);
      for (int c : children_[n]) stack.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  bool dominates(int ancestor, int node) const {
    for (int cur = node; cur != kRoot; cur = tokens_[cur].head)
      if (cur == ancestor) return true;
    return false;
  }

  std::vector<std::string> surfaces() const {
    std::vector<std::string> out;
    out.reserve(tokens_.size());
    for (const auto& t : tokens_) out.push_back(t.surface);
    return out;
  }

  friend bool operator==(const DepTree& a, const DepTree& b) {
    return a.tokens_ == b.tokens_ && a.chunk_spans_ == b.chunk_spans_;
  }

 private:
  std::vector<Token> tokens_;
  std::vector<std::vector<int>> children_;
  std::optional<std::vector<Span>> chunk_spans_;
  std::vector<std::string> comments_;
  int root_ = kRoot;
};

// ---------------------------------------------------------------------------
// Enriched CoNLL-U

struct ConlluRejection {
  std::size_t sentence = 0;  // 1-based ordinal of the block in the file
  std::size_t line = 0;      // 1-based line the problem was found on
  std::string message;
};

/// `trees[k]` came from block `ordinals[k]`; rejected blocks keep their slot
/// in the numbering so downstream output can stay aligned with the input.
struct ConlluDocument {
  std::vector<DepTree> trees;
  std::vector<std::size_t> ordinals;
  std::vector<ConlluRejection> rejected;
  std::size_t block_count = 0;
};

namespace detail {

struct RawBlock {
  std::size_t first_line = 0;
  std::vector<std::pair<std::size_t, std::string>> lines;
};

inline DepTree parse_conllu_block(const RawBlock& block) {
  std::vector<Token> tokens;
  std::vector<std::string> comments;
  std::vector<char> marks;  // 'B', 'I', 'O' or 0
  bool any_mark = false;

  for (const auto& [lineno, line] : block.lines) {
    if (!line.empty() && line[0] == '#') {
      comments.push_back(line);
      continue;
    }
    const auto cols = text::split(line, '\t');
    if (cols.size() != 10)
      throw Error(ErrorKind::Format, "line " + std::to_string(lineno) + ": expected 10 tab-separated columns, found " +
                                         std::to_string(cols.size()));
    // Multiword ranges and empty nodes are not part of the basic tree.
    if (cols[0].find('-') != std::string_view::npos || cols[0].find('.') != std::string_view::npos) continue;

    auto id = text::parse_int(cols[0]);
    auto head = text::parse_int(cols[6]);
    if (!id) throw Error(ErrorKind::Format, "line " + std::to_string(lineno) + ": bad token id '" + std::string(cols[0]) + "'");
    if (!head) throw Error(ErrorKind::Format, "line " + std::to_string(lineno) + ": bad head '" + std::string(cols[6]) + "'");

    Token tok;
    tok.index = static_cast<int>(*id);
    tok.surface = std::string(cols[1]);
    auto optional_field = [](std::string_view v) { return v == "_" ? std::string() : std::string(v); };
    tok.lemma = optional_field(cols[2]);
    tok.upos = std::string(cols[3]);
    tok.xpos = optional_field(cols[4]);
    tok.feats = optional_field(cols[5]);
    tok.head = static_cast<int>(*head) - 1;
    if (*head == 0) tok.head = kRoot;
    tok.deprel = std::string(cols[7]);
    tok.deps = optional_field(cols[8]);

    char mark = 0;
    std::vector<std::string> rest;
    if (cols[9] != "_") {
      for (auto kv : text::split(cols[9], '|')) {
        if (kv == "Chunk=B") mark = 'B';
        else if (kv == "Chunk=I") mark = 'I';
        else if (kv == "Chunk=O") mark = 'O';
        else rest.emplace_back(kv);
      }
    }
    any_mark = any_mark || mark != 0;
    marks.push_back(mark);
    tok.misc = text::join(rest, "|");
    tokens.push_back(std::move(tok));
  }

  std::optional<std::vector<Span>> spans;
  if (any_mark) {
    spans.emplace();
    int open = -1;
    const int n = static_cast<int>(marks.size());
    for (int i = 0; i < n; ++i) {
      if (marks[i] == 'B') {
        if (open >= 0) spans->push_back({open, i});
        open = i;
      } else if (marks[i] == 'I') {
        if (open < 0)
          throw Error(ErrorKind::Format, "Chunk=I without a preceding Chunk=B at token " + std::to_string(i + 1));
      } else {
        if (open >= 0) spans->push_back({open, i});
        open = -1;
      }
    }
    if (open >= 0) spans->push_back({open, n});
  }
  return DepTree::build(std::move(tokens), std::move(spans), std::move(comments));
}

inline std::vector<RawBlock> split_blocks(std::istream& in) {
  std::vector<RawBlock> blocks;
  RawBlock cur;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) {
      if (!cur.lines.empty()) blocks.push_back(std::move(cur));
      cur = RawBlock{};
      continue;
    }
    if (cur.lines.empty()) cur.first_line = lineno;
    cur.lines.emplace_back(lineno, line);
  }
  if (!cur.lines.empty()) blocks.push_back(std::move(cur));
  return blocks;
}

}  // namespace detail

/// Blocks consisting only of comments are ignored and do not consume an ordinal.
inline ConlluDocument read_conllu(std::istream& in) {
  ConlluDocument doc;
  for (const auto& block : detail::split_blocks(in)) {
    const bool has_token = std::any_of(block.lines.begin(), block.lines.end(),
                                       [](const auto& l) { return l.second[0] != '#'; });
    if (!has_token) continue;
    const std::size_t ordinal = ++doc.block_count;
    try {
      doc.trees.push_back(detail::parse_conllu_block(block));
      doc.ordinals.push_back(ordinal);
    } catch (const Error& e) {
      doc.rejected.push_back({ordinal, block.first_line, e.what()});
    }
  }
  return doc;
}

inline ConlluDocument read_conllu(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  return read_conllu(in);
}

/// Like read_conllu, but the first rejected sentence is an error.
inline std::vector<DepTree> read_conllu_strict(const std::string& path) {
  auto doc = read_conllu(path);
  if (!doc.rejected.empty()) {
    const auto& r = doc.rejected.front();
    throw Error(ErrorKind::Tree, path + ": sentence " + std::to_string(r.sentence) + " (line " +
                                     std::to_string(r.line) + "): " + r.message);
  }
  return std::move(doc.trees);
}

inline void write_conllu(std::ostream& out, const DepTree& tree) {
  std::vector<char> marks(tree.tokens().size(), 0);
  if (const auto& spans = tree.chunk_spans()) {
    std::fill(marks.begin(), marks.end(), 'O');
    for (const Span& s : *spans) {
      marks[s.start] = 'B';
      for (int i = s.start + 1; i < s.end; ++i) marks[i] = 'I';
    }
  }
  for (const auto& c : tree.comments()) out << c << '\n';
  auto field = [](const std::string& s) -> const std::string& {
    static const std::string underscore = "_";
    return s.empty() ? underscore : s;
  };
  for (std::size_t i = 0; i < tree.tokens().size(); ++i) {
    const Token& t = tree.tokens()[i];
    std::string misc = t.misc == "_" ? std::string() : t.misc;
    if (marks[i]) {
      if (!misc.empty()) misc += '|';
      misc += std::string("Chunk=") + marks[i];
    }
    out << t.index << '\t' << t.surface << '\t' << field(t.lemma) << '\t' << field(t.upos) << '\t'
        << field(t.xpos) << '\t' << field(t.feats) << '\t' << (t.head == kRoot ? 0 : t.head + 1) << '\t'
        << field(t.deprel) << '\t' << field(t.deps) << '\t' << field(misc) << '\n';
  }
  out << '\n';
}

inline void write_conllu(std::ostream& out, std::span<const DepTree> trees) {
  for (const auto& t : trees) write_conllu(out, t);
}

// ---------------------------------------------------------------------------
// Embeddings

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim), oov_(dim, 0.0f) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }
  std::size_t skipped() const { return skipped_; }
  std::uint64_t content_hash() const { return hash_; }
  bool contains(const std::string& word) const { return index_.count(word) != 0; }

  /// Total: unknown words map to the all-zero vector.
  std::span<const float> lookup(const std::string& word) const {
    auto it = index_.find(word);
    if (it == index_.end()) return oov_;
    return {data_.data() + it->second * dim_, dim_};
  }
  std::span<const float> oov_vector() const { return oov_; }

  /// Returns false if the word is already present.
  bool insert(const std::string& word, std::span<const float> values) {
    if (values.size() != dim_) throw Error(ErrorKind::Dimension, "embedding for '" + word + "' has wrong width");
    if (index_.count(word)) return false;
    index_.emplace(word, index_.size());
    data_.insert(data_.end(), values.begin(), values.end());
    return true;
  }

 private:
  friend EmbeddingTable load_embeddings(const std::string&, std::size_t, const std::unordered_set<std::string>*);

  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> data_;
  std::vector<float> oov_;
  std::size_t skipped_ = 0;
  std::uint64_t hash_ = 0;
};

/// Loads `word f1 ... f_dim` lines. Lines with the wrong field count or
/// unparsable numbers are skipped and counted. When `keep` is given, only
/// those words are retained (the content hash still covers the whole file).
inline EmbeddingTable load_embeddings(const std::string& path, std::size_t dim,
                                      const std::unordered_set<std::string>* keep = nullptr) {
  if (dim == 0) throw Error(ErrorKind::Dimension, "embedding dimension must be positive");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open embeddings '" + path + "'");

  EmbeddingTable table(dim);
  text::Fnv1a64 hash;
  std::size_t parsed = 0;
  std::vector<float> values(dim);
  std::string line;
  while (std::getline(in, line)) {
    hash.update(line);
    hash.update("\n");
    std::string_view view = line;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (text::trim(view).empty()) continue;
    const auto fields = text::split(view, ' ');
    std::size_t nonempty = fields.size();
    while (nonempty > 0 && fields[nonempty - 1].empty()) --nonempty;  // trailing blanks
    bool ok = nonempty == dim + 1 && !fields[0].empty();
    for (std::size_t k = 0; ok && k < dim; ++k) {
      auto v = text::parse_real<float>(fields[k + 1]);
      if (!v || !std::isfinite(*v)) ok = false;
      else values[k] = *v;
    }
    if (!ok) {
      ++table.skipped_;
      continue;
    }
    ++parsed;
    std::string word(fields[0]);
    if (keep && !keep->count(word)) continue;
    table.insert(word, values);
  }
  if (in.bad()) throw Error(ErrorKind::Io, "read failure on '" + path + "'");
  if (parsed == 0) throw Error(ErrorKind::Format, "no parseable embedding lines in '" + path + "'");
  table.hash_ = hash.digest();
  return table;
}

// ---------------------------------------------------------------------------
// Sentiment treebank (toks / parents / labels)

struct SstExample {
  std::vector<std::string> tokens;
  std::vector<int> parents;  // 1-based, 0 marks the root
  Sentiment label = Sentiment::Neutral;
  /// Present only when the labels file carries one label per node ('#' = none).
  std::vector<std::optional<Sentiment>> node_labels;
};

/// A dependency tree over the example's tokens (surface forms only).
inline DepTree to_dep_tree(const SstExample& ex) {
  std::vector<Token> tokens(ex.tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    tokens[i].index = static_cast<int>(i) + 1;
    tokens[i].surface = ex.tokens[i];
    tokens[i].head = ex.parents[i] == 0 ? kRoot : ex.parents[i] - 1;
  }
  return DepTree::build(std::move(tokens));
}

namespace detail {

inline std::filesystem::path find_single(const std::filesystem::path& dir, const std::string& ext) {
  std::vector<std::filesystem::path> hits;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ext) hits.push_back(entry.path());
  if (hits.size() != 1)
    throw Error(ErrorKind::Format, "expected exactly one *" + ext + " file in '" + dir.string() + "', found " +
                                       std::to_string(hits.size()));
  return hits.front();
}

}  // namespace detail

inline std::vector<SstExample> read_sst(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, "not a directory: '" + dir + "'");
  const auto toks_path = detail::find_single(dir, ".toks");
  const auto parents_path = detail::find_single(dir, ".parents");
  const auto labels_path = detail::find_single(dir, ".labels");
  auto toks = text::read_lines(toks_path.string());
  auto parents = text::read_lines(parents_path.string());
  auto labels = text::read_lines(labels_path.string());
  auto drop_trailing_blank = [](std::vector<std::string>& v) {
    while (!v.empty() && text::trim(v.back()).empty()) v.pop_back();
  };
  drop_trailing_blank(toks);
  drop_trailing_blank(parents);
  drop_trailing_blank(labels);
  const std::string names =
      toks_path.filename().string() + ", " + parents_path.filename().string() + ", " + labels_path.filename().string();
  if (toks.size() != parents.size() || toks.size() != labels.size())
    throw Error(ErrorKind::Alignment, "line counts differ across " + names + " (" + std::to_string(toks.size()) + "/" +
                                          std::to_string(parents.size()) + "/" + std::to_string(labels.size()) + ")");

  std::vector<SstExample> out;
  out.reserve(toks.size());
  for (std::size_t line = 0; line < toks.size(); ++line) {
    const std::string where = " at line " + std::to_string(line + 1) + " of " + names;
    SstExample ex;
    for (auto t : text::split_ws(toks[line])) ex.tokens.emplace_back(t);
    const auto pfields = text::split_ws(parents[line]);
    if (pfields.size() != ex.tokens.size())
      throw Error(ErrorKind::Alignment, std::to_string(ex.tokens.size()) + " tokens vs " +
                                            std::to_string(pfields.size()) + " parents" + where);
    if (ex.tokens.empty()) throw Error(ErrorKind::Format, "empty sentence" + where);
    for (auto p : pfields) {
      auto v = text::parse_int(p);
      if (!v || *v < 0 || *v > static_cast<long long>(ex.tokens.size()))
        throw Error(ErrorKind::Format, "bad parent '" + std::string(p) + "'" + where);
      ex.parents.push_back(static_cast<int>(*v));
    }
    DepTree tree;
    try {
      tree = to_dep_tree(ex);
    } catch (const Error& e) {
      throw Error(ErrorKind::Tree, e.detail() + where);
    }

    auto parse_label = [&](std::string_view s) -> std::optional<Sentiment> {
      auto v = text::parse_int(s);
      auto lab = v ? collapse_sst_label(static_cast<int>(*v)) : std::nullopt;
      if (!lab) throw Error(ErrorKind::Format, "bad label '" + std::string(s) + "'" + where);
      return lab;
    };
    const auto lfields = text::split_ws(labels[line]);
    if (lfields.size() == 1) {
      ex.label = *parse_label(lfields[0]);
    } else if (lfields.size() == ex.tokens.size() && ex.tokens.size() > 1) {
      for (auto f : lfields) ex.node_labels.push_back(f == "#" ? std::nullopt : parse_label(f));
      const auto& root_label = ex.node_labels[static_cast<std::size_t>(tree.root())];
      if (!root_label) throw Error(ErrorKind::Format, "root node is unlabeled" + where);
      ex.label = *root_label;
    } else {
      throw Error(ErrorKind::Format, "expected one label or one per token" + where);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Triplet gold files

struct GoldTriplet {
  std::vector<int> target;   // 0-based token positions
  std::vector<int> opinion;  // 0-based token positions
  Sentiment sentiment = Sentiment::Neutral;
  friend bool operator==(const GoldTriplet&, const GoldTriplet&) = default;
};

struct GoldRecord {
  std::vector<std::string> tokens;
  std::vector<GoldTriplet> triplets;
};

namespace detail {

/// Parses the python-literal annotation `[([1, 2], [4], 'POS'), ...]`.
class TripletLiteralParser {
 public:
  explicit TripletLiteralParser(std::string_view s) : s_(s) {}

  std::vector<std::tuple<std::vector<long long>, std::vector<long long>, std::string>> parse() {
    std::vector<std::tuple<std::vector<long long>, std::vector<long long>, std::string>> out;
    expect('[');
    skip_ws();
    if (peek() == ']') {
      ++pos_;
      finish();
      return out;
    }
    while (true) {
      expect('(');
      auto target = int_list();
      expect(',');
      auto opinion = int_list();
      expect(',');
      auto label = quoted();
      skip_ws();
      if (peek() == ',') ++pos_;  // tolerate a trailing comma inside the tuple
      expect(')');
      out.emplace_back(std::move(target), std::move(opinion), std::move(label));
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect(']');
      finish();
      return out;
    }
  }

 private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  void expect(char c) {
    skip_ws();
    if (peek() != c) throw std::runtime_error(std::string("expected '") + c + "' at offset " + std::to_string(pos_));
    ++pos_;
  }
  void finish() {
    skip_ws();
    if (pos_ != s_.size()) throw std::runtime_error("trailing text at offset " + std::to_string(pos_));
  }
  std::vector<long long> int_list() {
    std::vector<long long> v;
    expect('[');
    skip_ws();
    if (peek() == ']') {
      ++pos_;
      return v;
    }
    while (true) {
      skip_ws();
      std::size_t start = pos_;
      if (peek() == '-') ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      auto num = text::parse_int(s_.substr(start, pos_ - start));
      if (!num) throw std::runtime_error("expected integer at offset " + std::to_string(start));
      v.push_back(*num);
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect(']');
      return v;
    }
  }
  std::string quoted() {
    skip_ws();
    const char q = peek();
    if (q != '\'' && q != '"') throw std::runtime_error("expected quoted label at offset " + std::to_string(pos_));
    ++pos_;
    const auto end = s_.find(q, pos_);
    if (end == std::string_view::npos) throw std::runtime_error("unterminated label");
    std::string out(s_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

inline std::vector<int> checked_indices(const std::vector<long long>& raw, std::size_t n, std::size_t lineno) {
  std::vector<int> out;
  for (long long v : raw) {
    if (v < 0 || v >= static_cast<long long>(n))
      throw Error(ErrorKind::Range, "line " + std::to_string(lineno) + ": token index " + std::to_string(v) +
                                        " outside sentence of " + std::to_string(n) + " tokens");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

inline GoldRecord parse_gold_line(std::string_view line, std::size_t lineno) {
  const std::string at = "line " + std::to_string(lineno) + ": ";
  GoldRecord rec;
  std::vector<std::tuple<std::vector<long long>, std::vector<long long>, std::string>> raw;

  if (auto sep = line.find("####"); sep != std::string_view::npos) {
    for (auto t : text::split_ws(line.substr(0, sep))) rec.tokens.emplace_back(t);
    try {
      raw = TripletLiteralParser(text::trim(line.substr(sep + 4))).parse();
    } catch (const std::runtime_error& e) {
      throw Error(ErrorKind::Format, at + e.what());
    }
  } else if (!line.empty() && line.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      if (j.contains("tokens")) {
        rec.tokens = j.at("tokens").get<std::vector<std::string>>();
      } else {
        for (auto t : text::split_ws(j.at("sentence").get<std::string>())) rec.tokens.emplace_back(t);
      }
      for (const auto& t : j.value("triplets", nlohmann::json::array()))
        raw.emplace_back(t.at("target").get<std::vector<long long>>(), t.at("opinion").get<std::vector<long long>>(),
                         t.at("sentiment").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Format, at + e.what());
    }
  } else {
    throw Error(ErrorKind::Format, at + "neither a '####' annotation nor a JSON record");
  }

  for (auto& [target, opinion, label] : raw) {
    GoldTriplet t;
    t.target = checked_indices(target, rec.tokens.size(), lineno);
    t.opinion = checked_indices(opinion, rec.tokens.size(), lineno);
    auto s = parse_sentiment(label);
    if (!s) throw Error(ErrorKind::Format, at + "unknown sentiment '" + label + "'");
    if (t.target.empty()) throw Error(ErrorKind::Format, at + "empty target span");
    t.sentiment = *s;
    rec.triplets.push_back(std::move(t));
  }
  return rec;
}

}  // namespace detail

/// One record per non-blank line, in file order.
inline std::vector<GoldRecord> read_triplet_gold(const std::string& path) {
  const auto lines = text::read_lines(path);
  std::vector<GoldRecord> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = text::trim(lines[i]);
    if (line.empty()) continue;
    out.push_back(detail::parse_gold_line(line, i + 1));
  }
  return out;
}

/// Normalized line-delimited form of a gold record.
inline nlohmann::json gold_to_json(const GoldRecord& rec) {
  nlohmann::json triplets = nlohmann::json::array();
  for (const auto& t : rec.triplets)
    triplets.push_back({{"target", t.target}, {"opinion", t.opinion}, {"sentiment", to_string(t.sentiment)}});
  return {{"tokens", rec.tokens}, {"triplets", triplets}};
}

}  // namespace taste

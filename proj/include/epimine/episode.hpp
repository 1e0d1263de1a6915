#pragma once

#include "epimine/alphabet.hpp"

#include <algorithm>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace epimine {

// Closed 1-based span [start, end] inside a sequence.
struct WindowSpan {
  int start = 0;
  int end = 0;

  int length() const { return end - start + 1; }
  bool operator==(const WindowSpan&) const = default;
};

inline std::ostream& operator<<(std::ostream& out, const WindowSpan& w) {
  return out << "[" << w.start << "," << w.end << "]";
}

// A labeled DAG pattern. Node k carries labels[k]; an edge (i, j) requires
// node i to be matched strictly before node j. The empty episode has no nodes.
class Episode {
 public:
  Episode() = default;

  Episode(std::vector<SymbolId> labels, std::vector<std::pair<int, int>> edges)
      : labels_(std::move(labels)), edges_(std::move(edges)) {
    std::sort(edges_.begin(), edges_.end());
    validate();
  }

  static Episode empty() { return Episode(); }

  static Episode single(SymbolId a) { return Episode({a}, {}); }

  // Nodes with no ordering constraints.
  static Episode parallel(std::vector<SymbolId> labels) {
    return Episode(std::move(labels), {});
  }

  // Total chain labels[0] -> labels[1] -> ...
  static Episode serial(const std::vector<SymbolId>& labels) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < static_cast<int>(labels.size()); ++i) edges.push_back({i, i + 1});
    return Episode(labels, std::move(edges));
  }

  int node_count() const { return static_cast<int>(labels_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  bool is_empty() const { return labels_.empty(); }
  SymbolId label(int node) const { return labels_.at(static_cast<size_t>(node)); }
  const std::vector<SymbolId>& labels() const { return labels_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  bool has_edge(int i, int j) const {
    return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(i, j));
  }

  std::vector<int> out_degree() const {
    std::vector<int> deg(labels_.size(), 0);
    for (auto& [i, j] : edges_) deg[static_cast<size_t>(i)]++;
    return deg;
  }

  // Nodes in an order where every edge source precedes its target.
  std::vector<int> topo_order() const {
    int n = node_count();
    std::vector<int> indeg(static_cast<size_t>(n), 0);
    for (auto& [i, j] : edges_) indeg[static_cast<size_t>(j)]++;
    std::vector<int> order, queue;
    for (int v = 0; v < n; ++v)
      if (indeg[static_cast<size_t>(v)] == 0) queue.push_back(v);
    for (size_t head = 0; head < queue.size(); ++head) {
      int v = queue[head];
      order.push_back(v);
      for (auto& [i, j] : edges_)
        if (i == v && --indeg[static_cast<size_t>(j)] == 0) queue.push_back(j);
    }
    if (static_cast<int>(order.size()) != n) throw std::logic_error("episode: cycle detected");
    return order;
  }

 private:
  void validate() const {
    int n = node_count();
    for (auto& [i, j] : edges_) {
      if (i < 0 || j < 0 || i >= n || j >= n) throw std::invalid_argument("episode: edge endpoint out of range");
      if (i == j) throw std::invalid_argument("episode: self loop");
    }
    for (size_t e = 1; e < edges_.size(); ++e)
      if (edges_[e] == edges_[e - 1]) throw std::invalid_argument("episode: duplicate edge");
    (void)topo_order();  // throws on cycles
  }

  std::vector<SymbolId> labels_;
  std::vector<std::pair<int, int>> edges_;
};

inline std::vector<int> sinks(const Episode& g) {
  auto deg = g.out_degree();
  std::vector<int> out;
  for (int v = 0; v < g.node_count(); ++v)
    if (deg[static_cast<size_t>(v)] == 0) out.push_back(v);
  return out;
}

// Removes a sink node and its incident edges; remaining nodes are re-densified
// preserving their relative order.
inline Episode remove_sink(const Episode& g, int v) {
  auto deg = g.out_degree();
  if (v < 0 || v >= g.node_count() || deg[static_cast<size_t>(v)] != 0)
    throw std::invalid_argument("remove_sink: node is not a sink");
  std::vector<SymbolId> labels;
  std::vector<int> remap(static_cast<size_t>(g.node_count()), -1);
  for (int u = 0; u < g.node_count(); ++u) {
    if (u == v) continue;
    remap[static_cast<size_t>(u)] = static_cast<int>(labels.size());
    labels.push_back(g.label(u));
  }
  std::vector<std::pair<int, int>> edges;
  for (auto& [i, j] : g.edges())
    if (i != v && j != v) edges.push_back({remap[static_cast<size_t>(i)], remap[static_cast<size_t>(j)]});
  return Episode(std::move(labels), std::move(edges));
}

// Removes an arbitrary node, keeping orderings that were implied through it
// (edges x->v, v->y collapse to x->y).
inline Episode remove_node(const Episode& g, int v) {
  if (v < 0 || v >= g.node_count()) throw std::invalid_argument("remove_node: bad node");
  std::vector<SymbolId> labels;
  std::vector<int> remap(static_cast<size_t>(g.node_count()), -1);
  for (int u = 0; u < g.node_count(); ++u) {
    if (u == v) continue;
    remap[static_cast<size_t>(u)] = static_cast<int>(labels.size());
    labels.push_back(g.label(u));
  }
  std::set<std::pair<int, int>> edges;
  std::vector<int> into, outof;
  for (auto& [i, j] : g.edges()) {
    if (i == v) outof.push_back(j);
    else if (j == v) into.push_back(i);
    else edges.insert({remap[static_cast<size_t>(i)], remap[static_cast<size_t>(j)]});
  }
  for (int x : into)
    for (int y : outof) edges.insert({remap[static_cast<size_t>(x)], remap[static_cast<size_t>(y)]});
  return Episode(std::move(labels), std::vector<std::pair<int, int>>(edges.begin(), edges.end()));
}

// Canonical form by exhaustive permutation within same-label node groups.
// Two episodes get the same key iff they are isomorphic as labeled DAGs.
// Capped because the search is factorial in the largest label group.
inline std::string canonical_key(const Episode& g, int max_nodes = 8) {
  if (g.node_count() > max_nodes)
    throw std::invalid_argument("canonical_key: episode larger than node cap");
  int n = g.node_count();

  // Fix the label sequence: nodes sorted by label, then permute inside blocks.
  std::vector<int> order(static_cast<size_t>(n));
  for (int v = 0; v < n; ++v) order[static_cast<size_t>(v)] = v;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return g.label(a) < g.label(b); });

  std::vector<std::pair<size_t, size_t>> blocks;  // [begin, end) index ranges in `order`
  for (size_t b = 0; b < order.size();) {
    size_t e = b;
    while (e < order.size() && g.label(order[e]) == g.label(order[b])) ++e;
    blocks.push_back({b, e});
    b = e;
  }

  std::string best;
  std::vector<int> pos(static_cast<size_t>(n), 0);  // old node -> new index
  auto consider = [&]() {
    for (size_t k = 0; k < order.size(); ++k) pos[static_cast<size_t>(order[k])] = static_cast<int>(k);
    std::vector<std::pair<int, int>> edges;
    edges.reserve(g.edges().size());
    for (auto& [i, j] : g.edges())
      edges.push_back({pos[static_cast<size_t>(i)], pos[static_cast<size_t>(j)]});
    std::sort(edges.begin(), edges.end());
    std::string key;
    for (size_t k = 0; k < order.size(); ++k) {
      key += std::to_string(g.label(order[k]));
      key += ',';
    }
    key += '|';
    for (auto& [i, j] : edges) {
      key += std::to_string(i);
      key += '>';
      key += std::to_string(j);
      key += ';';
    }
    if (best.empty() || key < best) best = std::move(key);
  };

  // Cartesian product of permutations of each same-label block.
  auto recurse = [&](auto&& self, size_t block) -> void {
    if (block == blocks.size()) {
      consider();
      return;
    }
    auto [b, e] = blocks[block];
    std::sort(order.begin() + b, order.begin() + e);
    do {
      self(self, block + 1);
    } while (std::next_permutation(order.begin() + b, order.begin() + e));
  };
  recurse(recurse, 0);
  if (best.empty()) best = "|";  // empty episode
  return best;
}

// Downward-closed episode set keyed by canonical form. Always contains the
// empty episode; indices are stable and dense.
class EpisodeFamily {
 public:
  EpisodeFamily() { add(Episode::empty()); }

  int add(const Episode& g) {
    std::string key = canonical_key(g);
    auto it = by_key_.find(key);
    if (it != by_key_.end()) return it->second;
    int id = static_cast<int>(episodes_.size());
    episodes_.push_back(g);
    keys_.push_back(key);
    by_key_.emplace(std::move(key), id);
    return id;
  }

  int size() const { return static_cast<int>(episodes_.size()); }
  const Episode& operator[](int id) const { return episodes_.at(static_cast<size_t>(id)); }
  const std::string& key(int id) const { return keys_.at(static_cast<size_t>(id)); }
  int empty_index() const { return 0; }

  std::optional<int> find(const Episode& g) const { return find_key(canonical_key(g)); }

  std::optional<int> find_key(const std::string& key) const {
    auto it = by_key_.find(key);
    if (it == by_key_.end()) return std::nullopt;
    return it->second;
  }

  bool is_downward_closed() const {
    for (int id = 0; id < size(); ++id)
      for (int v : sinks(episodes_[static_cast<size_t>(id)]))
        if (!find(remove_sink(episodes_[static_cast<size_t>(id)], v))) return false;
    return true;
  }

 private:
  std::vector<Episode> episodes_;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, int> by_key_;
};

// Smallest downward-closed family containing `roots`, deduplicated by
// canonical form.
inline EpisodeFamily closure(const std::vector<Episode>& roots) {
  EpisodeFamily family;
  std::vector<int> worklist;
  for (const Episode& g : roots) worklist.push_back(family.add(g));
  for (size_t head = 0; head < worklist.size(); ++head) {
    Episode g = family[worklist[head]];
    for (int v : sinks(g)) {
      Episode sub = remove_sink(g, v);
      int before = family.size();
      int id = family.add(sub);
      if (id >= before) worklist.push_back(id);
    }
  }
  return family;
}

namespace detail {

inline bool covers_window(const SymbolSequence& s, int lo, int hi, const Episode& g) {
  if (g.is_empty()) return true;
  if (hi - lo + 1 < g.node_count()) return false;
  auto order = g.topo_order();
  int n = g.node_count();
  std::vector<int> assign(static_cast<size_t>(n), 0);
  std::vector<bool> used(static_cast<size_t>(hi - lo + 2), false);

  auto rec = [&](auto&& self, size_t step) -> bool {
    if (step == order.size()) return true;
    int v = order[step];
    int earliest = lo;
    for (auto& [i, j] : g.edges())
      if (j == v) earliest = std::max(earliest, assign[static_cast<size_t>(i)] + 1);
    for (int p = earliest; p <= hi; ++p) {
      if (used[static_cast<size_t>(p - lo)]) continue;
      if (s.at1(p) != g.label(v)) continue;
      used[static_cast<size_t>(p - lo)] = true;
      assign[static_cast<size_t>(v)] = p;
      if (self(self, step + 1)) return true;
      used[static_cast<size_t>(p - lo)] = false;
    }
    return false;
  };
  return rec(rec, 0);
}

}  // namespace detail

// True iff an injective node -> position map exists with matching labels and
// every edge mapped to a strictly increasing position pair.
inline bool covers(const SymbolSequence& s, const Episode& g) {
  return detail::covers_window(s, 1, s.length(), g);
}

// Reference semantics for minimal windows: all spans [i, j] with length <= K
// that cover g while neither one-symbol-shrunk sub-window does. Quadratic;
// used as the oracle for the streaming scanner.
inline std::vector<WindowSpan> brute_minimal_windows(const SymbolSequence& s, const Episode& g, int max_len) {
  if (max_len < 1) throw std::invalid_argument("brute_minimal_windows: max length must be >= 1");
  std::vector<WindowSpan> out;
  if (g.is_empty()) return out;  // every shrunk window still covers the empty episode
  for (int j = 1; j <= s.length(); ++j) {
    int lo = std::max(1, j - max_len + 1);
    for (int i = lo; i <= j; ++i) {
      if (!detail::covers_window(s, i, j, g)) continue;
      bool left = i + 1 <= j && detail::covers_window(s, i + 1, j, g);
      bool right = i <= j - 1 && detail::covers_window(s, i, j - 1, g);
      if (!left && !right) out.push_back({i, j});
    }
  }
  std::sort(out.begin(), out.end(), [](const WindowSpan& a, const WindowSpan& b) { return a.start < b.start; });
  return out;
}

// Compact one-line rendering, e.g. "a->b", "(a,b)", or a node/edge listing
// for general DAGs.
inline std::string describe(const Episode& g, const Alphabet& alphabet) {
  if (g.is_empty()) return "()";
  int n = g.node_count();
  if (g.edge_count() == 0) {
    if (n == 1) return alphabet.token(g.label(0));
    std::vector<std::string> tokens;
    for (int v = 0; v < n; ++v) tokens.push_back(alphabet.token(g.label(v)));
    std::sort(tokens.begin(), tokens.end());
    std::string out = "(";
    for (size_t k = 0; k < tokens.size(); ++k) out += (k ? "," : "") + tokens[k];
    return out + ")";
  }
  // Chain check: edges exactly (o[0],o[1]), (o[1],o[2]), ...
  if (g.edge_count() == n - 1) {
    auto order = g.topo_order();
    bool chain = true;
    for (int k = 0; k + 1 < n && chain; ++k)
      chain = g.has_edge(order[static_cast<size_t>(k)], order[static_cast<size_t>(k + 1)]);
    if (chain) {
      std::string out;
      for (int k = 0; k < n; ++k)
        out += (k ? "->" : "") + alphabet.token(g.label(order[static_cast<size_t>(k)]));
      return out;
    }
  }
  std::string out = "{";
  for (int v = 0; v < n; ++v) out += (v ? "," : "") + alphabet.token(g.label(v));
  out += "|";
  bool first = true;
  for (auto& [i, j] : g.edges()) {
    out += (first ? "" : ",") + std::to_string(i) + ">" + std::to_string(j);
    first = false;
  }
  return out + "}";
}

// Line-based episode file format:
//   episode <id>
//   node <k> <label>
//   edge <i> <j>
//   end
// Lines starting with '#' and blank lines are skipped.
inline void write_episode(std::ostream& out, const Episode& g, const Alphabet& alphabet, int id) {
  out << "episode " << id << "\n";
  for (int v = 0; v < g.node_count(); ++v)
    out << "node " << v << " " << alphabet.token(g.label(v)) << "\n";
  for (auto& [i, j] : g.edges()) out << "edge " << i << " " << j << "\n";
  out << "end\n";
}

inline std::vector<Episode> read_episodes(std::istream& in, Alphabet& alphabet) {
  std::vector<Episode> out;
  std::string line;
  bool open = false;
  std::unordered_map<int, SymbolId> nodes;
  std::vector<std::pair<int, int>> edges;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("episode file, line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word) || word[0] == '#') continue;
    if (word == "episode") {
      if (open) fail("missing 'end'");
      open = true;
      nodes.clear();
      edges.clear();
    } else if (word == "node") {
      int k;
      std::string label;
      if (!open || !(ls >> k >> label)) fail("bad node line");
      if (!nodes.emplace(k, alphabet.intern(label)).second) fail("duplicate node index");
    } else if (word == "edge") {
      int i, j;
      if (!open || !(ls >> i >> j)) fail("bad edge line");
      edges.push_back({i, j});
    } else if (word == "end") {
      if (!open) fail("'end' without 'episode'");
      std::vector<SymbolId> labels(nodes.size(), -1);
      for (auto& [k, lab] : nodes) {
        if (k < 0 || k >= static_cast<int>(nodes.size())) fail("node indices must be contiguous from 0");
        labels[static_cast<size_t>(k)] = lab;
      }
      try {
        out.push_back(Episode(std::move(labels), std::move(edges)));
      } catch (const std::exception& e) {
        fail(e.what());
      }
      open = false;
      edges = {};
    } else {
      fail("unknown directive '" + word + "'");
    }
  }
  if (open) fail("unterminated episode block");
  return out;
}

}  // namespace epimine

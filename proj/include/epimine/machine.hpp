#pragma once

#include "epimine/alphabet.hpp"
#include "epimine/episode.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace epimine {

// Edge guards generalize single labels so that one coverage recurrence serves
// the episode machine, the determinized machine, and the co-coverage machine.
struct EdgeGuard {
  enum class Kind { Single, Set, Complement, Any };

  Kind kind = Kind::Single;
  std::vector<SymbolId> labels;  // sorted, unique; empty only for Any

  static EdgeGuard single(SymbolId a) { return {Kind::Single, {a}}; }

  static EdgeGuard label_set(std::vector<SymbolId> set) {
    normalize(set);
    if (set.empty()) throw std::invalid_argument("guard: empty label set");
    return {Kind::Set, std::move(set)};
  }

  static EdgeGuard complement(std::vector<SymbolId> set) {
    normalize(set);
    if (set.empty()) throw std::invalid_argument("guard: empty complement set");
    return {Kind::Complement, std::move(set)};
  }

  static EdgeGuard any() { return {Kind::Any, {}}; }

  bool matches(SymbolId a) const {
    switch (kind) {
      case Kind::Any: return true;
      case Kind::Complement: return !std::binary_search(labels.begin(), labels.end(), a);
      default: return std::binary_search(labels.begin(), labels.end(), a);
    }
  }

  SymbolId single_label() const {
    if (kind != Kind::Single) throw std::logic_error("guard is not a single label");
    return labels[0];
  }

  std::string describe(const Alphabet* alphabet = nullptr) const {
    auto name = [&](SymbolId a) { return alphabet ? alphabet->token(a) : std::to_string(a); };
    switch (kind) {
      case Kind::Any: return "*";
      case Kind::Single: return name(labels[0]);
      case Kind::Set:
      case Kind::Complement: {
        std::string out = kind == Kind::Complement ? "-{" : "{";
        for (size_t k = 0; k < labels.size(); ++k) out += (k ? "," : "") + name(labels[k]);
        return out + "}";
      }
    }
    return "?";
  }

 private:
  static void normalize(std::vector<SymbolId>& set) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
  }
};

// Conservative symbol-set disjointness: may report "not disjoint" for guards
// whose overlap cannot be ruled out without knowing the full alphabet.
inline bool guards_disjoint(const EdgeGuard& a, const EdgeGuard& b) {
  using Kind = EdgeGuard::Kind;
  if (a.kind == Kind::Any || b.kind == Kind::Any) return false;
  if (a.kind == Kind::Complement && b.kind == Kind::Complement) return false;
  if (a.kind == Kind::Complement || b.kind == Kind::Complement) {
    const EdgeGuard& comp = a.kind == Kind::Complement ? a : b;
    const EdgeGuard& set = a.kind == Kind::Complement ? b : a;
    return std::includes(comp.labels.begin(), comp.labels.end(), set.labels.begin(), set.labels.end());
  }
  std::vector<SymbolId> common;
  std::set_intersection(a.labels.begin(), a.labels.end(), b.labels.begin(), b.labels.end(),
                        std::back_inserter(common));
  return common.empty();
}

// What a machine state stands for.
struct StatePayload {
  enum class Kind {
    Episode,    // episode machine: one state per family member
    Antichain,  // determinized machine: set of episode-machine states, none an ancestor of another
    CoInitial,  // co-machine source
    CoPair,     // (V1, V2): covered by s iff s covers V1 and s[2, L] covers V2
    CoFinal,    // covered by s of length L iff s[1, L-1] and s[2, L] cover the episode
  };

  Kind kind = Kind::Episode;
  int episode = -1;            // Episode / CoFinal: episode-machine state id (== family index)
  std::vector<int> members;    // Antichain: sorted episode-machine state ids
  int pair_first = -1;         // CoPair: determinized-machine state ids
  int pair_second = -1;

  static StatePayload for_episode(int id) { return {Kind::Episode, id, {}, -1, -1}; }
  static StatePayload for_antichain(std::vector<int> m) { return {Kind::Antichain, -1, std::move(m), -1, -1}; }
  static StatePayload co_initial() { return {Kind::CoInitial, -1, {}, -1, -1}; }
  static StatePayload co_pair(int v1, int v2) { return {Kind::CoPair, -1, {}, v1, v2}; }
  static StatePayload co_final(int ep) { return {Kind::CoFinal, ep, {}, -1, -1}; }
};

struct MachineEdge {
  int src = -1;
  int dst = -1;
  EdgeGuard guard;
};

// A DAG finite-state machine with guarded edges. Immutable once built by one
// of the constructors below; the initial state never has incoming edges.
class LabeledMachine {
 public:
  int add_state(StatePayload payload) {
    states_.push_back(std::move(payload));
    in_.emplace_back();
    out_.emplace_back();
    return static_cast<int>(states_.size()) - 1;
  }

  void add_edge(int src, int dst, EdgeGuard guard) {
    int e = static_cast<int>(edges_.size());
    edges_.push_back({src, dst, std::move(guard)});
    in_[static_cast<size_t>(dst)].push_back(e);
    out_[static_cast<size_t>(src)].push_back(e);
  }

  void set_initial(int s) { initial_ = s; }
  int initial() const { return initial_; }
  int state_count() const { return static_cast<int>(states_.size()); }
  const StatePayload& payload(int s) const { return states_.at(static_cast<size_t>(s)); }
  const std::vector<MachineEdge>& edges() const { return edges_; }
  const MachineEdge& edge(int e) const { return edges_.at(static_cast<size_t>(e)); }
  const std::vector<int>& in_edges(int s) const { return in_.at(static_cast<size_t>(s)); }
  const std::vector<int>& out_edges(int s) const { return out_.at(static_cast<size_t>(s)); }

  // Throws if the edge relation has a cycle.
  std::vector<int> topo_order() const {
    std::vector<int> indeg(states_.size(), 0);
    for (const auto& e : edges_) indeg[static_cast<size_t>(e.dst)]++;
    std::vector<int> order;
    for (int v = 0; v < state_count(); ++v)
      if (indeg[static_cast<size_t>(v)] == 0) order.push_back(v);
    for (size_t head = 0; head < order.size(); ++head)
      for (int e : out_[static_cast<size_t>(order[head])])
        if (--indeg[static_cast<size_t>(edges_[static_cast<size_t>(e)].dst)] == 0)
          order.push_back(edges_[static_cast<size_t>(e)].dst);
    if (order.size() != states_.size()) throw std::logic_error("machine: cycle detected");
    return order;
  }

  void validate() const {
    if (initial_ < 0 || initial_ >= state_count()) throw std::logic_error("machine: bad initial state");
    if (!in_[static_cast<size_t>(initial_)].empty())
      throw std::logic_error("machine: initial state has incoming edges");
    (void)topo_order();
  }

  // Simple: the incoming guards of every state are pairwise disjoint.
  bool is_simple() const {
    for (int v = 0; v < state_count(); ++v) {
      const auto& in = in_[static_cast<size_t>(v)];
      for (size_t a = 0; a < in.size(); ++a)
        for (size_t b = a + 1; b < in.size(); ++b)
          if (!guards_disjoint(edges_[static_cast<size_t>(in[a])].guard,
                               edges_[static_cast<size_t>(in[b])].guard))
            return false;
    }
    return true;
  }

 private:
  std::vector<StatePayload> states_;
  std::vector<MachineEdge> edges_;
  std::vector<std::vector<int>> in_;
  std::vector<std::vector<int>> out_;
  int initial_ = -1;
};

// Strict-ancestor bitsets, one word-packed row per state.
class AncestorIndex {
 public:
  explicit AncestorIndex(const LabeledMachine& m) {
    words_ = (static_cast<size_t>(m.state_count()) + 63) / 64;
    masks_.assign(static_cast<size_t>(m.state_count()) * words_, 0);
    for (int v : m.topo_order()) {
      uint64_t* row = mask(v);
      for (int e : m.in_edges(v)) {
        int w = m.edge(e).src;
        const uint64_t* parent = mask(w);
        for (size_t k = 0; k < words_; ++k) row[k] |= parent[k];
        row[static_cast<size_t>(w) / 64] |= uint64_t(1) << (static_cast<size_t>(w) % 64);
      }
    }
  }

  bool is_ancestor(int anc, int of) const {
    return (mask(of)[static_cast<size_t>(anc) / 64] >> (static_cast<size_t>(anc) % 64)) & 1;
  }

 private:
  uint64_t* mask(int v) { return masks_.data() + static_cast<size_t>(v) * words_; }
  const uint64_t* mask(int v) const { return masks_.data() + static_cast<size_t>(v) * words_; }

  size_t words_ = 0;
  std::vector<uint64_t> masks_;
};

// The episode machine: one state per family member, and an edge X -> Y with
// label a whenever X results from removing an a-labeled sink of Y. State ids
// equal family indices; the initial state is the empty episode.
inline LabeledMachine build_episode_machine(const EpisodeFamily& family) {
  if (!family.is_downward_closed())
    throw std::invalid_argument("episode machine requires a downward-closed family");
  LabeledMachine m;
  for (int id = 0; id < family.size(); ++id) m.add_state(StatePayload::for_episode(id));
  m.set_initial(family.empty_index());
  std::set<std::tuple<int, int, SymbolId>> seen;
  for (int id = 0; id < family.size(); ++id) {
    const Episode& g = family[id];
    for (int v : sinks(g)) {
      Episode sub = remove_sink(g, v);
      int src = *family.find(sub);
      if (seen.insert({src, id, g.label(v)}).second) m.add_edge(src, id, EdgeGuard::single(g.label(v)));
    }
  }
  m.validate();
  return m;
}

// Labels on incoming edges of any member of V.
inline std::vector<SymbolId> incoming_labels(const LabeledMachine& m, const std::vector<int>& states) {
  std::vector<SymbolId> labels;
  for (int v : states)
    for (int e : m.in_edges(v)) labels.push_back(m.edge(e).guard.single_label());
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

// The a-labeled parents of members of V, joined with V itself, then reduced
// to the states with no strict ancestor in the set. Covering a dropped
// descendant implies covering the retained ancestor, so nothing is lost.
inline std::vector<int> parent_set(const LabeledMachine& m, const AncestorIndex& anc,
                                   const std::vector<int>& states, SymbolId a) {
  std::vector<int> pool = states;
  for (int v : states)
    for (int e : m.in_edges(v))
      if (m.edge(e).guard.single_label() == a) pool.push_back(m.edge(e).src);
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  std::vector<int> kept;
  for (int x : pool) {
    bool dominated = false;
    for (int y : pool)
      if (y != x && anc.is_ancestor(y, x)) { dominated = true; break; }
    if (!dominated) kept.push_back(x);
  }
  return kept;
}

namespace detail {

struct AntichainInterner {
  std::map<std::vector<int>, int> ids;
  std::vector<std::vector<int>> sets;

  int intern(std::vector<int> set, bool* fresh = nullptr) {
    auto it = ids.find(set);
    if (it != ids.end()) {
      if (fresh) *fresh = false;
      return it->second;
    }
    int id = static_cast<int>(sets.size());
    sets.push_back(set);
    ids.emplace(std::move(set), id);
    if (fresh) *fresh = true;
    return id;
  }
};

}  // namespace detail

// Determinizes a (monotonic) episode machine into a simple one. States are
// antichains of episode-machine states; every singleton {v} is present, and
// each state V has exactly one incoming edge per incoming label a, from
// parent_set(V; a).
inline LabeledMachine simplify(const LabeledMachine& m) {
  AncestorIndex anc(m);
  detail::AntichainInterner chains;
  std::vector<int> worklist;
  for (int v = 0; v < m.state_count(); ++v) {
    bool fresh = false;
    int id = chains.intern({v}, &fresh);
    if (fresh) worklist.push_back(id);
  }
  std::vector<std::tuple<int, int, SymbolId>> edges;  // (src chain, dst chain, label)
  for (size_t head = 0; head < worklist.size(); ++head) {
    int vid = worklist[head];
    std::vector<int> members = chains.sets[static_cast<size_t>(vid)];
    for (SymbolId a : incoming_labels(m, members)) {
      bool fresh = false;
      int wid = chains.intern(parent_set(m, anc, members, a), &fresh);
      if (fresh) worklist.push_back(wid);
      edges.emplace_back(wid, vid, a);
    }
  }

  LabeledMachine s;
  for (const auto& set : chains.sets) s.add_state(StatePayload::for_antichain(set));
  for (auto& [src, dst, a] : edges) s.add_edge(src, dst, EdgeGuard::single(a));
  s.set_initial(chains.intern({m.initial()}));
  s.validate();
  return s;
}

// The co-coverage machine built over M and S = simplify(M).
//
// Pair states (V1, V2) are covered by s exactly when s covers V1 and the
// shifted window s[2, L] covers V2; the final state of a non-source episode v
// is covered exactly when both one-symbol-shrunk windows cover v, which is the
// cross term needed for minimal-window probabilities. Edges follow
// (parent(V1; a), parent(V2; a)) -> (V1, V2), except that an edge whose
// computed source would be ({i}, {i}) while V2 = {i} starts at the plain
// initial state instead: a first symbol must exist before the shifted window
// can consume anything. ({i}, {i}) itself hangs off the initial state by an
// edge accepting any symbol.
inline LabeledMachine build_co_machine(const LabeledMachine& m, const LabeledMachine& s) {
  AncestorIndex anc(m);

  std::map<std::vector<int>, int> simple_ids;
  for (int v = 0; v < s.state_count(); ++v) simple_ids.emplace(s.payload(v).members, v);
  auto simple_of = [&](const std::vector<int>& members) {
    auto it = simple_ids.find(members);
    if (it == simple_ids.end()) throw std::logic_error("co machine: antichain missing from simple machine");
    return it->second;
  };
  auto parent_simple = [&](int sid, SymbolId a) {
    return simple_of(parent_set(m, anc, s.payload(sid).members, a));
  };
  auto inc_of = [&](int sid) { return incoming_labels(m, s.payload(sid).members); };

  int init_simple = s.initial();

  LabeledMachine co;
  int eta = co.add_state(StatePayload::co_initial());
  co.set_initial(eta);

  std::map<std::pair<int, int>, int> pair_ids;
  std::vector<int> worklist;
  auto intern_pair = [&](int v1, int v2) {
    auto it = pair_ids.find({v1, v2});
    if (it != pair_ids.end()) return it->second;
    int id = co.add_state(StatePayload::co_pair(v1, v2));
    pair_ids.emplace(std::make_pair(v1, v2), id);
    worklist.push_back(id);
    return id;
  };

  int both_init = intern_pair(init_simple, init_simple);
  co.add_edge(eta, both_init, EdgeGuard::any());

  // Seed pairs for every non-source episode state, then close under parents.
  std::vector<int> singleton(static_cast<size_t>(m.state_count()), -1);
  for (int v = 0; v < m.state_count(); ++v) singleton[static_cast<size_t>(v)] = simple_of({v});
  for (int v = 0; v < m.state_count(); ++v) {
    if (v == m.initial()) continue;
    int sv = singleton[static_cast<size_t>(v)];
    for (SymbolId a : inc_of(sv)) intern_pair(sv, parent_simple(sv, a));
    intern_pair(sv, sv);
  }

  for (size_t head = 0; head < worklist.size(); ++head) {
    int alpha = worklist[head];
    int V1 = co.payload(alpha).pair_first, V2 = co.payload(alpha).pair_second;
    if (V1 == init_simple && V2 == init_simple) continue;  // only the any-edge feeds it
    std::vector<SymbolId> labels = inc_of(V1);
    {
      std::vector<SymbolId> more = inc_of(V2);
      labels.insert(labels.end(), more.begin(), more.end());
      std::sort(labels.begin(), labels.end());
      labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    }
    for (SymbolId a : labels) {
      int w1 = parent_simple(V1, a);
      int w2 = parent_simple(V2, a);
      if (w1 == init_simple && w2 == init_simple && V2 == init_simple) {
        co.add_edge(eta, alpha, EdgeGuard::single(a));
      } else {
        co.add_edge(intern_pair(w1, w2), alpha, EdgeGuard::single(a));
      }
    }
  }

  // Final states: a-edges from ({v}, parent({v}; a)), plus an edge from
  // ({v}, {v}) on any symbol outside inc({v}).
  for (int v = 0; v < m.state_count(); ++v) {
    if (v == m.initial()) continue;
    int sv = singleton[static_cast<size_t>(v)];
    int fin = co.add_state(StatePayload::co_final(v));
    std::vector<SymbolId> inc = inc_of(sv);
    for (SymbolId a : inc) co.add_edge(pair_ids.at({sv, parent_simple(sv, a)}), fin, EdgeGuard::single(a));
    co.add_edge(pair_ids.at({sv, sv}), fin, EdgeGuard::complement(inc));
  }

  co.validate();
  return co;
}

// Reference nondeterministic interpreter: does some subsequence of s drive
// the machine from its initial state to `state`? Testing oracle only.
inline bool interpret_covers(const LabeledMachine& m, int state, const SymbolSequence& s) {
  std::vector<char> reach(static_cast<size_t>(m.state_count()), 0);
  reach[static_cast<size_t>(m.initial())] = 1;
  std::vector<int> additions;
  for (int i = 1; i <= s.length(); ++i) {
    SymbolId a = s.at1(i);
    // Expand from the pre-step set only: one input symbol fires one edge.
    additions.clear();
    for (const auto& e : m.edges())
      if (reach[static_cast<size_t>(e.src)] && !reach[static_cast<size_t>(e.dst)] && e.guard.matches(a))
        additions.push_back(e.dst);
    for (int d : additions) reach[static_cast<size_t>(d)] = 1;
  }
  return reach[static_cast<size_t>(state)] != 0;
}

// Plain-text adjacency listing for fixture comparison.
inline void dump_machine(std::ostream& out, const LabeledMachine& m, const Alphabet* alphabet = nullptr) {
  auto payload_text = [&](const StatePayload& p) {
    switch (p.kind) {
      case StatePayload::Kind::Episode: return "episode " + std::to_string(p.episode);
      case StatePayload::Kind::CoInitial: return std::string("eta");
      case StatePayload::Kind::CoFinal: return "final " + std::to_string(p.episode);
      case StatePayload::Kind::CoPair:
        return "pair (" + std::to_string(p.pair_first) + "," + std::to_string(p.pair_second) + ")";
      case StatePayload::Kind::Antichain: {
        std::string t = "{";
        for (size_t k = 0; k < p.members.size(); ++k)
          t += (k ? "," : "") + std::to_string(p.members[k]);
        return t + "}";
      }
    }
    return std::string("?");
  };
  out << "machine states=" << m.state_count() << " edges=" << m.edges().size()
      << " initial=" << m.initial() << "\n";
  for (int v = 0; v < m.state_count(); ++v) {
    out << v << ": " << payload_text(m.payload(v));
    for (int e : m.in_edges(v))
      out << "  <-(" << m.edge(e).guard.describe(alphabet) << ")- " << m.edge(e).src;
    out << "\n";
  }
}

}  // namespace epimine

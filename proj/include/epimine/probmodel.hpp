#pragma once

#include "epimine/alphabet.hpp"
#include "epimine/episode.hpp"
#include "epimine/machine.hpp"
#include "epimine/rational.hpp"

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace epimine {

// Independence model: one exact probability per symbol id, summing to exactly
// one. Ids beyond the stored range (tokens never seen in training) carry
// probability zero. Internally every probability is also kept as an integer
// numerator over a shared denominator so dynamic programs can stay in plain
// big-integer arithmetic.
class SymbolModel {
 public:
  explicit SymbolModel(std::vector<Rational> probs) : probs_(std::move(probs)) {
    Rational sum = 0;
    for (const Rational& p : probs_) {
      if (p < 0 || p > 1) throw std::invalid_argument("model: probability outside [0,1]");
      sum += p;
    }
    if (sum != 1) throw std::invalid_argument("model: probabilities must sum to exactly 1");
    den_ = 1;
    for (const Rational& p : probs_) den_ = lcm(den_, rat_den(p));
    nums_.reserve(probs_.size());
    for (const Rational& p : probs_) nums_.push_back(rat_num(p) * (den_ / rat_den(p)));
  }

  int support_size() const { return static_cast<int>(probs_.size()); }

  Rational probability(SymbolId a) const {
    if (a < 0) throw std::out_of_range("model: bad symbol id");
    if (a >= support_size()) return Rational(0);
    return probs_[static_cast<size_t>(a)];
  }

  const BigInt& common_denominator() const { return den_; }

  BigInt scaled(SymbolId a) const {
    if (a < 0) throw std::out_of_range("model: bad symbol id");
    if (a >= support_size()) return BigInt(0);
    return nums_[static_cast<size_t>(a)];
  }

 private:
  std::vector<Rational> probs_;
  BigInt den_;
  std::vector<BigInt> nums_;
};

// p(a) = count(a) / length, exact.
inline SymbolModel estimate_model(const SymbolSequence& train, int alphabet_size) {
  if (train.empty()) throw std::invalid_argument("estimate_model: empty training sequence");
  std::vector<long long> counts(static_cast<size_t>(alphabet_size), 0);
  for (SymbolId a : train.items()) {
    if (a >= alphabet_size) throw std::out_of_range("estimate_model: id outside alphabet");
    counts[static_cast<size_t>(a)]++;
  }
  std::vector<Rational> probs;
  probs.reserve(counts.size());
  for (long long c : counts) probs.push_back(Rational(c, train.length()));
  return SymbolModel(std::move(probs));
}

// Total probability of the symbols a guard matches.
inline Rational guard_mass(const SymbolModel& model, const EdgeGuard& g) {
  switch (g.kind) {
    case EdgeGuard::Kind::Any: return Rational(1);
    case EdgeGuard::Kind::Complement: {
      Rational mass = 1;
      for (SymbolId a : g.labels) mass -= model.probability(a);
      return mass;
    }
    default: {
      Rational mass = 0;
      for (SymbolId a : g.labels) mass += model.probability(a);
      return mass;
    }
  }
}

inline BigInt guard_mass_scaled(const SymbolModel& model, const EdgeGuard& g) {
  switch (g.kind) {
    case EdgeGuard::Kind::Any: return model.common_denominator();
    case EdgeGuard::Kind::Complement: {
      BigInt mass = model.common_denominator();
      for (SymbolId a : g.labels) mass -= model.scaled(a);
      return mass;
    }
    default: {
      BigInt mass = 0;
      for (SymbolId a : g.labels) mass += model.scaled(a);
      return mass;
    }
  }
}

// P(cover(k; v)) for k = 0..K over a simple, monotonic machine:
//
//   P(cover(k; v)) = P(cover(k-1; v))
//                  + sum over edges (w, v) of mass(e) * (P(cover(k-1; w)) - P(cover(k-1; v)))
//
// with the initial state identically 1. The table stores exact values as
// integer numerators over D^k. Rows can be restricted to a subset of states;
// the recurrence only ever needs the previous layer.
class CoverTable {
 public:
  CoverTable(const LabeledMachine& m, const SymbolModel& model, int max_len,
             const std::vector<char>& keep = {})
      : max_len_(max_len), den_(model.common_denominator()) {
    if (max_len < 0) throw std::invalid_argument("cover_table: negative length cap");
    if (!m.is_simple()) throw std::invalid_argument("cover_table: machine is not simple");
    int n = m.state_count();
    bool keep_all = keep.empty();
    if (!keep_all && static_cast<int>(keep.size()) != n)
      throw std::invalid_argument("cover_table: keep mask size mismatch");

    std::vector<BigInt> edge_mass;
    edge_mass.reserve(m.edges().size());
    for (const auto& e : m.edges()) edge_mass.push_back(guard_mass_scaled(model, e.guard));

    rows_.assign(static_cast<size_t>(n), {});
    den_pow_.reserve(static_cast<size_t>(max_len) + 1);
    den_pow_.push_back(BigInt(1));
    for (int k = 1; k <= max_len; ++k) den_pow_.push_back(den_pow_.back() * den_);

    std::vector<BigInt> prev(static_cast<size_t>(n), BigInt(0));
    prev[static_cast<size_t>(m.initial())] = 1;
    auto capture = [&](const std::vector<BigInt>& layer) {
      for (int v = 0; v < n; ++v)
        if (keep_all || keep[static_cast<size_t>(v)]) rows_[static_cast<size_t>(v)].push_back(layer[static_cast<size_t>(v)]);
    };
    capture(prev);
    std::vector<BigInt> curr(static_cast<size_t>(n));
    for (int k = 1; k <= max_len; ++k) {
      for (int v = 0; v < n; ++v) {
        BigInt acc = prev[static_cast<size_t>(v)] * den_;
        for (int e : m.in_edges(v))
          acc += edge_mass[static_cast<size_t>(e)] *
                 (prev[static_cast<size_t>(m.edge(e).src)] - prev[static_cast<size_t>(v)]);
        curr[static_cast<size_t>(v)] = std::move(acc);
      }
      capture(curr);
      prev.swap(curr);
    }
  }

  int max_len() const { return max_len_; }
  const BigInt& layer_scale(int k) const { return den_pow_.at(static_cast<size_t>(k)); }

  const BigInt& scaled(int state, int k) const {
    const auto& row = rows_.at(static_cast<size_t>(state));
    if (row.empty()) throw std::logic_error("cover_table: state row was not kept");
    return row.at(static_cast<size_t>(k));
  }

  Rational value(int state, int k) const { return make_rational(scaled(state, k), layer_scale(k)); }

 private:
  int max_len_;
  BigInt den_;
  std::vector<BigInt> den_pow_;
  std::vector<std::vector<BigInt>> rows_;
};

inline CoverTable cover_table(const LabeledMachine& m, const SymbolModel& model, int max_len,
                              const std::vector<char>& keep = {}) {
  return CoverTable(m, model, max_len, keep);
}

// Episode machine plus its determinized and co-coverage companions, with the
// state lookups every downstream consumer needs.
struct MachineSuite {
  LabeledMachine episode_machine;
  LabeledMachine simple;
  LabeledMachine co;
  std::vector<int> singleton_state;  // family index -> state {v} in `simple`
  std::vector<int> final_state;      // family index -> final state in `co`, -1 for the empty episode

  static MachineSuite build(const EpisodeFamily& family) {
    MachineSuite suite;
    suite.episode_machine = build_episode_machine(family);
    suite.simple = simplify(suite.episode_machine);
    suite.co = build_co_machine(suite.episode_machine, suite.simple);
    suite.singleton_state.assign(static_cast<size_t>(family.size()), -1);
    for (int v = 0; v < suite.simple.state_count(); ++v) {
      const auto& members = suite.simple.payload(v).members;
      if (members.size() == 1) suite.singleton_state[static_cast<size_t>(members[0])] = v;
    }
    suite.final_state.assign(static_cast<size_t>(family.size()), -1);
    for (int v = 0; v < suite.co.state_count(); ++v)
      if (suite.co.payload(v).kind == StatePayload::Kind::CoFinal)
        suite.final_state[static_cast<size_t>(suite.co.payload(v).episode)] = v;
    return suite;
  }
};

// P(minimal window of length k), k = 1..K, combined from the two cover
// tables:
//
//   joint(k) = P(cover(k; {G})) - 2 P(cover(k-1; {G})) + P(cover(k; final_G))
//
// Every value must come out exactly nonnegative; a negative value means the
// machines were built wrong and is reported as such.
inline std::vector<Rational> minwin_joint(const CoverTable& cov_simple, const CoverTable& cov_co,
                                          const MachineSuite& suite, const SymbolModel& model,
                                          int episode_id, int max_len) {
  if (max_len < 1) throw std::invalid_argument("minwin_joint: length cap must be >= 1");
  int sg = suite.singleton_state.at(static_cast<size_t>(episode_id));
  int fin = suite.final_state.at(static_cast<size_t>(episode_id));
  if (fin < 0) throw std::invalid_argument("minwin_joint: the empty episode has no minimal windows");
  const BigInt& den = model.common_denominator();
  std::vector<Rational> joint;
  joint.reserve(static_cast<size_t>(max_len));
  for (int k = 1; k <= max_len; ++k) {
    BigInt num = cov_simple.scaled(sg, k) - 2 * den * cov_simple.scaled(sg, k - 1) + cov_co.scaled(fin, k);
    if (num < 0) throw std::logic_error("minwin_joint: negative probability, machine construction bug");
    joint.push_back(make_rational(num, cov_simple.layer_scale(k)));
  }
  return joint;
}

// Independent route to the same joint probabilities, driven off the last
// consumed symbol instead of the co-machine. With t = s[1, k-1]:
//
//   mw(k; v) = sum over edges (w, v) of
//              mass(e) * ( r(k-1; w) - c(k-1; v) + pc(k-1; v, w) )
//
// where r(k; w) = c(k; w) - c(k-1; w) is the probability that a sequence
// covers w while its shifted suffix does not, and pc(j; V1, V2) is the
// pair coverage P(s covers V1 and s[2, j] covers V2). The pair term restores
// the correlation between "a minimal window of v starts at position 1" and
// "the shifted suffix stops covering w"; dropping it (i.e. using cumulative
// minimal-window mass alone) goes negative by k = 4 already. Pair values
// recurse through parent sets with two base layers:
//
//   pc(0; V1, V2) = [V1 = {i}][V2 = {i}]
//   pc(1; V1, V2) = [V2 = {i}] * c(1; V1)       (a length-1 shifted suffix is empty)
//   pc(k; V1, V2) = sum over symbols a of p(a) * pc(k-1; parent(V1; a), parent(V2; a))
//
// No co-machine is built here; the only shared machinery with minwin_joint is
// the determinized machine and parent_set.
inline std::vector<Rational> minwin_joint_direct(const MachineSuite& suite, const SymbolModel& model,
                                                 int episode_id, int max_len) {
  if (max_len < 1) throw std::invalid_argument("minwin_joint_direct: length cap must be >= 1");
  const LabeledMachine& m = suite.episode_machine;
  const LabeledMachine& s = suite.simple;
  if (!s.is_simple()) throw std::invalid_argument("minwin_joint_direct: machine is not simple");
  int target = suite.singleton_state.at(static_cast<size_t>(episode_id));
  if (s.payload(target).members == std::vector<int>{m.initial()})
    throw std::invalid_argument("minwin_joint_direct: the empty episode has no minimal windows");

  AncestorIndex anc(m);
  std::map<std::vector<int>, int> simple_ids;
  for (int v = 0; v < s.state_count(); ++v) simple_ids.emplace(s.payload(v).members, v);
  auto parent_simple = [&](int sid, SymbolId a) {
    return simple_ids.at(parent_set(m, anc, s.payload(sid).members, a));
  };

  const BigInt den = model.common_denominator();
  int n = s.state_count();

  // Coverage layers over the determinized machine, kept in full.
  std::vector<std::vector<BigInt>> c(static_cast<size_t>(max_len) + 1,
                                     std::vector<BigInt>(static_cast<size_t>(n), BigInt(0)));
  c[0][static_cast<size_t>(s.initial())] = 1;
  for (int k = 1; k <= max_len; ++k) {
    for (int v = 0; v < n; ++v) {
      BigInt acc = c[static_cast<size_t>(k - 1)][static_cast<size_t>(v)] * den;
      for (int e : s.in_edges(v))
        acc += model.scaled(s.edge(e).guard.single_label()) *
               (c[static_cast<size_t>(k - 1)][static_cast<size_t>(s.edge(e).src)] -
                c[static_cast<size_t>(k - 1)][static_cast<size_t>(v)]);
      c[static_cast<size_t>(k)][static_cast<size_t>(v)] = std::move(acc);
    }
  }

  // Close the needed (V1, V2) pairs under parent steps and record, per pair,
  // the labeled transitions plus the residual self mass.
  struct PairNode {
    int v1, v2;
    std::vector<std::pair<BigInt, int>> steps;  // (symbol mass, parent pair index)
    BigInt residual;
  };
  std::map<std::pair<int, int>, int> pair_ids;
  std::vector<PairNode> pairs;
  std::vector<int> worklist;
  auto intern = [&](int v1, int v2) {
    auto it = pair_ids.find({v1, v2});
    if (it != pair_ids.end()) return it->second;
    int id = static_cast<int>(pairs.size());
    pairs.push_back({v1, v2, {}, BigInt(0)});
    pair_ids.emplace(std::make_pair(v1, v2), id);
    worklist.push_back(id);
    return id;
  };
  for (int e : s.in_edges(target)) intern(target, s.edge(e).src);
  for (size_t head = 0; head < worklist.size(); ++head) {
    int id = worklist[head];
    int v1 = pairs[static_cast<size_t>(id)].v1, v2 = pairs[static_cast<size_t>(id)].v2;
    std::vector<SymbolId> labels = incoming_labels(m, s.payload(v1).members);
    {
      auto more = incoming_labels(m, s.payload(v2).members);
      labels.insert(labels.end(), more.begin(), more.end());
      std::sort(labels.begin(), labels.end());
      labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    }
    BigInt moved = 0;
    std::vector<std::pair<BigInt, int>> steps;
    for (SymbolId a : labels) {
      BigInt mass = model.scaled(a);
      moved += mass;
      steps.push_back({std::move(mass), intern(parent_simple(v1, a), parent_simple(v2, a))});
    }
    pairs[static_cast<size_t>(id)].steps = std::move(steps);
    pairs[static_cast<size_t>(id)].residual = den - moved;
  }

  int init = s.initial();
  std::vector<BigInt> pc_prev(pairs.size()), pc_curr(pairs.size());
  std::vector<std::vector<BigInt>> pc_layers;  // layer k, k = 0..max_len-1
  for (size_t id = 0; id < pairs.size(); ++id)
    pc_prev[id] = (pairs[id].v1 == init && pairs[id].v2 == init) ? 1 : 0;
  pc_layers.push_back(pc_prev);
  for (int k = 1; k < max_len; ++k) {
    if (k == 1) {
      for (size_t id = 0; id < pairs.size(); ++id)
        pc_curr[id] = pairs[id].v2 == init ? c[1][static_cast<size_t>(pairs[id].v1)] : BigInt(0);
    } else {
      for (size_t id = 0; id < pairs.size(); ++id) {
        BigInt acc = pairs[id].residual * pc_prev[id];
        for (const auto& [mass, parent] : pairs[id].steps) acc += mass * pc_prev[static_cast<size_t>(parent)];
        pc_curr[id] = std::move(acc);
      }
    }
    pc_layers.push_back(pc_curr);
    pc_prev.swap(pc_curr);
  }

  BigInt scale(1);
  std::vector<Rational> joint;
  joint.reserve(static_cast<size_t>(max_len));
  for (int k = 1; k <= max_len; ++k) {
    scale *= den;
    BigInt num = 0;
    for (int e : s.in_edges(target)) {
      int w = s.edge(e).src;
      BigInt r_prev = k - 1 == 0 ? c[0][static_cast<size_t>(w)]
                                 : c[static_cast<size_t>(k - 1)][static_cast<size_t>(w)] -
                                       den * c[static_cast<size_t>(k - 2)][static_cast<size_t>(w)];
      const BigInt& pair_term =
          pc_layers[static_cast<size_t>(k - 1)][static_cast<size_t>(pair_ids.at({target, w}))];
      num += model.scaled(s.edge(e).guard.single_label()) *
             (r_prev - c[static_cast<size_t>(k - 1)][static_cast<size_t>(target)] + pair_term);
    }
    if (num < 0) throw std::logic_error("minwin_joint_direct: negative probability");
    joint.push_back(make_rational(num, scale));
  }
  return joint;
}

// Normalized minimal-window length distribution.
struct WindowDistribution {
  std::vector<Rational> joint;       // joint[k-1] = P(minimal window and length k)
  Rational mass;                     // P(minimal window at all), within the cap
  std::vector<Rational> normalized;  // joint / mass

  int max_len() const { return static_cast<int>(joint.size()); }

  int support_size() const {
    int n = 0;
    for (const Rational& j : joint) n += j > 0 ? 1 : 0;
    return n;
  }
};

inline Rational joint_mass(const std::vector<Rational>& joint) {
  Rational mass = 0;
  for (const Rational& j : joint) mass += j;
  return mass;
}

inline WindowDistribution normalize(std::vector<Rational> joint) {
  WindowDistribution dist;
  dist.mass = joint_mass(joint);
  if (dist.mass == 0) throw std::runtime_error("unreachable episode under model");
  dist.normalized.reserve(joint.size());
  for (const Rational& j : joint) dist.normalized.push_back(j / dist.mass);
  dist.joint = std::move(joint);
  return dist;
}

// Exact moments of the per-position window variables: mass = P(a minimal
// window starts here), first = E[length-or-zero], mean = first/mass,
// second = E[(length-or-zero)^2].
struct Moments {
  Rational mass;
  Rational first;
  Rational mean;
  Rational second;
};

inline Moments moments(const WindowDistribution& dist) {
  if (dist.mass == 0) throw std::invalid_argument("moments: zero-mass distribution");
  Moments out;
  out.mass = dist.mass;
  out.first = 0;
  out.second = 0;
  for (int k = 1; k <= dist.max_len(); ++k) {
    out.first += Rational(k) * dist.joint[static_cast<size_t>(k - 1)];
    out.second += Rational(k) * Rational(k) * dist.joint[static_cast<size_t>(k - 1)];
  }
  out.mean = out.first / out.mass;
  return out;
}

// Model file: one "symbol<TAB>numerator<TAB>denominator" line per symbol.
inline void save_model(std::ostream& out, const SymbolModel& model, const Alphabet& alphabet) {
  for (SymbolId a = 0; a < model.support_size(); ++a) {
    Rational p = model.probability(a);
    if (p == 0) continue;
    out << alphabet.token(a) << "\t" << rat_num(p) << "\t" << rat_den(p) << "\n";
  }
}

inline SymbolModel load_model(std::istream& in, Alphabet& alphabet) {
  std::vector<std::pair<SymbolId, Rational>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string token, num, den;
    if (!std::getline(ls, token, '\t') || !std::getline(ls, num, '\t') || !std::getline(ls, den))
      throw std::runtime_error("model file, line " + std::to_string(line_no) + ": expected symbol<TAB>num<TAB>den");
    entries.push_back({alphabet.intern(token), make_rational(BigInt(num), BigInt(den))});
  }
  std::vector<Rational> probs(static_cast<size_t>(alphabet.size()), Rational(0));
  for (auto& [id, p] : entries) {
    if (probs[static_cast<size_t>(id)] != 0)
      throw std::runtime_error("model file: duplicate symbol '" + alphabet.token(id) + "'");
    probs[static_cast<size_t>(id)] = p;
  }
  return SymbolModel(std::move(probs));  // the sum-to-1 check lives in the constructor
}

}  // namespace epimine

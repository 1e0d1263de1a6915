#pragma once

#include "epimine/alphabet.hpp"
#include "epimine/datagen.hpp"
#include "epimine/episode.hpp"
#include "epimine/probmodel.hpp"
#include "epimine/rational.hpp"

#include <string>
#include <vector>

namespace epimine::testutil {

// Interns "a", "b", "c", ... and returns their ids.
inline std::vector<SymbolId> letters(Alphabet& alphabet, int count) {
  std::vector<SymbolId> ids;
  for (int i = 0; i < count; ++i) ids.push_back(alphabet.intern(std::string(1, static_cast<char>('a' + i))));
  return ids;
}

inline SymbolSequence random_sequence(SeededRng& rng, int length, int alphabet_size) {
  std::vector<SymbolId> items;
  items.reserve(static_cast<size_t>(length));
  for (int i = 0; i < length; ++i)
    items.push_back(static_cast<SymbolId>(rng.next_below(static_cast<std::uint64_t>(alphabet_size))));
  return SymbolSequence(std::move(items));
}

// Random labeled DAG; node indices double as a topological order, which
// reaches every isomorphism class.
inline Episode random_episode(SeededRng& rng, int max_nodes, int alphabet_size) {
  int n = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_nodes)));
  std::vector<SymbolId> labels;
  for (int v = 0; v < n; ++v)
    labels.push_back(static_cast<SymbolId>(rng.next_below(static_cast<std::uint64_t>(alphabet_size))));
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.next_below(3) == 0) edges.push_back({i, j});
  return Episode(std::move(labels), std::move(edges));
}

// All sequences of the given length over ids 0..alphabet_size-1.
inline std::vector<SymbolSequence> all_sequences(int length, int alphabet_size) {
  std::vector<SymbolSequence> out;
  std::vector<SymbolId> item(static_cast<size_t>(length), 0);
  while (true) {
    out.push_back(SymbolSequence(item));
    int pos = length - 1;
    while (pos >= 0 && item[static_cast<size_t>(pos)] == alphabet_size - 1) {
      item[static_cast<size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    item[static_cast<size_t>(pos)]++;
  }
  return out;
}

// Every distinct episode (by canonical form) with up to `max_nodes` nodes
// over the given alphabet: all acyclic edge subsets, all labelings.
inline std::vector<Episode> all_episodes(int max_nodes, int alphabet_size) {
  std::vector<Episode> out;
  std::vector<std::string> seen;
  auto add = [&](Episode g) {
    std::string key = canonical_key(g);
    for (const auto& k : seen)
      if (k == key) return;
    seen.push_back(key);
    out.push_back(std::move(g));
  };
  for (int n = 1; n <= max_nodes; ++n) {
    std::vector<std::pair<int, int>> slots;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) slots.push_back({i, j});
    for (unsigned mask = 0; mask < (1u << slots.size()); ++mask) {
      std::vector<std::pair<int, int>> edges;
      for (size_t b = 0; b < slots.size(); ++b)
        if (mask & (1u << b)) edges.push_back(slots[b]);
      std::vector<SymbolId> labels(static_cast<size_t>(n), 0);
      while (true) {
        add(Episode(labels, edges));
        int pos = n - 1;
        while (pos >= 0 && labels[static_cast<size_t>(pos)] == alphabet_size - 1) {
          labels[static_cast<size_t>(pos)] = 0;
          --pos;
        }
        if (pos < 0) break;
        labels[static_cast<size_t>(pos)]++;
      }
    }
  }
  return out;
}

// Exact probability that a random length-`len` sequence is a minimal window
// of g, by full enumeration of the symbol space. Independent of the machine
// pipelines: only the brute-force coverage definition is used.
inline Rational minwin_probability_oracle(const Episode& g, const SymbolModel& model, int len) {
  Rational total = 0;
  for (const SymbolSequence& s : all_sequences(len, model.support_size())) {
    if (!covers(s, g)) continue;
    if (len > 1 && covers(s.window(1, len - 1), g)) continue;
    if (len > 1 && covers(s.window(2, len), g)) continue;
    if (len == 1 && g.is_empty()) continue;
    Rational weight = 1;
    for (int i = 1; i <= len; ++i) weight *= model.probability(s.at1(i));
    total += weight;
  }
  return total;
}

inline Rational rational_pow(const Rational& base, int exp) {
  Rational out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

}  // namespace epimine::testutil

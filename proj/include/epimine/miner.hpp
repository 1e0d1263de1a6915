#pragma once

#include "epimine/alphabet.hpp"
#include "epimine/episode.hpp"
#include "epimine/winscan.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace epimine {

struct MinerConfig {
  long long min_windows = 1;  // keep an episode when its non-overlap count strictly exceeds this
  int max_window = 1;
  bool mine_parallel = true;
  bool mine_serial = true;
  int max_nodes = 4;

  void validate() const {
    if (min_windows < 1) throw std::invalid_argument("miner: min windows must be >= 1");
    if (max_window < 1) throw std::invalid_argument("miner: window cap must be >= 1");
    if (max_nodes < 1) throw std::invalid_argument("miner: node cap must be >= 1");
  }
};

struct MineResult {
  EpisodeFamily family;             // downward closure of every kept candidate
  std::vector<int> candidate_ids;   // family indices of the mined episodes, discovery order
  std::vector<long long> counts;    // greedy non-overlap window counts, parallel to candidate_ids
};

namespace detail {

// Greedy non-overlap counts for one batch of candidate episodes. The whole
// batch is scanned in a single pass over the sequence; greedy selection is a
// running frontier per episode since windows arrive ordered by start.
inline std::vector<long long> count_nonoverlap(const SymbolSequence& s, int alphabet_size,
                                               const std::vector<Episode>& batch, int max_window) {
  EpisodeFamily family = closure(batch);
  WindowScanner scanner(family, alphabet_size);
  std::vector<long long> counts(static_cast<size_t>(family.size()), 0);
  std::vector<int> frontier(static_cast<size_t>(family.size()), 0);
  scanner.scan(s, max_window, [&](int id, int start, int end) {
    if (start > frontier[static_cast<size_t>(id)]) {
      frontier[static_cast<size_t>(id)] = end;
      counts[static_cast<size_t>(id)]++;
    }
  });
  std::vector<long long> out;
  out.reserve(batch.size());
  for (const Episode& g : batch) out.push_back(counts[static_cast<size_t>(*family.find(g))]);
  return out;
}

inline std::vector<std::vector<SymbolId>> join_parallel(const std::set<std::vector<SymbolId>>& frequent) {
  std::vector<std::vector<SymbolId>> out;
  for (auto a = frequent.begin(); a != frequent.end(); ++a) {
    for (auto b = std::next(a); b != frequent.end(); ++b) {
      if (!std::equal(a->begin(), a->end() - 1, b->begin(), b->end() - 1)) break;
      std::vector<SymbolId> candidate = *a;
      candidate.push_back(b->back());
      out.push_back(std::move(candidate));
    }
    // self-join grows a repeated symbol, e.g. {a} x {a} -> {a,a}
    std::vector<SymbolId> doubled = *a;
    doubled.push_back(a->back());
    out.push_back(std::move(doubled));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::vector<std::vector<SymbolId>> join_serial(const std::set<std::vector<SymbolId>>& frequent) {
  std::map<std::vector<SymbolId>, std::vector<const std::vector<SymbolId>*>> by_prefix;
  for (const auto& chain : frequent)
    by_prefix[std::vector<SymbolId>(chain.begin(), chain.end() - 1)].push_back(&chain);
  std::vector<std::vector<SymbolId>> out;
  for (const auto& chain : frequent) {
    auto it = by_prefix.find(std::vector<SymbolId>(chain.begin() + 1, chain.end()));
    if (it == by_prefix.end()) continue;
    for (const auto* other : it->second) {
      std::vector<SymbolId> candidate = chain;
      candidate.push_back(other->back());
      out.push_back(std::move(candidate));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Every single-element deletion must itself be frequent.
inline bool deletions_frequent(const std::vector<SymbolId>& rep,
                               const std::set<std::vector<SymbolId>>& frequent) {
  for (size_t i = 0; i < rep.size(); ++i) {
    std::vector<SymbolId> sub;
    sub.reserve(rep.size() - 1);
    for (size_t j = 0; j < rep.size(); ++j)
      if (j != i) sub.push_back(rep[j]);
    if (!frequent.count(sub)) return false;
  }
  return true;
}

}  // namespace detail

enum class EpisodeClass { Parallel, Serial };

// Apriori candidate generation: joins level-k representations (sorted
// multisets for parallel episodes, chains for serial ones) into level-(k+1)
// candidates and prunes any whose single-element deletions are not all
// frequent. Deleting an element of a chain keeps the transitively implied
// order, so the deletions stay inside the class.
inline std::vector<std::vector<SymbolId>> generate_level(
    const std::set<std::vector<SymbolId>>& frequent, EpisodeClass cls) {
  std::vector<std::vector<SymbolId>> candidates = cls == EpisodeClass::Parallel
                                                      ? detail::join_parallel(frequent)
                                                      : detail::join_serial(frequent);
  candidates.erase(std::remove_if(candidates.begin(), candidates.end(),
                                  [&](const std::vector<SymbolId>& rep) {
                                    return !detail::deletions_frequent(rep, frequent);
                                  }),
                   candidates.end());
  return candidates;
}

// Level-wise discovery of parallel (label multiset) and serial (label chain)
// episodes whose greedy non-overlapping minimal-window count strictly exceeds
// the threshold. The count is antimonotone under single-node deletion, which
// justifies the candidate pruning.
inline MineResult mine(const SymbolSequence& s, const MinerConfig& cfg, int alphabet_size) {
  cfg.validate();
  if (s.empty()) throw std::invalid_argument("mine: empty sequence");

  std::vector<Episode> kept;
  std::vector<long long> kept_counts;

  // Level 1 is shared by both classes: a one-node chain is a one-node multiset.
  std::vector<SymbolId> seen(s.items());
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  std::vector<Episode> singles;
  for (SymbolId a : seen) singles.push_back(Episode::single(a));
  std::vector<long long> counts = detail::count_nonoverlap(s, alphabet_size, singles, cfg.max_window);
  std::set<std::vector<SymbolId>> frequent_single;
  for (size_t i = 0; i < singles.size(); ++i) {
    if (counts[i] > cfg.min_windows) {
      frequent_single.insert({seen[i]});
      kept.push_back(singles[i]);
      kept_counts.push_back(counts[i]);
    }
  }

  struct ClassPlan {
    bool enabled;
    EpisodeClass cls;
  };
  for (ClassPlan plan : {ClassPlan{cfg.mine_parallel, EpisodeClass::Parallel},
                         ClassPlan{cfg.mine_serial, EpisodeClass::Serial}}) {
    if (!plan.enabled) continue;
    bool parallel = plan.cls == EpisodeClass::Parallel;
    std::set<std::vector<SymbolId>> frequent = frequent_single;
    for (int level = 2; level <= cfg.max_nodes && !frequent.empty(); ++level) {
      std::vector<std::vector<SymbolId>> candidates = generate_level(frequent, plan.cls);
      if (candidates.empty()) break;
      std::vector<Episode> episodes;
      episodes.reserve(candidates.size());
      for (const auto& rep : candidates)
        episodes.push_back(parallel ? Episode::parallel(rep) : Episode::serial(rep));
      counts = detail::count_nonoverlap(s, alphabet_size, episodes, cfg.max_window);
      std::set<std::vector<SymbolId>> next;
      for (size_t i = 0; i < episodes.size(); ++i) {
        if (counts[i] > cfg.min_windows) {
          next.insert(candidates[i]);
          kept.push_back(episodes[i]);
          kept_counts.push_back(counts[i]);
        }
      }
      frequent.swap(next);
    }
  }

  MineResult out;
  out.family = closure(kept);
  for (size_t i = 0; i < kept.size(); ++i) {
    out.candidate_ids.push_back(*out.family.find(kept[i]));
    out.counts.push_back(kept_counts[i]);
  }
  return out;
}

}  // namespace epimine

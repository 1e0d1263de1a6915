#pragma once

#include "epimine/alphabet.hpp"
#include "epimine/episode.hpp"
#include "epimine/machine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace epimine {

// All minimal windows (length <= K) per family episode, in scan order.
struct ScanResult {
  std::vector<std::vector<WindowSpan>> windows;  // indexed by family id
};

struct WindowStats {
  long long count = 0;
  long long total_length = 0;

  double mean() const { return count == 0 ? std::nan("") : static_cast<double>(total_length) / static_cast<double>(count); }
};

// Single left-to-right pass discovering every minimal window of every family
// member. Per episode X the scanner keeps ind(X), the start of the most
// recent window in which X is covered; ind of the empty episode is always the
// current position. On symbol s_i each edge (X, Y) labeled s_i can push
// ind(X) into ind(Y); when ind(Y) grows, [ind(Y), i] is a fresh minimal
// window of Y. Windows longer than the cap are discovered and dropped: the
// index update must still happen or later windows would be missed.
//
// Edges are grouped by target and the targets are visited sources-last
// (reverse topological order), so an episode consumes the pre-update index of
// its sub-episodes at the current position.
class WindowScanner {
 public:
  WindowScanner(const EpisodeFamily& family, int alphabet_size)
      : family_(&family), machine_(build_episode_machine(family)) {
    std::vector<int> rank(static_cast<size_t>(machine_.state_count()), 0);
    std::vector<int> topo = machine_.topo_order();
    for (size_t k = 0; k < topo.size(); ++k) rank[static_cast<size_t>(topo[k])] = static_cast<int>(k);

    by_label_.assign(static_cast<size_t>(alphabet_size), {});
    std::vector<int> order(machine_.edges().size());
    for (size_t e = 0; e < order.size(); ++e) order[e] = static_cast<int>(e);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const auto& ea = machine_.edge(a);
      const auto& eb = machine_.edge(b);
      if (ea.dst != eb.dst) return rank[static_cast<size_t>(ea.dst)] > rank[static_cast<size_t>(eb.dst)];
      return ea.src < eb.src;
    });
    for (int e : order) {
      SymbolId a = machine_.edge(e).guard.single_label();
      if (a >= 0 && a < alphabet_size)
        by_label_[static_cast<size_t>(a)].push_back({machine_.edge(e).src, machine_.edge(e).dst});
    }
  }

  const LabeledMachine& machine() const { return machine_; }

  // on_window(episode_id, start, end) is invoked for every minimal window of
  // length <= max_len, grouped by position and by episode in reverse
  // topological order.
  void scan(const SymbolSequence& s, int max_len,
            const std::function<void(int, int, int)>& on_window) const {
    if (max_len < 1) throw std::invalid_argument("scan: window cap must be >= 1");
    std::vector<int> ind(static_cast<size_t>(machine_.state_count()), 0);
    int empty_id = family_->empty_index();
    for (int i = 1; i <= s.length(); ++i) {
      ind[static_cast<size_t>(empty_id)] = i;
      SymbolId a = s.at1(i);
      if (a < 0 || a >= static_cast<SymbolId>(by_label_.size())) continue;
      const auto& edges = by_label_[static_cast<size_t>(a)];
      for (size_t e = 0; e < edges.size();) {
        int target = edges[e].second;
        int best = ind[static_cast<size_t>(target)];
        size_t run = e;
        while (run < edges.size() && edges[run].second == target) {
          best = std::max(best, ind[static_cast<size_t>(edges[run].first)]);
          ++run;
        }
        if (best > ind[static_cast<size_t>(target)]) {
          ind[static_cast<size_t>(target)] = best;
          if (i - best + 1 <= max_len) on_window(target, best, i);
        }
        e = run;
      }
    }
  }

  ScanResult scan_collect(const SymbolSequence& s, int max_len) const {
    ScanResult out;
    out.windows.assign(static_cast<size_t>(family_->size()), {});
    scan(s, max_len, [&](int id, int start, int end) {
      out.windows[static_cast<size_t>(id)].push_back({start, end});
    });
    return out;
  }

 private:
  const EpisodeFamily* family_;
  LabeledMachine machine_;
  std::vector<std::vector<std::pair<int, int>>> by_label_;  // label -> (src, dst) runs by target
};

inline ScanResult scan(const SymbolSequence& s, const EpisodeFamily& family, int max_len,
                       int alphabet_size) {
  return WindowScanner(family, alphabet_size).scan_collect(s, max_len);
}

// Greedy selection: keep the first remaining window, drop everything that
// shares an index with it, repeat. On minimal-window lists (strictly
// increasing starts and ends, never nested) this attains the maximum
// non-overlapping subset size.
inline std::vector<WindowSpan> greedy_nonoverlap(const std::vector<WindowSpan>& windows) {
  std::vector<WindowSpan> out;
  int frontier = 0;
  int prev_start = 0;
  for (const WindowSpan& w : windows) {
    if (w.start < prev_start) throw std::invalid_argument("greedy_nonoverlap: windows not ordered by start");
    prev_start = w.start;
    if (w.start > frontier) {
      out.push_back(w);
      frontier = w.end;
    }
  }
  return out;
}

inline WindowStats stats(const std::vector<WindowSpan>& windows) {
  WindowStats out;
  for (const WindowSpan& w : windows) {
    out.count++;
    out.total_length += w.length();
  }
  return out;
}

}  // namespace epimine

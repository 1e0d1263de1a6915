#include "epimine/winscan.hpp"

#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

using namespace epimine;

namespace {

// Largest non-overlapping subset by exhaustive search.
size_t max_nonoverlap(const std::vector<WindowSpan>& windows) {
  size_t best = 0;
  for (unsigned mask = 0; mask < (1u << windows.size()); ++mask) {
    std::vector<WindowSpan> picked;
    for (size_t b = 0; b < windows.size(); ++b)
      if (mask & (1u << b)) picked.push_back(windows[b]);
    bool ok = true;
    for (size_t i = 0; i + 1 < picked.size() && ok; ++i)
      for (size_t j = i + 1; j < picked.size() && ok; ++j)
        ok = picked[i].end < picked[j].start || picked[j].end < picked[i].start;
    if (ok) best = std::max(best, picked.size());
  }
  return best;
}

}  // namespace

TEST_CASE("scan reproduces the worked chain example") {
  Alphabet alphabet;
  auto ids = testutil::letters(alphabet, 3);
  SymbolSequence s = sequence_from_chars("accbabacb", alphabet);
  EpisodeFamily family = closure({Episode::serial({ids[0], ids[1]})});
  ScanResult result = scan(s, family, 10, alphabet.size());
  int id = *family.find(Episode::serial({ids[0], ids[1]}));
  const auto& windows = result.windows[static_cast<size_t>(id)];
  REQUIRE(windows.size() == 3);
  CHECK(windows[0] == WindowSpan{1, 4});
  CHECK(windows[1] == WindowSpan{5, 6});
  CHECK(windows[2] == WindowSpan{7, 9});

  WindowStats st = stats(windows);
  CHECK(st.count == 3);
  CHECK(st.total_length == 9);
  CHECK(st.mean() == 3.0);
}

TEST_CASE("scan of 'aba' for the parallel pair family") {
  Alphabet alphabet;
  auto ids = testutil::letters(alphabet, 2);
  SymbolSequence s = sequence_from_chars("aba", alphabet);
  EpisodeFamily family = closure({Episode::parallel({ids[0], ids[1]})});
  ScanResult result = scan(s, family, 10, alphabet.size());

  const auto& pair_windows = result.windows[static_cast<size_t>(*family.find(Episode::parallel({ids[0], ids[1]})))];
  REQUIRE(pair_windows.size() == 2);
  CHECK(pair_windows[0] == WindowSpan{1, 2});
  CHECK(pair_windows[1] == WindowSpan{2, 3});
  CHECK(greedy_nonoverlap(pair_windows).size() == 1);

  const auto& b_windows = result.windows[static_cast<size_t>(*family.find(Episode::single(ids[1])))];
  REQUIRE(b_windows.size() == 1);
  CHECK(b_windows[0] == WindowSpan{2, 2});
}

TEST_CASE("scan equals the brute-force oracle on random instances") {
  SeededRng rng(2024);
  for (int round = 0; round < 200; ++round) {
    int alphabet_size = 2 + static_cast<int>(rng.next_below(3));
    int length = 5 + static_cast<int>(rng.next_below(46));
    int max_len = 1 + static_cast<int>(rng.next_below(12));

    EpisodeFamily family;
    for (int tries = 0; family.size() <= 1 || tries < 2; ++tries) {
      std::vector<Episode> roots;
      roots.push_back(testutil::random_episode(rng, 3, alphabet_size));
      if (rng.next_below(2) == 0) roots.push_back(testutil::random_episode(rng, 3, alphabet_size));
      for (int id = 1; id < family.size(); ++id) roots.push_back(family[id]);
      EpisodeFamily merged = closure(roots);
      if (merged.size() > 10) break;
      family = std::move(merged);
    }

    SymbolSequence s = testutil::random_sequence(rng, length, alphabet_size);
    ScanResult result = scan(s, family, max_len, alphabet_size);
    for (int id = 0; id < family.size(); ++id) {
      INFO("round " << round << " episode " << family.key(id) << " max_len " << max_len);
      CHECK(result.windows[static_cast<size_t>(id)] == brute_minimal_windows(s, family[id], max_len));
    }
  }
}

TEST_CASE("greedy selection fixtures") {
  CHECK(greedy_nonoverlap({{1, 2}, {2, 3}}) == std::vector<WindowSpan>{{1, 2}});
  CHECK(greedy_nonoverlap({{1, 4}, {5, 6}, {7, 9}}) == std::vector<WindowSpan>{{1, 4}, {5, 6}, {7, 9}});
  CHECK(greedy_nonoverlap({}).empty());
  CHECK_THROWS_AS(greedy_nonoverlap({{5, 6}, {1, 2}}), std::invalid_argument);
}

TEST_CASE("greedy matches the exhaustive maximum on minimal-window shapes") {
  SeededRng rng(71);
  for (int round = 0; round < 500; ++round) {
    // Windows shaped like minimal windows: strictly increasing starts and
    // ends, no nesting.
    int count = static_cast<int>(rng.next_below(13));
    std::vector<WindowSpan> windows;
    int start = 0, end = 0;
    for (int w = 0; w < count; ++w) {
      start += 1 + static_cast<int>(rng.next_below(4));
      end = std::max(end + 1, start + static_cast<int>(rng.next_below(5)));
      windows.push_back({start, end});
    }
    CHECK(greedy_nonoverlap(windows).size() == max_nonoverlap(windows));
  }
}

TEST_CASE("window stats") {
  WindowStats empty = stats({});
  CHECK(empty.count == 0);
  CHECK(empty.total_length == 0);
  CHECK(std::isnan(empty.mean()));

  WindowStats one = stats({{2, 2}});
  CHECK(one.count == 1);
  CHECK(one.total_length == 1);
  CHECK(one.mean() == 1.0);
}

TEST_CASE("non-overlap counts are antimonotone under sink removal") {
  SeededRng rng(123);
  for (int round = 0; round < 120; ++round) {
    Episode g = testutil::random_episode(rng, 4, 3);
    if (g.is_empty()) continue;
    EpisodeFamily family = closure({g});
    SymbolSequence s = testutil::random_sequence(rng, 30, 3);
    ScanResult result = scan(s, family, 8, 3);
    auto count = [&](int id) { return greedy_nonoverlap(result.windows[static_cast<size_t>(id)]).size(); };
    int gid = *family.find(g);
    for (int id = 1; id < family.size(); ++id) {
      if (id == gid) continue;
      // Every family member other than g itself is reachable from g by sink
      // removals, so it must have at least as many non-overlapping windows.
      CHECK(count(id) >= count(gid));
    }
  }
}

TEST_CASE("the window cap drops long windows but keeps later short ones") {
  Alphabet alphabet;
  auto ids = testutil::letters(alphabet, 3);
  // a ... b far apart, then a tight a b: with a small cap only the tight
  // window may be reported, and it must still be found.
  SymbolSequence s = sequence_from_chars("accccbab", alphabet);
  EpisodeFamily family = closure({Episode::serial({ids[0], ids[1]})});
  int id = *family.find(Episode::serial({ids[0], ids[1]}));

  ScanResult wide = scan(s, family, 10, alphabet.size());
  REQUIRE(wide.windows[static_cast<size_t>(id)].size() == 2);
  CHECK(wide.windows[static_cast<size_t>(id)][0] == WindowSpan{1, 6});
  CHECK(wide.windows[static_cast<size_t>(id)][1] == WindowSpan{7, 8});

  ScanResult tight = scan(s, family, 2, alphabet.size());
  REQUIRE(tight.windows[static_cast<size_t>(id)].size() == 1);
  CHECK(tight.windows[static_cast<size_t>(id)][0] == WindowSpan{7, 8});
}

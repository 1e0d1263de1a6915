#pragma once

#include "epimine/alphabet.hpp"
#include "epimine/probmodel.hpp"
#include "epimine/rational.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace epimine {

// splitmix64: 64-bit state, period 2^64, identical streams on every platform
// for a given seed. Standard-library distributions are avoided on purpose;
// their output is implementation-defined.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n) by rejection.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("rng: empty range");
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    return r % n;
  }

 private:
  std::uint64_t state_;
};

// Interns "0".."size-1" so generated sequences share ids with digit tokens.
inline std::vector<SymbolId> digit_ids(Alphabet& alphabet, int size) {
  std::vector<SymbolId> ids;
  ids.reserve(static_cast<size_t>(size));
  for (int d = 0; d < size; ++d) ids.push_back(alphabet.intern(std::to_string(d)));
  return ids;
}

// I.i.d. uniform symbols over a digit alphabet.
inline SymbolSequence gen_uniform(int alphabet_size, int length, std::uint64_t seed, Alphabet& alphabet) {
  if (length < 1) throw std::invalid_argument("gen_uniform: length must be >= 1");
  if (alphabet_size < 1) throw std::invalid_argument("gen_uniform: alphabet must be nonempty");
  auto ids = digit_ids(alphabet, alphabet_size);
  SeededRng rng(seed);
  std::vector<SymbolId> items;
  items.reserve(static_cast<size_t>(length));
  for (int i = 0; i < length; ++i) items.push_back(ids[rng.next_below(static_cast<std::uint64_t>(alphabet_size))]);
  return SymbolSequence(std::move(items));
}

// Digits 0-9 where the upper block trails the lower one: a fair coin picks
// block {0..4} (uniform) or block {5..9}, and there digit i is weighted by
// 0.5^x with x the gap back to the last occurrence of i-5. Before i-5 has
// ever occurred the weight is zero; if all five weights are zero the draw
// falls back to uniform over {5..9}. Distances are measured against the
// position about to be emitted, 1-based.
inline SymbolSequence gen_correlated(int length, std::uint64_t seed, Alphabet& alphabet) {
  if (length < 1) throw std::invalid_argument("gen_correlated: length must be >= 1");
  auto ids = digit_ids(alphabet, 10);
  SeededRng rng(seed);
  std::vector<int> last(5, 0);  // 1-based position of the last 0..4 digit, 0 = never
  std::vector<SymbolId> items;
  items.reserve(static_cast<size_t>(length));
  double weight[5];
  for (int pos = 1; pos <= length; ++pos) {
    int digit;
    if (rng.next_u64() & 1) {
      digit = static_cast<int>(rng.next_below(5));
    } else {
      double total = 0;
      for (int d = 0; d < 5; ++d) {
        weight[d] = last[static_cast<size_t>(d)] == 0
                        ? 0.0
                        : std::pow(0.5, pos - last[static_cast<size_t>(d)]);
        total += weight[d];
      }
      if (total == 0) {
        digit = 5 + static_cast<int>(rng.next_below(5));
      } else {
        double u = rng.next_double() * total;
        int d = 0;
        while (d < 4 && u >= weight[d]) u -= weight[d], ++d;
        digit = 5 + d;
      }
    }
    if (digit < 5) last[static_cast<size_t>(digit)] = pos;
    items.push_back(ids[static_cast<size_t>(digit)]);
  }
  return SymbolSequence(std::move(items));
}

// I.i.d. draws with the model's exact probabilities: a 64-bit uniform draw is
// compared against the exact cumulative fractions, so each symbol's
// probability is matched to within 2^-64.
inline SymbolSequence sample_model(const SymbolModel& model, int length, std::uint64_t seed) {
  if (length < 1) throw std::invalid_argument("sample_model: length must be >= 1");
  const BigInt& den = model.common_denominator();
  // Cumulative thresholds scaled to the 2^64 grid: symbol a is drawn when
  // r < ceil(cum_a * 2^64 / den) fails for a-1 and holds for a.
  std::vector<BigInt> cutoff;
  BigInt cum = 0;
  BigInt two64 = BigInt(1) << 64;
  for (SymbolId a = 0; a < model.support_size(); ++a) {
    cum += model.scaled(a);
    cutoff.push_back((cum * two64 + den - 1) / den);
  }
  SeededRng rng(seed);
  std::vector<SymbolId> items;
  items.reserve(static_cast<size_t>(length));
  for (int i = 0; i < length; ++i) {
    BigInt r(rng.next_u64());
    int lo = 0, hi = model.support_size() - 1;
    while (lo < hi) {
      int mid = (lo + hi) / 2;
      if (r < cutoff[static_cast<size_t>(mid)]) hi = mid;
      else lo = mid + 1;
    }
    items.push_back(lo);
  }
  return SymbolSequence(std::move(items));
}

}  // namespace epimine

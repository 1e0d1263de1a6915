#pragma once

#include "epimine/datagen.hpp"
#include "epimine/episode.hpp"
#include "epimine/probmodel.hpp"
#include "epimine/winscan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace epimine {

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

struct PValues {
  double one_sided;  // lower tail: small when windows are abnormally short
  double two_sided;
};

inline PValues p_values(double z) {
  return {std_normal_cdf(z), 2.0 * (1.0 - std_normal_cdf(std::fabs(z)))};
}

// Benjamini-Hochberg step-up: with m = p.size() and p_(1) <= ... <= p_(m),
// adjusted_(i) = min over j >= i of min(1, p_(j) * m / j), mapped back to the
// input order.
inline std::vector<double> bh_adjust(const std::vector<double>& p) {
  size_t m = p.size();
  std::vector<size_t> order(m);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return p[a] < p[b]; });
  std::vector<double> adjusted(m, 0.0);
  double running = 1.0;
  for (size_t rank = m; rank >= 1; --rank) {
    double value = p[order[rank - 1]];
    if (value < 0.0 || value > 1.0) throw std::invalid_argument("bh_adjust: p-value outside [0,1]");
    running = std::min(running, value * static_cast<double>(m) / static_cast<double>(rank));
    adjusted[order[rank - 1]] = running;
  }
  return adjusted;
}

// Covariance pieces of the per-position window series X_i (a minimal window
// starts at i) and Y_i (its length, else 0). The lag-0 terms are exact; the
// lagged cross-moments cannot be computed from the model directly and are
// estimated from one simulated sequence.
struct LagCovariances {
  double lag0_yy = 0;  // E[Y^2] - q^2
  double lag0_xx = 0;  // p - p^2
  double lag0_xy = 0;  // q - p q
  double lag_yy = 0;   // sum over lags 1..K-1 of cov(Y_1, Y_{1+j})
  double lag_xx = 0;
  double lag_xy = 0;   // sum of cov(X_1, Y_{1+j})
  double lag_yx = 0;   // sum of cov(Y_1, X_{1+j})

  double full_yy() const { return lag0_yy + 2.0 * lag_yy; }
  double full_xx() const { return lag0_xx + 2.0 * lag_xx; }
  double full_xy() const { return lag0_xy + lag_xy + lag_yx; }
};

// Samples one sequence from the model, scans it, and accumulates the lagged
// cross-moments for every episode that has moments. Pair sums are collected
// from a per-episode ring of recent windows; means use the exact p and q.
inline std::vector<LagCovariances> simulate_lag_terms(
    const SymbolModel& model, const WindowScanner& scanner, int max_len, int sim_length,
    std::uint64_t seed, const std::vector<std::optional<Moments>>& episode_moments) {
  if (sim_length < 10 * max_len)
    throw std::invalid_argument("simulate_lag_terms: simulation too short for the window cap");
  int episodes = static_cast<int>(episode_moments.size());
  int lags = max_len - 1;
  long long base = sim_length - 2 * max_len;  // window starts counted into the means

  std::vector<double> pair_yy(static_cast<size_t>(episodes * std::max(lags, 1)), 0.0);
  std::vector<double> pair_xx(pair_yy.size(), 0.0);
  std::vector<double> pair_xy(pair_yy.size(), 0.0);
  std::vector<double> pair_yx(pair_yy.size(), 0.0);
  std::vector<double> sum_y(static_cast<size_t>(episodes), 0.0);
  std::vector<double> sum_x(static_cast<size_t>(episodes), 0.0);
  std::vector<std::deque<std::pair<int, int>>> recent(static_cast<size_t>(episodes));

  SymbolSequence sim = sample_model(model, sim_length, seed);
  scanner.scan(sim, max_len, [&](int id, int start, int end) {
    if (id >= episodes || !episode_moments[static_cast<size_t>(id)]) return;
    int len = end - start + 1;
    auto& ring = recent[static_cast<size_t>(id)];
    while (!ring.empty() && ring.front().first < start - lags) ring.pop_front();
    for (const auto& [prev_start, prev_len] : ring) {
      if (prev_start > base) continue;
      size_t cell = static_cast<size_t>(id * lags + (start - prev_start - 1));
      pair_yy[cell] += static_cast<double>(prev_len) * len;
      pair_xx[cell] += 1.0;
      pair_xy[cell] += len;        // X at the older start, Y at the newer
      pair_yx[cell] += prev_len;   // Y at the older start, X at the newer
    }
    ring.push_back({start, len});
    if (start <= base) {
      sum_y[static_cast<size_t>(id)] += len;
      sum_x[static_cast<size_t>(id)] += 1.0;
    }
  });

  std::vector<LagCovariances> out(static_cast<size_t>(episodes));
  double n = static_cast<double>(base);
  for (int id = 0; id < episodes; ++id) {
    if (!episode_moments[static_cast<size_t>(id)]) continue;
    const Moments& mo = *episode_moments[static_cast<size_t>(id)];
    double p = to_double(mo.mass);
    double q = to_double(mo.first);
    LagCovariances c;
    c.lag0_yy = to_double(mo.second) - q * q;
    c.lag0_xx = p - p * p;
    c.lag0_xy = q - p * q;
    double mean_y = sum_y[static_cast<size_t>(id)] / n;
    double mean_x = sum_x[static_cast<size_t>(id)] / n;
    for (int j = 1; j <= lags; ++j) {
      size_t cell = static_cast<size_t>(id * lags + (j - 1));
      c.lag_yy += pair_yy[cell] / n - q * mean_y - q * mean_y + q * q;
      c.lag_xx += pair_xx[cell] / n - p * mean_x - p * mean_x + p * p;
      c.lag_xy += pair_xy[cell] / n - p * mean_y - q * mean_x + p * q;
      c.lag_yx += pair_yx[cell] / n - q * mean_x - p * mean_y + p * q;
    }
    out[static_cast<size_t>(id)] = c;
  }
  return out;
}

// Delta-method variance of the average-length ratio estimator, from the
// gradient (1/p, -m/p) of y/x at (q, p):
//
//   sigma^2 = (C_YY - 2 m C_XY + m^2 C_XX) / p^2
//
// Noisy lag estimates can push this slightly negative; that clamps to zero
// and the episode is excluded as zero-variance.
inline double sigma_from(const Moments& mo, const LagCovariances& c, bool* clamped = nullptr) {
  double p = to_double(mo.mass);
  double m = to_double(mo.mean);
  double s2 = (c.full_yy() - 2.0 * m * c.full_xy() + m * m * c.full_xx()) / (p * p);
  if (clamped) *clamped = s2 < 0.0;
  if (s2 < 0.0) s2 = 0.0;
  return std::sqrt(s2);
}

enum class ZForm {
  Ratio,    // sqrt(L) * (W/n_w - m) / sigma
  Literal,  // (W - L m) / (sqrt(L) sigma)
};

inline double z_statistic(const WindowStats& observed, double model_mean, double sigma,
                          long long test_length, ZForm form = ZForm::Ratio) {
  if (observed.count == 0) throw std::invalid_argument("z_statistic: no observed windows");
  if (!(sigma > 0)) throw std::invalid_argument("z_statistic: sigma must be positive");
  double root = std::sqrt(static_cast<double>(test_length));
  if (form == ZForm::Literal)
    return (static_cast<double>(observed.total_length) - static_cast<double>(test_length) * model_mean) /
           (root * sigma);
  return root * (observed.mean() - model_mean) / sigma;
}

enum class TestStatus { Tested, SkippedFewWindows, SkippedZeroVariance, SkippedUnreachable };

inline const char* status_name(TestStatus s) {
  switch (s) {
    case TestStatus::Tested: return "tested";
    case TestStatus::SkippedFewWindows: return "skipped-few-windows";
    case TestStatus::SkippedZeroVariance: return "skipped-zero-variance";
    case TestStatus::SkippedUnreachable: return "skipped-unreachable";
  }
  return "?";
}

struct EpisodeTestResult {
  int episode_id = -1;
  TestStatus status = TestStatus::Tested;
  WindowStats observed;
  double model_mean = std::numeric_limits<double>::quiet_NaN();
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double z = std::numeric_limits<double>::quiet_NaN();
  double p_one = std::numeric_limits<double>::quiet_NaN();
  double p_two = std::numeric_limits<double>::quiet_NaN();
  double q_one = std::numeric_limits<double>::quiet_NaN();
  double q_two = std::numeric_limits<double>::quiet_NaN();
};

// Fills q_one / q_two across the tested results; each sidedness family is
// adjusted on its own.
inline void adjust_results(std::vector<EpisodeTestResult>& results, bool benjamini_hochberg) {
  std::vector<size_t> tested;
  for (size_t i = 0; i < results.size(); ++i)
    if (results[i].status == TestStatus::Tested) tested.push_back(i);
  std::vector<double> one, two;
  for (size_t i : tested) {
    one.push_back(results[i].p_one);
    two.push_back(results[i].p_two);
  }
  std::vector<double> adj_one = benjamini_hochberg ? bh_adjust(one) : one;
  std::vector<double> adj_two = benjamini_hochberg ? bh_adjust(two) : two;
  for (size_t k = 0; k < tested.size(); ++k) {
    results[tested[k]].q_one = adj_one[k];
    results[tested[k]].q_two = adj_two[k];
  }
}

}  // namespace epimine

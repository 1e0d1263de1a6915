#pragma once

#include "epimine/alphabet.hpp"
#include "epimine/datagen.hpp"
#include "epimine/episode.hpp"
#include "epimine/miner.hpp"
#include "epimine/probmodel.hpp"
#include "epimine/sigtest.hpp"
#include "epimine/winscan.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace epimine {

struct PipelineConfig {
  double split = 0.5;
  long long min_windows = 1;
  int max_window = 1;
  bool mine_parallel = true;
  bool mine_serial = true;
  int max_nodes = 4;
  long long sim_length = 1000000;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  bool adjust_bh = true;
  ZForm z_form = ZForm::Ratio;
  std::string out_dir;

  void validate() const {
    if (!(split > 0.0 && split < 1.0)) throw std::invalid_argument("config: split must be in (0,1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("config: alpha must be in (0,1)");
    MinerConfig{min_windows, max_window, mine_parallel, mine_serial, max_nodes}.validate();
    if (sim_length < 10LL * max_window) throw std::invalid_argument("config: sim length too small");
  }
};

struct CandidateReport {
  int family_id = -1;
  long long train_count = -1;  // -1 when episodes were supplied rather than mined
  EpisodeTestResult result;
  std::optional<WindowDistribution> dist;
  std::optional<Moments> model_moments;
  std::vector<long long> histogram;  // observed window lengths 1..K in the test half
};

struct PipelineResult {
  EpisodeFamily family;
  std::vector<CandidateReport> candidates;
  int simple_states = 0;
  int co_states = 0;
  long long test_length = 0;
  int tested = 0;
};

// Steps 4..6 of the full pipeline: distributions from the machines, window
// statistics from the test sequence, exclusion rules, z and P-values, and the
// multiple-testing adjustment. Also the whole job when episodes come from a
// file instead of the miner.
inline PipelineResult test_episodes(const SymbolSequence& test, const SymbolModel& model,
                                    const EpisodeFamily& family, const std::vector<int>& candidate_ids,
                                    const std::vector<long long>& train_counts, int alphabet_size,
                                    const PipelineConfig& cfg) {
  PipelineResult out;
  out.family = family;
  out.test_length = test.length();

  MachineSuite suite = MachineSuite::build(family);
  out.simple_states = suite.simple.state_count();
  out.co_states = suite.co.state_count();

  std::vector<char> keep_simple(static_cast<size_t>(suite.simple.state_count()), 0);
  std::vector<char> keep_co(static_cast<size_t>(suite.co.state_count()), 0);
  for (int id : candidate_ids) {
    keep_simple[static_cast<size_t>(suite.singleton_state[static_cast<size_t>(id)])] = 1;
    if (suite.final_state[static_cast<size_t>(id)] >= 0)
      keep_co[static_cast<size_t>(suite.final_state[static_cast<size_t>(id)])] = 1;
  }
  CoverTable cov_simple(suite.simple, model, cfg.max_window, keep_simple);
  CoverTable cov_co(suite.co, model, cfg.max_window, keep_co);

  // Observed minimal-window statistics over the test half, one scan.
  std::vector<char> is_candidate(static_cast<size_t>(family.size()), 0);
  for (int id : candidate_ids) is_candidate[static_cast<size_t>(id)] = 1;
  std::vector<WindowStats> observed(static_cast<size_t>(family.size()));
  std::vector<std::vector<long long>> histograms(static_cast<size_t>(family.size()));
  WindowScanner scanner(family, alphabet_size);
  scanner.scan(test, cfg.max_window, [&](int id, int start, int end) {
    if (!is_candidate[static_cast<size_t>(id)]) return;
    observed[static_cast<size_t>(id)].count++;
    observed[static_cast<size_t>(id)].total_length += end - start + 1;
    auto& hist = histograms[static_cast<size_t>(id)];
    if (hist.empty()) hist.assign(static_cast<size_t>(cfg.max_window), 0);
    hist[static_cast<size_t>(end - start)]++;
  });

  std::vector<std::optional<Moments>> sim_moments(static_cast<size_t>(family.size()));
  out.candidates.reserve(candidate_ids.size());
  for (size_t c = 0; c < candidate_ids.size(); ++c) {
    int id = candidate_ids[c];
    CandidateReport report;
    report.family_id = id;
    report.train_count = train_counts.empty() ? -1 : train_counts[c];
    report.result.episode_id = id;
    report.result.observed = observed[static_cast<size_t>(id)];
    report.histogram = histograms[static_cast<size_t>(id)];
    if (report.histogram.empty()) report.histogram.assign(static_cast<size_t>(cfg.max_window), 0);

    std::vector<Rational> joint = minwin_joint(cov_simple, cov_co, suite, model, id, cfg.max_window);
    if (joint_mass(joint) == 0) {
      report.result.status = TestStatus::SkippedUnreachable;
      out.candidates.push_back(std::move(report));
      continue;
    }
    report.dist = normalize(std::move(joint));
    report.model_moments = moments(*report.dist);
    report.result.model_mean = to_double(report.model_moments->mean);

    if (report.dist->support_size() <= 1) {
      // Window length is a known constant; the variance is exactly zero.
      report.result.status = TestStatus::SkippedZeroVariance;
      report.result.sigma = 0.0;
    } else if (report.result.observed.count <= cfg.min_windows) {
      report.result.status = TestStatus::SkippedFewWindows;
    } else {
      sim_moments[static_cast<size_t>(id)] = *report.model_moments;  // sigma still needed
    }
    out.candidates.push_back(std::move(report));
  }

  bool any_sim = false;
  for (const auto& mo : sim_moments) any_sim = any_sim || mo.has_value();
  std::vector<LagCovariances> lag_terms;
  if (any_sim)
    lag_terms = simulate_lag_terms(model, scanner, cfg.max_window,
                                   static_cast<int>(cfg.sim_length), cfg.seed, sim_moments);

  std::vector<EpisodeTestResult*> rows;
  for (CandidateReport& report : out.candidates) {
    int id = report.family_id;
    if (!sim_moments[static_cast<size_t>(id)]) continue;
    bool clamped = false;
    double sigma = sigma_from(*report.model_moments, lag_terms[static_cast<size_t>(id)], &clamped);
    report.result.sigma = sigma;
    if (sigma <= 0.0) {
      report.result.status = TestStatus::SkippedZeroVariance;
      continue;
    }
    report.result.status = TestStatus::Tested;
    report.result.z = z_statistic(report.result.observed, report.result.model_mean, sigma,
                                  out.test_length, cfg.z_form);
    PValues p = p_values(report.result.z);
    report.result.p_one = p.one_sided;
    report.result.p_two = p.two_sided;
    out.tested++;
  }

  std::vector<EpisodeTestResult> flat;
  flat.reserve(out.candidates.size());
  for (const CandidateReport& r : out.candidates) flat.push_back(r.result);
  adjust_results(flat, cfg.adjust_bh);
  for (size_t i = 0; i < flat.size(); ++i) out.candidates[i].result = flat[i];
  return out;
}

namespace detail {

inline std::string fmt6(double v) {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

inline void write_results_tsv(std::ostream& out, const PipelineResult& result, const Alphabet& alphabet) {
  out << "id\tepisode\tn_windows\tsum_len\tavg_len\tm\tsigma\tz\tp_one\tp_two\tq_one\tq_two\tstatus\n";
  for (const CandidateReport& r : result.candidates) {
    const EpisodeTestResult& t = r.result;
    out << r.family_id << "\t" << describe(result.family[r.family_id], alphabet) << "\t"
        << t.observed.count << "\t" << t.observed.total_length << "\t" << detail::fmt6(t.observed.mean())
        << "\t" << detail::fmt6(t.model_mean) << "\t" << detail::fmt6(t.sigma) << "\t"
        << detail::fmt6(t.z) << "\t" << detail::fmt6(t.p_one) << "\t" << detail::fmt6(t.p_two) << "\t"
        << detail::fmt6(t.q_one) << "\t" << detail::fmt6(t.q_two) << "\t" << status_name(t.status)
        << "\n";
  }
}

inline void write_distributions_tsv(std::ostream& out, const PipelineResult& result) {
  out << "episode_id\tk\trational\tdecimal\n";
  for (const CandidateReport& r : result.candidates) {
    if (!r.dist) continue;
    for (int k = 1; k <= r.dist->max_len(); ++k) {
      const Rational& p = r.dist->normalized[static_cast<size_t>(k - 1)];
      out << r.family_id << "\t" << k << "\t" << to_string(p) << "\t" << detail::fmt6(to_double(p))
          << "\n";
    }
  }
}

inline void write_machines_tsv(std::ostream& out, const PipelineResult& result) {
  out << "candidates\ttested\tsimple_states\tco_states\n";
  out << result.candidates.size() << "\t" << result.tested << "\t" << result.simple_states << "\t"
      << result.co_states << "\n";
}

// Observed length histogram next to the model distribution, for plotting.
inline void emit_plot_data(std::ostream& out, const PipelineResult& result) {
  out << "episode_id\tk\tobserved\tmodel_pk\n";
  for (const CandidateReport& r : result.candidates) {
    if (!r.dist) continue;
    for (int k = 1; k <= r.dist->max_len(); ++k) {
      out << r.family_id << "\t" << k << "\t" << r.histogram[static_cast<size_t>(k - 1)] << "\t"
          << detail::fmt6(to_double(r.dist->normalized[static_cast<size_t>(k - 1)])) << "\n";
    }
  }
}

inline void write_candidates(std::ostream& out, const PipelineResult& result, const Alphabet& alphabet) {
  for (const CandidateReport& r : result.candidates) {
    if (r.train_count >= 0) out << "# count " << r.train_count << "\n";
    write_episode(out, result.family[r.family_id], alphabet, r.family_id);
  }
}

inline void write_reports(const PipelineResult& result, const Alphabet& alphabet,
                          const std::string& out_dir, bool with_candidates) {
  std::filesystem::create_directories(out_dir);
  auto open = [&](const char* name) {
    std::ofstream f(std::filesystem::path(out_dir) / name);
    if (!f) throw std::runtime_error(std::string("cannot write ") + name);
    return f;
  };
  {
    auto f = open("results.tsv");
    write_results_tsv(f, result, alphabet);
  }
  {
    auto f = open("distributions.tsv");
    write_distributions_tsv(f, result);
  }
  {
    auto f = open("machines.tsv");
    write_machines_tsv(f, result);
  }
  {
    auto f = open("plot.tsv");
    emit_plot_data(f, result);
  }
  if (with_candidates) {
    auto f = open("candidates.txt");
    write_candidates(f, result, alphabet);
  }
}

// The full train/test pipeline: split, fit, mine, model, test, adjust.
inline PipelineResult run_pipeline(const SymbolSequence& input, int alphabet_size,
                                   const PipelineConfig& cfg) {
  cfg.validate();
  int cut = static_cast<int>(std::floor(cfg.split * input.length()));
  if (cut < 1 || cut >= input.length())
    throw std::runtime_error("input sequence too short to split");
  SymbolSequence train = input.window(1, cut);
  SymbolSequence test = input.window(cut + 1, input.length());

  SymbolModel model = estimate_model(train, alphabet_size);
  MinerConfig miner{cfg.min_windows, cfg.max_window, cfg.mine_parallel, cfg.mine_serial, cfg.max_nodes};
  MineResult mined = mine(train, miner, alphabet_size);
  return test_episodes(test, model, mined.family, mined.candidate_ids, mined.counts, alphabet_size,
                       cfg);
}

}  // namespace epimine

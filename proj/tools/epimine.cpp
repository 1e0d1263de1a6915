// Command-line front end: synthetic data generation, candidate mining, model
// fitting, window scanning, significance testing, and the full train/test
// pipeline.

#include "epimine/datagen.hpp"
#include "epimine/episode.hpp"
#include "epimine/miner.hpp"
#include "epimine/pipeline.hpp"
#include "epimine/probmodel.hpp"
#include "epimine/sigtest.hpp"
#include "epimine/winscan.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace epimine;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitModelError = 3;

SymbolSequence load_sequence(const std::string& path, Alphabet& alphabet) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sequence file: " + path);
  SymbolSequence s = read_sequence(in, alphabet);
  if (s.empty()) throw std::runtime_error("sequence file is empty: " + path);
  return s;
}

std::vector<Episode> load_episode_file(const std::string& path, Alphabet& alphabet) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open episode file: " + path);
  std::vector<Episode> episodes = read_episodes(in, alphabet);
  if (episodes.empty()) throw std::runtime_error("episode file has no episodes: " + path);
  return episodes;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

void parse_classes(const std::string& classes, bool& parallel, bool& serial) {
  parallel = serial = false;
  std::istringstream in(classes);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item == "parallel") parallel = true;
    else if (item == "serial") serial = true;
    else throw CLI::ValidationError("--classes", "unknown episode class '" + item + "'");
  }
}

struct GenOptions {
  std::string kind = "ind";
  int length = 0;
  std::uint64_t seed = 1;
  int alphabet = 10;
  std::string model_path;
  std::string out;
};

int cmd_gen(const GenOptions& opt) {
  Alphabet alphabet;
  SymbolSequence s;
  if (opt.kind == "ind") {
    s = gen_uniform(opt.alphabet, opt.length, opt.seed, alphabet);
  } else if (opt.kind == "co") {
    s = gen_correlated(opt.length, opt.seed, alphabet);
  } else {
    std::ifstream in(opt.model_path);
    if (!in) throw std::runtime_error("cannot open model file: " + opt.model_path);
    SymbolModel model = load_model(in, alphabet);
    s = sample_model(model, opt.length, opt.seed);
  }
  auto out = open_out(opt.out);
  write_sequence(out, s, alphabet);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"episode mining with minimal-window significance testing"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* cmd_g = app.add_subcommand("gen", "generate a synthetic sequence");
  cmd_g->add_option("--kind", gen.kind, "ind | co | model")->check(CLI::IsMember({"ind", "co", "model"}));
  cmd_g->add_option("--length", gen.length, "sequence length")->required();
  cmd_g->add_option("--seed", gen.seed, "rng seed");
  cmd_g->add_option("--alphabet", gen.alphabet, "alphabet size for --kind ind");
  cmd_g->add_option("--model", gen.model_path, "model file for --kind model");
  cmd_g->add_option("--out", gen.out, "output sequence file")->required();

  struct {
    std::string input, out;
  } model_opt;
  auto* cmd_m = app.add_subcommand("model", "fit the independence model from a sequence");
  cmd_m->add_option("--input", model_opt.input, "sequence file")->required();
  cmd_m->add_option("--out", model_opt.out, "model file")->required();

  struct {
    std::string input, out, classes = "parallel,serial";
    long long min_windows = 1;
    int max_window = 1, max_nodes = 4;
  } mine_opt;
  auto* cmd_mi = app.add_subcommand("mine", "mine frequent candidate episodes");
  cmd_mi->add_option("--input", mine_opt.input, "sequence file")->required();
  cmd_mi->add_option("--min-windows", mine_opt.min_windows, "non-overlap window threshold")->required();
  cmd_mi->add_option("--max-window", mine_opt.max_window, "largest minimal window considered")->required();
  cmd_mi->add_option("--classes", mine_opt.classes, "episode classes, comma separated");
  cmd_mi->add_option("--max-nodes", mine_opt.max_nodes, "largest episode size");
  cmd_mi->add_option("--out", mine_opt.out, "candidate episode file")->required();

  struct {
    std::string input, episodes, out;
    int max_window = 1;
  } scan_opt;
  auto* cmd_s = app.add_subcommand("scan", "dump minimal windows of the given episodes");
  cmd_s->add_option("--input", scan_opt.input, "sequence file")->required();
  cmd_s->add_option("--episodes", scan_opt.episodes, "episode file")->required();
  cmd_s->add_option("--max-window", scan_opt.max_window, "largest minimal window considered")->required();
  cmd_s->add_option("--out", scan_opt.out, "window dump file")->required();

  struct {
    std::string input, episodes, model, out, adjust = "bh", z_form = "ratio";
    long long min_windows = 1, sim_length = 1000000;
    int max_window = 1;
    std::uint64_t seed = 1;
    double alpha = 0.05;
  } test_opt;
  auto* cmd_t = app.add_subcommand("test", "test supplied episodes against a model");
  cmd_t->add_option("--input", test_opt.input, "test sequence file")->required();
  cmd_t->add_option("--episodes", test_opt.episodes, "episode file")->required();
  cmd_t->add_option("--model", test_opt.model, "model file")->required();
  cmd_t->add_option("--min-windows", test_opt.min_windows, "window-count exclusion threshold")->required();
  cmd_t->add_option("--max-window", test_opt.max_window, "largest minimal window considered")->required();
  cmd_t->add_option("--sim-length", test_opt.sim_length, "simulated sequence length");
  cmd_t->add_option("--seed", test_opt.seed, "rng seed");
  cmd_t->add_option("--alpha", test_opt.alpha, "significance level");
  cmd_t->add_option("--adjust", test_opt.adjust, "bh | none")->check(CLI::IsMember({"bh", "none"}));
  cmd_t->add_option("--z-form", test_opt.z_form, "ratio | literal")->check(CLI::IsMember({"ratio", "literal"}));
  cmd_t->add_option("--out", test_opt.out, "output directory")->required();

  struct {
    std::string input, out, classes = "parallel,serial", adjust = "bh", z_form = "ratio";
    double split = 0.5, alpha = 0.05;
    long long min_windows = 1, sim_length = 1000000;
    int max_window = 1, max_nodes = 4;
    std::uint64_t seed = 1;
  } run_opt;
  auto* cmd_r = app.add_subcommand("run", "full split/mine/model/test pipeline");
  cmd_r->add_option("--input", run_opt.input, "sequence file")->required();
  cmd_r->add_option("--split", run_opt.split, "training fraction");
  cmd_r->add_option("--min-windows", run_opt.min_windows, "window threshold")->required();
  cmd_r->add_option("--max-window", run_opt.max_window, "largest minimal window considered")->required();
  cmd_r->add_option("--classes", run_opt.classes, "episode classes, comma separated");
  cmd_r->add_option("--max-nodes", run_opt.max_nodes, "largest episode size");
  cmd_r->add_option("--sim-length", run_opt.sim_length, "simulated sequence length");
  cmd_r->add_option("--seed", run_opt.seed, "rng seed");
  cmd_r->add_option("--alpha", run_opt.alpha, "significance level");
  cmd_r->add_option("--adjust", run_opt.adjust, "bh | none")->check(CLI::IsMember({"bh", "none"}));
  cmd_r->add_option("--z-form", run_opt.z_form, "ratio | literal")->check(CLI::IsMember({"ratio", "literal"}));
  cmd_r->add_option("--out", run_opt.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (cmd_g->parsed()) return cmd_gen(gen);

    if (cmd_m->parsed()) {
      Alphabet alphabet;
      SymbolSequence s = load_sequence(model_opt.input, alphabet);
      SymbolModel model = estimate_model(s, alphabet.size());
      auto out = open_out(model_opt.out);
      save_model(out, model, alphabet);
      return kExitOk;
    }

    if (cmd_mi->parsed()) {
      Alphabet alphabet;
      SymbolSequence s = load_sequence(mine_opt.input, alphabet);
      MinerConfig cfg{mine_opt.min_windows, mine_opt.max_window, true, true, mine_opt.max_nodes};
      parse_classes(mine_opt.classes, cfg.mine_parallel, cfg.mine_serial);
      MineResult mined = mine(s, cfg, alphabet.size());
      auto out = open_out(mine_opt.out);
      for (size_t i = 0; i < mined.candidate_ids.size(); ++i) {
        out << "# count " << mined.counts[i] << "\n";
        write_episode(out, mined.family[mined.candidate_ids[i]], alphabet, mined.candidate_ids[i]);
      }
      return kExitOk;
    }

    if (cmd_s->parsed()) {
      Alphabet alphabet;
      SymbolSequence s = load_sequence(scan_opt.input, alphabet);
      std::vector<Episode> episodes = load_episode_file(scan_opt.episodes, alphabet);
      EpisodeFamily family = closure(episodes);
      auto out = open_out(scan_opt.out);
      out << "episode_id\tstart\tend\n";
      WindowScanner scanner(family, alphabet.size());
      std::vector<char> wanted(static_cast<size_t>(family.size()), 0);
      for (const Episode& g : episodes) wanted[static_cast<size_t>(*family.find(g))] = 1;
      scanner.scan(s, scan_opt.max_window, [&](int id, int start, int end) {
        if (wanted[static_cast<size_t>(id)]) out << id << "\t" << start << "\t" << end << "\n";
      });
      return kExitOk;
    }

    if (cmd_t->parsed()) {
      Alphabet alphabet;
      SymbolSequence s = load_sequence(test_opt.input, alphabet);
      std::vector<Episode> episodes = load_episode_file(test_opt.episodes, alphabet);
      std::ifstream min(test_opt.model);
      if (!min) throw std::runtime_error("cannot open model file: " + test_opt.model);
      SymbolModel model = load_model(min, alphabet);
      EpisodeFamily family = closure(episodes);
      std::vector<int> ids;
      for (const Episode& g : episodes)
        if (!g.is_empty()) ids.push_back(*family.find(g));
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      PipelineConfig cfg;
      cfg.min_windows = test_opt.min_windows;
      cfg.max_window = test_opt.max_window;
      cfg.sim_length = test_opt.sim_length;
      cfg.seed = test_opt.seed;
      cfg.alpha = test_opt.alpha;
      cfg.adjust_bh = test_opt.adjust == "bh";
      cfg.z_form = test_opt.z_form == "literal" ? ZForm::Literal : ZForm::Ratio;
      cfg.out_dir = test_opt.out;
      cfg.validate();
      PipelineResult result = test_episodes(s, model, family, ids, {}, alphabet.size(), cfg);
      write_reports(result, alphabet, cfg.out_dir, false);
      return kExitOk;
    }

    if (cmd_r->parsed()) {
      Alphabet alphabet;
      SymbolSequence s = load_sequence(run_opt.input, alphabet);
      PipelineConfig cfg;
      cfg.split = run_opt.split;
      cfg.min_windows = run_opt.min_windows;
      cfg.max_window = run_opt.max_window;
      parse_classes(run_opt.classes, cfg.mine_parallel, cfg.mine_serial);
      cfg.max_nodes = run_opt.max_nodes;
      cfg.sim_length = run_opt.sim_length;
      cfg.seed = run_opt.seed;
      cfg.alpha = run_opt.alpha;
      cfg.adjust_bh = run_opt.adjust == "bh";
      cfg.z_form = run_opt.z_form == "literal" ? ZForm::Literal : ZForm::Ratio;
      cfg.out_dir = run_opt.out;
      cfg.validate();
      PipelineResult result = run_pipeline(s, alphabet.size(), cfg);
      write_reports(result, alphabet, cfg.out_dir, true);
      return kExitOk;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitModelError;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitModelError;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitUsage;
}

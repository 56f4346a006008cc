#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <set>

#include "stumpfungus/case_studies/attain.hpp"
#include "stumpfungus/case_studies/data.hpp"
#include "stumpfungus/case_studies/marbles.hpp"
#include "stumpfungus/case_studies/rats.hpp"
#include "stumpfungus/case_studies/study.hpp"
#include "stumpfungus/diagnostics.hpp"
#include "stumpfungus/io.hpp"
#include "stumpfungus/parallel.hpp"
#include "stumpfungus/workflow.hpp"

namespace sf {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string model;
  std::string data;
  std::string out;
  std::uint64_t seed = 1;
  std::size_t burnin = 1000;
  std::size_t draws = 5000;
  std::size_t stump_size = 10;
  std::size_t leapfrog = 10;
  bool record_timing = false;

  // Subcommand-specific.
  int group = 0;  // 1-based; 0 = unset
  int exclude_group = 0;
  bool all_groups = false;
  int n = -1;
  int y = -1;
  std::string posterior;
  std::string stump;
  std::string a;
  std::string b;
  std::vector<std::string> pairs;
  std::size_t hyper_samples = 0;
  std::size_t max_iters = 5000;
  bool no_optimize = false;
  bool use_prior = false;
  bool literal_ascent = false;
  int pupils = 3435;
  int pid = 148;
  int sid = 19;
  int draws_per_box = 5;
};

HmcConfig hmc_config(const Options& o) {
  HmcConfig c;
  c.burn_in = o.burnin;
  c.draws = o.draws;
  c.seed = o.seed;
  c.leapfrog_steps = o.leapfrog;
  c.validate();
  return c;
}

const std::string& require(const std::string& value, std::string_view flag) {
  if (value.empty()) throw UsageError(fmt::format("{} is required", flag));
  return value;
}

std::unique_ptr<Study> study_for(const Options& o) {
  require(o.model, "--model");
  static const std::set<std::string> known{"marbles", "rats", "attain", "normal"};
  if (!known.contains(o.model)) throw UsageError(fmt::format("unknown model '{}'", o.model));
  if (o.data.empty()) return default_study(o.model, o.seed);
  return load_study(o.model, o.data);
}

std::size_t group_index(int group, const Study& study, std::string_view flag) {
  if (group < 1 || static_cast<std::size_t>(group) > study.group_count()) {
    throw UsageError(fmt::format("{} must be in 1..{}, got {}", flag, study.group_count(), group));
  }
  return static_cast<std::size_t>(group - 1);
}

void write_posterior(const std::filesystem::path& path, PosteriorSamples samples, bool timing) {
  if (!timing) samples.wall_time_seconds = 0.0;
  save_posterior(path, samples);
}

void fit_hier(const Options& o) {
  const auto study = study_for(o);
  const auto& out = require(o.out, "--out");
  const auto fitted = o.exclude_group > 0
                          ? study->without_group(group_index(o.exclude_group, *study, "--exclude-group"))
                          : nullptr;
  const auto samples = run_chain(*(fitted ? fitted : study)->hierarchical(), hmc_config(o));
  write_posterior(out, samples, o.record_timing);
}

void fit_unpooled(const Options& o) {
  if (o.model != "rats") throw UsageError("fit-unpooled supports --model rats only");
  const auto& out = require(o.out, "--out");
  int n = o.n;
  int y = o.y;
  if (o.group > 0) {
    const RatsData data = o.data.empty() ? rats_tumor_table() : load_rats(o.data);
    if (static_cast<std::size_t>(o.group) > data.rows.size()) {
      throw UsageError(fmt::format("--group must be in 1..{}", data.rows.size()));
    }
    n = data.rows[static_cast<std::size_t>(o.group - 1)].n;
    y = data.rows[static_cast<std::size_t>(o.group - 1)].y;
  }
  if (n < 0 || y < 0) throw UsageError("fit-unpooled needs --group or both --n and --y");
  write_posterior(out, run_chain(*rats_unpooled(n, y), hmc_config(o)), o.record_timing);
}

void fit_eb(const Options& o) {
  const auto study = study_for(o);
  if (!study->has_empirical_bayes()) {
    throw UsageError(fmt::format("model '{}' has no empirical-Bayes variant", study->id()));
  }
  const auto g = group_index(o.group, *study, "--group");
  const auto hier = load_posterior(require(o.posterior, "--posterior"));
  const auto hypers = study->hyper_estimate(hier);
  write_posterior(require(o.out, "--out"), run_chain(*study->empirical_bayes(hypers, g), hmc_config(o)),
                  o.record_timing);
}

void make_stump_cmd(const Options& o) {
  const auto study = study_for(o);
  const auto posterior = load_posterior(require(o.posterior, "--posterior"));
  StumpOptions s;
  s.size = o.stump_size;
  s.seed = o.seed;
  s.hyper_samples = o.hyper_samples;
  s.optimize = !o.no_optimize;
  s.optimizer.max_iters = o.max_iters;
  s.optimizer.use_prior = o.use_prior;
  s.optimizer.preserve_total_weight = !o.literal_ascent;
  const auto result = make_stump(*study, posterior, s);
  save_stump(require(o.out, "--out"), result.set);
  std::cout << fmt::format("stump: M={} N={} objective {:.6g} -> {:.6g} after {} iterations\n",
                           result.set.size(), result.set.meta.hyper_samples,
                           result.initial_objective, result.final_objective, result.iterations);
}

void fit_fungus(const Options& o) {
  const auto study = study_for(o);
  const auto stump = load_stump(require(o.stump, "--stump"));
  const auto& out = require(o.out, "--out");
  if (o.all_groups == (o.group > 0)) throw UsageError("fit-fungus needs exactly one of --group, --all-groups");
  auto fit = [&](std::size_t g, std::uint64_t seed) {
    HmcConfig c = hmc_config(o);
    c.seed = seed;
    return run_chain(*study->stump_and_fungus(stump, g), c);
  };
  if (!o.all_groups) {
    write_posterior(out, fit(group_index(o.group, *study, "--group"), o.seed), o.record_timing);
    return;
  }
  std::filesystem::create_directories(out);
  parallel_for(study->group_count(), [&](std::size_t g) {
    const auto path = std::filesystem::path(out) / fmt::format("fungus_{}.json", g + 1);
    write_posterior(path, fit(g, derive_seed(o.seed, g, 3)), o.record_timing);
  });
}

void compare_cmd(const Options& o) {
  const auto a = load_posterior(require(o.a, "--a"));
  const auto b = load_posterior(require(o.b, "--b"));
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& p : o.pairs) {
    const auto colon = p.find(':');
    if (colon == std::string::npos) throw UsageError(fmt::format("--pair expects A:B, got '{}'", p));
    pairs.emplace_back(p.substr(0, colon), p.substr(colon + 1));
  }
  if (pairs.empty()) {
    const std::set<std::string> in_b(b.names.begin(), b.names.end());
    for (const auto& name : a.names) {
      if (in_b.contains(name)) pairs.emplace_back(name, name);
    }
    if (pairs.empty()) throw UsageError("posteriors share no column names; use --pair");
  }
  const auto report = compare_posteriors(a, b, pairs);
  const auto text = ks_report_to_json(report);
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(o.out, text);
  }
}

// Sampling time of the hierarchical fit and of one stump-and-fungus fit built
// from it, at the same draw counts.
void bench_cmd(const Options& o) {
  const auto study = study_for(o);
  const auto g = o.group > 0 ? group_index(o.group, *study, "--group") : 0;
  const auto config = hmc_config(o);
  const auto hier = run_chain(*study->hierarchical(), config);
  StumpOptions s;
  s.size = o.stump_size;
  s.seed = o.seed;
  const auto stump = make_stump(*study, hier, s);
  const auto fungus = run_chain(*study->stump_and_fungus(stump.set, g), config);
  const std::vector<TimingReport> reports{
      {"hierarchical", hier.wall_time_seconds, config.burn_in, config.draws, config.seed},
      {fmt::format("stump-and-fungus[{}]", g + 1), fungus.wall_time_seconds, config.burn_in,
       config.draws, config.seed}};
  const auto text = timing_to_json(reports);
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(o.out, text);
  }
}

void synth_cmd(const Options& o) {
  require(o.model, "--model");
  const auto& out = require(o.out, "--out");
  if (o.model == "marbles") {
    write_file_atomic(out, to_csv(synthesize_marbles(o.seed, o.draws_per_box)));
  } else if (o.model == "attain") {
    if (o.pupils < 1 || o.pid < 1 || o.sid < 1) throw UsageError("sizes must be positive");
    write_file_atomic(out, to_csv(attain_synthesize(o.seed, {o.pupils, o.pid, o.sid})));
  } else if (o.model == "rats") {
    write_file_atomic(out, to_csv(rats_tumor_table()));
  } else {
    throw UsageError(fmt::format("synth does not support model '{}'", o.model));
  }
}

void plot_cmd(const Options& o) {
  const auto& out = require(o.out, "--out");
  if (o.posterior.empty() && o.a.empty()) throw UsageError("plot needs --posterior or --a/--b");
  std::filesystem::create_directories(out);
  if (!o.posterior.empty()) emit_plot_data(load_posterior(o.posterior), out);
  if (!o.a.empty() || !o.b.empty()) {
    const auto a = load_posterior(require(o.a, "--a"));
    const auto b = load_posterior(require(o.b, "--b"));
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& name : a.names) {
      if (std::find(b.names.begin(), b.names.end(), name) != b.names.end()) pairs.emplace_back(name, name);
    }
    emit_plot_data(compare_posteriors(a, b, pairs), out);
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Stump-and-fungus inference for hierarchical models", "sfcli"};
  app.fallthrough();
  app.require_subcommand(1);
  Options o;

  app.add_option("--model", o.model, "marbles, rats, attain or normal");
  app.add_option("--data", o.data, "input CSV (built-in or synthetic data when omitted)");
  app.add_option("--out", o.out, "output file or directory");
  app.add_option("--seed", o.seed, "random seed")->capture_default_str();
  app.add_option("--burnin", o.burnin, "burn-in iterations")->capture_default_str();
  app.add_option("--draws", o.draws, "posterior draws")->capture_default_str();
  app.add_option("--stump-size", o.stump_size, "stump samples M")->capture_default_str();
  app.add_option("--leapfrog", o.leapfrog, "leapfrog steps per trajectory")->capture_default_str();
  app.add_flag("--record-timing", o.record_timing, "store sampling wall time in posterior files");

  auto* hier = app.add_subcommand("fit-hier", "sample the hierarchical model");
  hier->add_option("--exclude-group", o.exclude_group, "leave out this group (1-based)");

  auto* unpooled = app.add_subcommand("fit-unpooled", "sample the unpooled rats model for one experiment");
  unpooled->add_option("--group", o.group, "experiment (1-based) from the data");
  unpooled->add_option("--n", o.n, "number of rats");
  unpooled->add_option("--y", o.y, "number with tumors");

  auto* eb = app.add_subcommand("fit-eb", "sample the empirical-Bayes model for one group");
  eb->add_option("--posterior", o.posterior, "hierarchical posterior JSON");
  eb->add_option("--group", o.group, "group (1-based)");

  auto* stump = app.add_subcommand("make-stump", "draw a stump and optimize its weights");
  stump->add_option("--posterior", o.posterior, "hierarchical posterior JSON");
  stump->add_option("--hyper-samples", o.hyper_samples, "hyperparameter draws N (0 = all)");
  stump->add_option("--max-iters", o.max_iters, "gradient ascent iterations")->capture_default_str();
  stump->add_flag("--no-optimize", o.no_optimize, "keep w = 1");
  stump->add_flag("--use-prior", o.use_prior, "include the hyperprior in the objective");
  stump->add_flag("--literal-ascent", o.literal_ascent,
                  "let the total weight drift instead of holding it at M");

  auto* fungus = app.add_subcommand("fit-fungus", "sample stump-and-fungus models");
  fungus->add_option("--stump", o.stump, "stump JSON");
  fungus->add_option("--group", o.group, "group (1-based) used as the fungus");
  fungus->add_flag("--all-groups", o.all_groups, "fit every group; --out names a directory");

  auto* compare = app.add_subcommand("compare", "KS report between two posterior files");
  compare->add_option("--a", o.a, "reference posterior JSON");
  compare->add_option("--b", o.b, "other posterior JSON");
  compare->add_option("--pair", o.pairs, "column pair A:B (repeatable; default: shared names)");

  auto* bench = app.add_subcommand("bench", "time hierarchical and stump-and-fungus sampling");
  bench->add_option("--group", o.group, "fungus group (1-based)");

  auto* synth = app.add_subcommand("synth", "write a synthetic dataset");
  synth->add_option("--pupils", o.pupils, "attain: pupils")->capture_default_str();
  synth->add_option("--pid", o.pid, "attain: primary schools")->capture_default_str();
  synth->add_option("--sid", o.sid, "attain: secondary schools")->capture_default_str();
  synth->add_option("--draws-per-box", o.draws_per_box, "marbles: draws per box")->capture_default_str();

  auto* plot = app.add_subcommand("plot", "write histogram, ECDF and KS CSV files");
  plot->add_option("--posterior", o.posterior, "posterior JSON");
  plot->add_option("--a", o.a, "reference posterior JSON for ks.csv");
  plot->add_option("--b", o.b, "other posterior JSON for ks.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (hier->parsed()) fit_hier(o);
    if (unpooled->parsed()) fit_unpooled(o);
    if (eb->parsed()) fit_eb(o);
    if (stump->parsed()) make_stump_cmd(o);
    if (fungus->parsed()) fit_fungus(o);
    if (compare->parsed()) compare_cmd(o);
    if (bench->parsed()) bench_cmd(o);
    if (synth->parsed()) synth_cmd(o);
    if (plot->parsed()) plot_cmd(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace sf

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stumpfungus/case_studies/study.hpp"
#include "stumpfungus/diagnostics.hpp"
#include "stumpfungus/sampler.hpp"
#include "stumpfungus/stump.hpp"

namespace sf {

// Seed for one role of one group, derived from a master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t group, std::uint64_t role);

struct StumpOptions {
  std::size_t size = 10;
  std::uint64_t seed = 1;
  std::size_t hyper_samples = 0;  // 0 keeps every posterior draw
  bool optimize = true;
  OptimizerConfig optimizer;
  std::string created = "stumpfungus";
};

// Draws a stump from a hierarchical posterior of `study` and, unless
// options.optimize is false, fits its weights against the posterior's
// hyperparameter draws.
OptimizeResult make_stump(const Study& study, const PosteriorSamples& posterior,
                          const StumpOptions& options);

struct HoldoutOptions {
  HmcConfig hmc;
  StumpOptions stump;
  bool empirical_bayes = false;
};

struct HoldoutResult {
  std::size_t group = 0;
  PosteriorSamples training;
  OptimizeResult stump;
  PosteriorSamples fungus;
  KsReport fungus_ks;
  std::optional<PosteriorSamples> eb;
  std::optional<KsReport> eb_ks;
};

// Treats group g as new: fits the hierarchical model on the other groups,
// builds a stump from that fit, samples the stump-and-fungus model (and the
// empirical-Bayes model when requested) for g, and compares each with the
// reference posterior of g.
HoldoutResult run_holdout(const Study& study, const PosteriorSamples& reference, std::size_t g,
                          const HoldoutOptions& options);
// Same, reusing an existing fit of the hierarchical model without group g.
HoldoutResult run_holdout(const Study& study, const PosteriorSamples& reference, std::size_t g,
                          const HoldoutOptions& options, PosteriorSamples training);

std::vector<std::pair<std::string, std::string>> paired_names(std::vector<std::string> reference,
                                                              std::vector<std::string> other);

}  // namespace sf

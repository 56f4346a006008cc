#include "stumpfungus/workflow.hpp"

#include <stdexcept>

#include "stumpfungus/rng.hpp"

namespace sf {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t group, std::uint64_t role) {
  return splitmix64(splitmix64(seed ^ splitmix64(group + 1)) ^ role);
}

OptimizeResult make_stump(const Study& study, const PosteriorSamples& posterior,
                          const StumpOptions& options) {
  if (posterior.model_id != study.id()) {
    throw std::invalid_argument("posterior model id '" + posterior.model_id +
                                "' does not match model '" + study.id() + "'");
  }
  WeightedSampleSet set = study.draw_stump(posterior, options.size, options.seed);
  set.meta.created = options.created;
  const auto hyper = make_hyper_set(posterior, study.hyper_columns(posterior.names),
                                    options.hyper_samples,
                                    options.optimizer.use_prior ? study.log_hyper_prior()
                                                                : std::function<double(std::span<const double>)>{});
  set.meta.hyper_samples = hyper.size();
  if (!options.optimize) {
    OptimizeResult result;
    result.set = set;
    result.initial_objective = result.final_objective =
        options.optimizer.use_prior ? s_hat_full(set, hyper, study.kernel())
                                    : s_hat_uniform(set, hyper, study.kernel());
    result.set.meta.objective = result.final_objective;
    return result;
  }
  return optimize_weights(set, hyper, study.kernel(), options.optimizer);
}

std::vector<std::pair<std::string, std::string>> paired_names(std::vector<std::string> reference,
                                                              std::vector<std::string> other) {
  if (reference.size() != other.size()) throw std::invalid_argument("name lists differ in length");
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < reference.size(); ++i) out.emplace_back(reference[i], other[i]);
  return out;
}

namespace {

// KS entries are labelled with the reference column names.
KsReport compare_group(const PosteriorSamples& reference, const PosteriorSamples& other,
                       const std::vector<std::string>& reference_names,
                       const std::vector<std::string>& other_names) {
  return compare_posteriors(reference, other, paired_names(reference_names, other_names));
}

}  // namespace

HoldoutResult run_holdout(const Study& study, const PosteriorSamples& reference, std::size_t g,
                          const HoldoutOptions& options) {
  if (g >= study.group_count()) throw std::out_of_range("group index out of range");
  HmcConfig hmc = options.hmc;
  hmc.seed = derive_seed(options.hmc.seed, g, 1);
  return run_holdout(study, reference, g, options,
                     run_chain(*study.without_group(g)->hierarchical(), hmc));
}

HoldoutResult run_holdout(const Study& study, const PosteriorSamples& reference, std::size_t g,
                          const HoldoutOptions& options, PosteriorSamples training) {
  if (g >= study.group_count()) throw std::out_of_range("group index out of range");
  HoldoutResult result;
  result.group = g;
  result.training = std::move(training);

  const auto training_study = study.without_group(g);
  HmcConfig hmc = options.hmc;

  StumpOptions stump_options = options.stump;
  stump_options.seed = derive_seed(options.stump.seed, g, 2);
  result.stump = make_stump(*training_study, result.training, stump_options);

  const auto reference_names = study.group_names(g);
  hmc.seed = derive_seed(options.hmc.seed, g, 3);
  result.fungus = run_chain(*study.stump_and_fungus(result.stump.set, g), hmc);
  result.fungus_ks = compare_group(reference, result.fungus, reference_names, study.fungus_names(g));

  if (options.empirical_bayes) {
    const auto hypers = training_study->hyper_estimate(result.training);
    hmc.seed = derive_seed(options.hmc.seed, g, 4);
    result.eb = run_chain(*study.empirical_bayes(hypers, g), hmc);
    result.eb_ks = compare_group(reference, *result.eb, reference_names, study.eb_names(g));
  }
  return result;
}

}  // namespace sf

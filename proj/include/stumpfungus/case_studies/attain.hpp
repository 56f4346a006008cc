#pragma once

#include <array>
#include <memory>
#include <span>
#include <string_view>

#include "stumpfungus/case_studies/data.hpp"
#include "stumpfungus/case_studies/study.hpp"

namespace sf {

// Parameter-name prefixes of the three hierarchies, in model order.
inline constexpr std::array<std::string_view, 3> kAttainHierarchies{"sid", "sex", "pid"};
// Per hierarchy: mu_beta (3), sigma_beta, mu_sigma, sigma_sigma.
inline constexpr std::size_t kAttainHypersPerHierarchy = 6;
// Per group: beta (intercept, CC, VRQ) and sigma.
inline constexpr std::size_t kAttainGroupDim = 4;

// Cross-classified regression: for every hierarchy h and group g,
// beta_hg ~ Normal(mu_beta_h, sigma_beta_h), log sigma_hg ~ Normal(mu_sigma_h,
// sigma_sigma_h), and each score contributes Normal(y | beta_hg . x, sigma_hg)
// once per hierarchy. Flat priors on mu_beta, log sigma_beta, mu_sigma and
// log sigma_sigma.
std::unique_ptr<Model> attain_hier(const AttainData& data);
// Group parameters only; fixed_hypers holds the 18 hyperparameters on the
// constrained scale, hierarchy by hierarchy.
std::unique_ptr<Model> attain_eb(const AttainData& data, std::span<const double> fixed_hypers);
// Hyperparameters plus the groups present in the fungus (one school, with its
// SEX and PID groups renumbered locally), conditioned per component on the stump.
std::unique_ptr<Model> attain_sf(const StumpFungusSpec<AttainData>& spec);

inline AttainData attain_synthesize(std::uint64_t seed, const AttainSizes& sizes = {}) {
  return synthesize_attain(seed, sizes);
}

// theta: (beta, sigma) of one group per hierarchy, 12 values; tau: the 18
// constrained hyperparameters. Component 4h + k of theta gets its own factor.
class AttainKernel final : public GroupKernel {
 public:
  std::size_t group_dim() const override { return 3 * kAttainGroupDim; }
  std::size_t hyper_dim() const override { return 3 * kAttainHypersPerHierarchy; }
  void log_prob(std::span<const double> theta, std::span<const double> tau,
                std::span<double> out) const override;
};

std::unique_ptr<Study> attain_study(AttainData data);

}  // namespace sf

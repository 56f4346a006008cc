#pragma once

#include <memory>
#include <vector>

#include "stumpfungus/case_studies/data.hpp"
#include "stumpfungus/case_studies/study.hpp"

namespace sf {

// p0 ~ Uniform(0, 1), p_i | p0 ~ Beta(4 p0, 4 (1 - p0)), y_j ~ Bernoulli(p_{b_j}).
std::unique_ptr<Model> marbles_hier(const MarblesData& data);
// p0 fixed; one p_i per box.
std::unique_ptr<Model> marbles_eb(const MarblesData& data, double p0_fixed);
// Parameters (p0, theta); the fungus is the outcomes drawn from the new box.
std::unique_ptr<Model> marbles_sf(const StumpFungusSpec<std::vector<int>>& spec);

// Beta(4 p0, 4 (1 - p0)) at theta, as a function of p0.
class MarblesKernel final : public GroupKernel {
 public:
  std::size_t group_dim() const override { return 1; }
  std::size_t hyper_dim() const override { return 1; }
  void log_prob(std::span<const double> theta, std::span<const double> tau,
                std::span<double> out) const override;
};

std::unique_ptr<Study> marbles_study(MarblesData data);

}  // namespace sf

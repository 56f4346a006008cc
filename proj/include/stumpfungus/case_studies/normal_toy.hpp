#pragma once

#include <memory>
#include <vector>

#include "stumpfungus/case_studies/study.hpp"

namespace sf {

// Inference of (mu, sigma) of a normal with p(mu, log sigma) ∝ 1, given y.
// y_tilde is a surrogate set drawn from the predictive, used as a weighted
// stand-in for y.
struct NormalToy {
  std::unique_ptr<Model> model;
  std::vector<double> y;
  std::vector<double> y_tilde;
};

NormalToy normal_toy();
std::unique_ptr<Model> normal_model(std::vector<double> y);
// Same prior, conditioned stochastically on a weighted set of observations.
std::unique_ptr<Model> normal_weighted(const WeightedSampleSet& set);

// Normal(theta | mu, sigma) with tau = (mu, sigma).
class NormalKernel final : public GroupKernel {
 public:
  std::size_t group_dim() const override { return 1; }
  std::size_t hyper_dim() const override { return 2; }
  void log_prob(std::span<const double> theta, std::span<const double> tau,
                std::span<double> out) const override;
};

// The toy viewed as a one-group study: the "stump" is y_tilde and the
// compared parameters are (mu, sigma) themselves.
std::unique_ptr<Study> normal_study();

}  // namespace sf

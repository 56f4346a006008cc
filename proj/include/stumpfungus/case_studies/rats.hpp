#pragma once

#include <memory>
#include <vector>

#include "stumpfungus/case_studies/data.hpp"
#include "stumpfungus/case_studies/study.hpp"

namespace sf {

// p(alpha, beta) ∝ (alpha + beta)^(-5/2), p_i ~ Beta(alpha, beta),
// y_i ~ Binomial(n_i, p_i).
std::unique_ptr<Model> rats_hier(const RatsData& data);
// p ~ Beta(1, 1), y ~ Binomial(n, p).
std::unique_ptr<Model> rats_unpooled(int n, int y);
// Parameters (alpha, beta, theta); the fungus may hold several experiments
// sharing theta.
std::unique_ptr<Model> rats_sf(const StumpFungusSpec<std::vector<RatsRow>>& spec);

double rats_log_hyperprior(double alpha, double beta);

// Beta(alpha, beta) at theta.
class RatsKernel final : public GroupKernel {
 public:
  std::size_t group_dim() const override { return 1; }
  std::size_t hyper_dim() const override { return 2; }
  void log_prob(std::span<const double> theta, std::span<const double> tau,
                std::span<double> out) const override;
};

std::unique_ptr<Study> rats_study(RatsData data);

}  // namespace sf

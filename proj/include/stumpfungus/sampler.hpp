#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stumpfungus/model.hpp"
#include "stumpfungus/rng.hpp"

namespace sf {

class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HmcConfig {
  std::size_t leapfrog_steps = 10;
  double initial_step_size = 0.1;
  std::size_t burn_in = 1000;
  std::size_t draws = 5000;
  std::uint64_t seed = 1;
  double target_accept = 0.8;
  // Diagonal inverse metric estimated in windows during burn-in.
  bool adapt_metric = true;

  void validate() const;
};

// Post-burn-in draws in constrained coordinates, one row per draw.
struct PosteriorSamples {
  std::string model_id;
  std::vector<std::string> names;
  Eigen::MatrixXd draws;
  double accept_rate = 0.0;
  double step_size = 0.0;
  double wall_time_seconds = 0.0;
  HmcConfig config;

  std::size_t column(std::string_view name) const;
  std::vector<double> column_values(std::string_view name) const;
};

// Position with cached log density and gradient.
struct ChainState {
  std::vector<double> q;
  double log_density = 0.0;
  std::vector<double> gradient;
};

ChainState make_state(const Model& model, std::span<const double> q);

struct LeapfrogResult {
  ChainState end;
  std::vector<double> p;
  bool divergent = false;
};

// Kick-drift-kick integration. inv_metric empty means identity.
LeapfrogResult leapfrog(const Model& model, const ChainState& start, std::span<const double> p,
                        double step, std::size_t steps, std::span<const double> inv_metric = {});
LeapfrogResult leapfrog(const Model& model, std::span<const double> q, std::span<const double> p,
                        double step, std::size_t steps, std::span<const double> inv_metric = {});

double hamiltonian(double log_density, std::span<const double> p,
                   std::span<const double> inv_metric = {});

struct HmcTransition {
  ChainState state;
  bool accepted = false;
  bool divergent = false;
  double accept_prob = 0.0;
};

// One Metropolis-corrected trajectory from a freshly drawn Gaussian momentum.
HmcTransition hmc_step(const Model& model, const ChainState& current, double step,
                       std::size_t steps, Rng& rng, std::span<const double> inv_metric = {});

// Burn-in with dual-averaging step size (and optional diagonal metric)
// adaptation, then config.draws frozen-parameter draws. Starts at the
// unconstrained origin. Deterministic given (model, config).
PosteriorSamples run_chain(const Model& model, const HmcConfig& config);

}  // namespace sf

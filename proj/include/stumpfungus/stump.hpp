#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stumpfungus/sampler.hpp"

namespace sf {

class DegenerateSupportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StumpMeta {
  std::uint64_t seed = 0;
  std::size_t hyper_samples = 0;  // N used by the weight optimization
  std::string created;
  double objective = 0.0;  // S-hat at the returned weights
  std::size_t iterations = 0;
};

// M draws of group parameters (constrained coordinates) with weights. Joint
// weighting stores an M x 1 weight column; per-component weighting stores one
// weight per sample coordinate (M x d_group).
struct WeightedSampleSet {
  std::string model_id;
  Eigen::MatrixXd samples;
  Eigen::MatrixXd weights;
  bool per_component = false;
  StumpMeta meta;

  std::size_t size() const { return static_cast<std::size_t>(samples.rows()); }
  std::size_t group_dim() const { return static_cast<std::size_t>(samples.cols()); }
  // Weight applied to coordinate c of sample j.
  double weight(std::size_t j, std::size_t c) const;
  void validate() const;
};

// N posterior draws of the hyperparameters with their log prior values.
struct HyperSampleSet {
  Eigen::MatrixXd taus;
  Eigen::VectorXd log_prior;

  std::size_t size() const { return static_cast<std::size_t>(taus.rows()); }
};

// Column indices of each group's parameters, per hierarchy. A sample row
// concatenates one (group, draw) pick from every hierarchy.
struct GroupLayout {
  std::vector<std::vector<std::vector<std::size_t>>> hierarchies;

  std::size_t group_dim() const;
};

// log p(theta | tau) for one stump row, split into independent factors: out[c]
// receives the term for coordinate c. Kernels that do not factorize put the
// whole value into out[0] and report factorizes() == false.
class GroupKernel {
 public:
  virtual ~GroupKernel() = default;
  virtual std::size_t group_dim() const = 0;
  virtual std::size_t hyper_dim() const = 0;
  virtual bool factorizes() const { return true; }
  virtual void log_prob(std::span<const double> theta, std::span<const double> tau,
                        std::span<double> out) const = 0;
};

WeightedSampleSet draw_sample_set(const PosteriorSamples& posterior, const GroupLayout& layout,
                                  std::size_t m, std::uint64_t seed, bool per_component,
                                  std::string model_id);

// Selects hyperparameter columns; keeps every draw when max_samples == 0,
// otherwise evenly spaced rows. log_prior defaults to zeros (uniform prior).
HyperSampleSet make_hyper_set(
    const PosteriorSamples& posterior, std::span<const std::size_t> hyper_columns,
    std::size_t max_samples = 0,
    const std::function<double(std::span<const double>)>& log_prior = {});

// sum_j w_j log p(theta_j | tau), or sum_j sum_c w_jc log p(theta_jc | tau).
double log_stoch_cond(const WeightedSampleSet& set, std::span<const double> tau,
                      const GroupKernel& kernel);

// Matrix of log p(theta_j | tau_i): N rows and one column per weight, in the
// same flattened order as the set's weights (row-major over M x components).
Eigen::MatrixXd loglik_matrix(const WeightedSampleSet& set, const HyperSampleSet& hyper,
                              const GroupKernel& kernel);

// Objective on a precomputed log-likelihood matrix.
double s_hat(const Eigen::MatrixXd& loglik, const Eigen::VectorXd& log_prior,
             const Eigen::VectorXd& w);
Eigen::VectorXd s_hat_gradient(const Eigen::MatrixXd& loglik, const Eigen::VectorXd& log_prior,
                               const Eigen::VectorXd& w);

double s_hat_full(const WeightedSampleSet& set, const HyperSampleSet& hyper,
                  const GroupKernel& kernel);
double s_hat_uniform(const WeightedSampleSet& set, const HyperSampleSet& hyper,
                     const GroupKernel& kernel);
// Same shape as set.weights.
Eigen::MatrixXd grad_s_hat(const WeightedSampleSet& set, const HyperSampleSet& hyper,
                           const GroupKernel& kernel);

struct OptimizerConfig {
  double learning_rate = 0.0;  // 0 selects 1e-3 / N
  double momentum = 0.9;
  std::size_t max_iters = 5000;
  double grad_tol = 0.0;  // 0 selects 1e-6 * N
  // Keep the total weight of every component fixed at M, the value w = 1
  // starts from. Without it the ascent drifts toward w = 0, the trivial
  // maximizer of the sample-normalized objective.
  bool preserve_total_weight = true;
  bool use_prior = false;  // s_hat_full instead of s_hat_uniform
};

struct OptimizeResult {
  WeightedSampleSet set;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t backtracks = 0;
};

// Gradient ascent with momentum from w = 1. Never returns weights scoring below
// w = 1.
OptimizeResult optimize_weights(const WeightedSampleSet& set, const HyperSampleSet& hyper,
                                const GroupKernel& kernel, const OptimizerConfig& config = {});

}  // namespace sf

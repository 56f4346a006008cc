#include "stumpfungus/stump.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <unordered_set>

#include "stumpfungus/parallel.hpp"

namespace sf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> row_of(const Eigen::MatrixXd& m, Eigen::Index r) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(c)] = m(r, c);
  return out;
}

Eigen::VectorXd flatten_weights(const WeightedSampleSet& set) {
  // Row-major: index j * cols + c.
  Eigen::VectorXd w(set.weights.size());
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < set.weights.rows(); ++j) {
    for (Eigen::Index c = 0; c < set.weights.cols(); ++c) w(k++) = set.weights(j, c);
  }
  return w;
}

Eigen::MatrixXd unflatten_weights(const Eigen::VectorXd& w, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd out(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < rows; ++j) {
    for (Eigen::Index c = 0; c < cols; ++c) out(j, c) = w(k++);
  }
  return out;
}

// s_i = log_prior_i + sum_k w_k L_ik, with 0 * (-inf) taken as 0.
Eigen::VectorXd scores(const Eigen::MatrixXd& loglik, const Eigen::VectorXd& log_prior,
                       const Eigen::VectorXd& w) {
  if (loglik.allFinite()) return log_prior + loglik * w;
  Eigen::VectorXd s = log_prior;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (w(k) == 0.0) continue;
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) += w(k) * loglik(i, k);
  }
  return s;
}

double log_sum_exp(const Eigen::VectorXd& s) {
  const double m = s.maxCoeff();
  if (m == kNegInf) return kNegInf;
  return m + std::log((s.array() - m).exp().sum());
}

// Objective without the degenerate-support exception; NaN/-inf pass through.
double s_hat_unchecked(const Eigen::MatrixXd& loglik, const Eigen::VectorXd& log_prior,
                       const Eigen::VectorXd& w) {
  const Eigen::VectorXd s = scores(loglik, log_prior, w);
  const double lse = log_sum_exp(s);
  if (lse == kNegInf) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(s.size());
  if (s.size() == 1) return 0.0;
  return s.sum() - n * lse;
}

void check_shapes(const Eigen::MatrixXd& loglik, const Eigen::VectorXd& log_prior,
                  const Eigen::VectorXd& w) {
  if (loglik.rows() < 1) throw std::invalid_argument("S-hat needs at least one hyper sample");
  if (log_prior.size() != loglik.rows() || w.size() != loglik.cols()) {
    throw DimensionError(fmt::format("S-hat shape mismatch: loglik {}x{}, prior {}, weights {}",
                                     loglik.rows(), loglik.cols(), log_prior.size(), w.size()));
  }
}

}  // namespace

double WeightedSampleSet::weight(std::size_t j, std::size_t c) const {
  const auto row = static_cast<Eigen::Index>(j);
  return per_component ? weights(row, static_cast<Eigen::Index>(c)) : weights(row, 0);
}

void WeightedSampleSet::validate() const {
  if (samples.rows() < 1) throw std::invalid_argument("weighted sample set needs M >= 1");
  if (!samples.allFinite() || !weights.allFinite()) {
    throw std::invalid_argument("weighted sample set has non-finite entries");
  }
  const Eigen::Index want_cols = per_component ? samples.cols() : 1;
  if (weights.rows() != samples.rows() || weights.cols() != want_cols) {
    throw DimensionError(fmt::format("weights are {}x{}, expected {}x{}", weights.rows(),
                                     weights.cols(), samples.rows(), want_cols));
  }
}

std::size_t GroupLayout::group_dim() const {
  std::size_t d = 0;
  for (const auto& h : hierarchies) d += h.empty() ? 0 : h.front().size();
  return d;
}

WeightedSampleSet draw_sample_set(const PosteriorSamples& posterior, const GroupLayout& layout,
                                  std::size_t m, std::uint64_t seed, bool per_component,
                                  std::string model_id) {
  if (m < 1) throw std::invalid_argument("stump size M must be at least 1");
  const auto rows = static_cast<std::size_t>(posterior.draws.rows());
  const std::size_t d = layout.group_dim();
  for (const auto& h : layout.hierarchies) {
    if (h.empty()) throw std::invalid_argument("group layout has an empty hierarchy");
    for (const auto& g : h) {
      if (g.size() != h.front().size()) {
        throw std::invalid_argument("groups within a hierarchy must have equal dimension");
      }
    }
    if (m > h.size() * rows) {
      throw std::invalid_argument(fmt::format(
          "stump size {} exceeds the {} distinct (group, draw) pairs available", m,
          h.size() * rows));
    }
  }

  WeightedSampleSet set;
  set.model_id = std::move(model_id);
  set.per_component = per_component;
  set.samples.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  set.meta.seed = seed;

  Rng rng(seed);
  std::size_t col0 = 0;
  for (const auto& h : layout.hierarchies) {
    std::unordered_set<std::size_t> used;
    for (std::size_t j = 0; j < m; ++j) {
      std::size_t g = 0, r = 0;
      do {
        g = rng.index(h.size());
        r = rng.index(rows);
      } while (!used.insert(g * rows + r).second);
      for (std::size_t k = 0; k < h[g].size(); ++k) {
        set.samples(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(col0 + k)) =
            posterior.draws(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(h[g][k]));
      }
    }
    col0 += h.front().size();
  }
  set.weights = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(m),
                                      per_component ? static_cast<Eigen::Index>(d) : 1);
  return set;
}

HyperSampleSet make_hyper_set(const PosteriorSamples& posterior,
                              std::span<const std::size_t> hyper_columns,
                              std::size_t max_samples,
                              const std::function<double(std::span<const double>)>& log_prior) {
  const auto rows = static_cast<std::size_t>(posterior.draws.rows());
  const std::size_t n = (max_samples == 0 || max_samples >= rows) ? rows : max_samples;
  HyperSampleSet hyper;
  hyper.taus.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(hyper_columns.size()));
  hyper.log_prior = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::vector<double> tau(hyper_columns.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i * rows / n);
    for (std::size_t c = 0; c < hyper_columns.size(); ++c) {
      tau[c] = posterior.draws(r, static_cast<Eigen::Index>(hyper_columns[c]));
      hyper.taus(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = tau[c];
    }
    if (log_prior) hyper.log_prior(static_cast<Eigen::Index>(i)) = log_prior(tau);
  }
  return hyper;
}

double log_stoch_cond(const WeightedSampleSet& set, std::span<const double> tau,
                      const GroupKernel& kernel) {
  const std::size_t d = set.group_dim();
  std::vector<double> terms(d);
  double total = 0.0;
  for (std::size_t j = 0; j < set.size(); ++j) {
    const auto theta = row_of(set.samples, static_cast<Eigen::Index>(j));
    kernel.log_prob(theta, tau, terms);
    for (std::size_t c = 0; c < d; ++c) {
      const double w = set.weight(j, c);
      if (w != 0.0) total += w * terms[c];
    }
  }
  return total;
}

Eigen::MatrixXd loglik_matrix(const WeightedSampleSet& set, const HyperSampleSet& hyper,
                              const GroupKernel& kernel) {
  set.validate();
  const std::size_t d = set.group_dim();
  const std::size_t m = set.size();
  if (kernel.group_dim() != d || kernel.hyper_dim() != static_cast<std::size_t>(hyper.taus.cols())) {
    throw DimensionError("kernel dimensions do not match the sample sets");
  }
  if (set.per_component && !kernel.factorizes()) {
    throw std::invalid_argument("per-component weights need a factorizing kernel");
  }
  const Eigen::Index cols = set.per_component ? static_cast<Eigen::Index>(m * d)
                                              : static_cast<Eigen::Index>(m);
  Eigen::MatrixXd loglik(hyper.taus.rows(), cols);

  std::vector<std::vector<double>> thetas;
  thetas.reserve(m);
  for (std::size_t j = 0; j < m; ++j) thetas.push_back(row_of(set.samples, static_cast<Eigen::Index>(j)));

  parallel_for(static_cast<std::size_t>(hyper.taus.rows()), [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    const auto tau = row_of(hyper.taus, row);
    std::vector<double> terms(d);
    for (std::size_t j = 0; j < m; ++j) {
      kernel.log_prob(thetas[j], tau, terms);
      if (set.per_component) {
        for (std::size_t c = 0; c < d; ++c) loglik(row, static_cast<Eigen::Index>(j * d + c)) = terms[c];
      } else {
        double sum = 0.0;
        for (double t : terms) sum += t;
        loglik(row, static_cast<Eigen::Index>(j)) = sum;
      }
    }
  });
  return loglik;
}

double s_hat(const Eigen::MatrixXd& loglik, const Eigen::VectorXd& log_prior,
             const Eigen::VectorXd& w) {
  check_shapes(loglik, log_prior, w);
  const double value = s_hat_unchecked(loglik, log_prior, w);
  if (std::isnan(value)) {
    throw DegenerateSupportError("degenerate support: every hyper sample has zero density");
  }
  return value;
}

Eigen::VectorXd s_hat_gradient(const Eigen::MatrixXd& loglik, const Eigen::VectorXd& log_prior,
                               const Eigen::VectorXd& w) {
  check_shapes(loglik, log_prior, w);
  const Eigen::VectorXd s = scores(loglik, log_prior, w);
  const double lse = log_sum_exp(s);
  if (lse == kNegInf) {
    throw DegenerateSupportError("degenerate support: every hyper sample has zero density");
  }
  const double n = static_cast<double>(s.size());
  const Eigen::VectorXd softmax = (s.array() - lse).exp().matrix();
  if (loglik.allFinite()) {
    return loglik.colwise().sum().transpose() - n * (loglik.transpose() * softmax);
  }
  Eigen::VectorXd g(loglik.cols());
  for (Eigen::Index k = 0; k < loglik.cols(); ++k) {
    double total = 0.0, expected = 0.0;
    for (Eigen::Index i = 0; i < loglik.rows(); ++i) {
      total += loglik(i, k);
      if (softmax(i) != 0.0) expected += softmax(i) * loglik(i, k);
    }
    g(k) = total - n * expected;
  }
  return g;
}

double s_hat_full(const WeightedSampleSet& set, const HyperSampleSet& hyper,
                  const GroupKernel& kernel) {
  return s_hat(loglik_matrix(set, hyper, kernel), hyper.log_prior, flatten_weights(set));
}

double s_hat_uniform(const WeightedSampleSet& set, const HyperSampleSet& hyper,
                     const GroupKernel& kernel) {
  return s_hat(loglik_matrix(set, hyper, kernel), Eigen::VectorXd::Zero(hyper.taus.rows()),
               flatten_weights(set));
}

Eigen::MatrixXd grad_s_hat(const WeightedSampleSet& set, const HyperSampleSet& hyper,
                           const GroupKernel& kernel) {
  const Eigen::VectorXd g =
      s_hat_gradient(loglik_matrix(set, hyper, kernel), hyper.log_prior, flatten_weights(set));
  return unflatten_weights(g, set.weights.rows(), set.weights.cols());
}

OptimizeResult optimize_weights(const WeightedSampleSet& set, const HyperSampleSet& hyper,
                                const GroupKernel& kernel, const OptimizerConfig& config) {
  if (hyper.size() < 2) throw std::invalid_argument("weight optimization needs N >= 2 hyper samples");
  const double n = static_cast<double>(hyper.size());
  double rate = config.learning_rate > 0.0 ? config.learning_rate : 1e-3 / n;
  const double tol = config.grad_tol > 0.0 ? config.grad_tol : 1e-6 * n;

  const Eigen::MatrixXd loglik = loglik_matrix(set, hyper, kernel);
  const Eigen::VectorXd prior =
      config.use_prior ? hyper.log_prior : Eigen::VectorXd::Zero(hyper.taus.rows());
  const Eigen::Index rows = set.weights.rows();
  const Eigen::Index cols = set.weights.cols();

  // Weights sharing a component form one block under the total-weight constraint.
  const auto project = [&](Eigen::VectorXd& g) {
    if (!config.preserve_total_weight) return;
    for (Eigen::Index c = 0; c < cols; ++c) {
      double mean = 0.0;
      for (Eigen::Index j = 0; j < rows; ++j) mean += g(j * cols + c);
      mean /= static_cast<double>(rows);
      for (Eigen::Index j = 0; j < rows; ++j) g(j * cols + c) -= mean;
    }
  };

  Eigen::VectorXd w = Eigen::VectorXd::Ones(rows * cols);
  const double initial = s_hat(loglik, prior, w);
  if (!std::isfinite(initial)) {
    throw DegenerateSupportError("S-hat is not finite at w = 1");
  }

  OptimizeResult result;
  result.initial_objective = initial;
  Eigen::VectorXd best = w;
  double best_value = initial;
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(w.size());

  std::size_t iter = 0;
  for (; iter < config.max_iters; ++iter) {
    Eigen::VectorXd g = s_hat_gradient(loglik, prior, w);
    project(g);
    if (g.lpNorm<Eigen::Infinity>() <= tol) {
      result.converged = true;
      break;
    }
    velocity = config.momentum * velocity + rate * g;
    const Eigen::VectorXd next = w + velocity;
    const double value = s_hat_unchecked(loglik, prior, next);
    if (!std::isfinite(value)) {
      if (++result.backtracks > 10) {
        throw std::runtime_error("weight optimization: objective stayed non-finite after 10 halvings");
      }
      rate *= 0.5;
      velocity.setZero();
      continue;
    }
    w = next;
    if (value > best_value) {
      best_value = value;
      best = w;
    }
  }

  result.iterations = iter;
  result.final_objective = best_value;
  result.set = set;
  result.set.weights = unflatten_weights(best, rows, cols);
  result.set.meta.hyper_samples = hyper.size();
  result.set.meta.objective = best_value;
  result.set.meta.iterations = iter;
  return result;
}

}  // namespace sf

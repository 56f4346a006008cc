#include "stumpfungus/sampler.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace sf {

void HmcConfig::validate() const {
  if (leapfrog_steps < 1) throw std::invalid_argument("leapfrog_steps must be at least 1");
  if (draws < 1) throw std::invalid_argument("draws must be at least 1");
  if (!(initial_step_size > 0.0) || !std::isfinite(initial_step_size)) {
    throw std::invalid_argument("initial_step_size must be positive");
  }
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw std::invalid_argument("target_accept must lie in (0, 1)");
  }
}

std::size_t PosteriorSamples::column(std::string_view name) const {
  const auto it = std::ranges::find(names, name);
  if (it == names.end()) {
    throw std::out_of_range(fmt::format("posterior '{}' has no column '{}'", model_id, name));
  }
  return static_cast<std::size_t>(it - names.begin());
}

std::vector<double> PosteriorSamples::column_values(std::string_view name) const {
  const auto c = draws.col(static_cast<Eigen::Index>(column(name)));
  return {c.begin(), c.end()};
}

ChainState make_state(const Model& model, std::span<const double> q) {
  ChainState s;
  s.q.assign(q.begin(), q.end());
  s.gradient.resize(q.size());
  s.log_density = model.log_density_gradient(s.q, s.gradient);
  return s;
}

namespace {

bool all_finite(std::span<const double> xs) {
  return std::ranges::all_of(xs, [](double x) { return std::isfinite(x); });
}

double metric_at(std::span<const double> inv_metric, std::size_t i) {
  return inv_metric.empty() ? 1.0 : inv_metric[i];
}

std::vector<double> draw_momentum(std::size_t d, Rng& rng, std::span<const double> inv_metric) {
  std::vector<double> p(d);
  for (std::size_t i = 0; i < d; ++i) p[i] = rng.normal() / std::sqrt(metric_at(inv_metric, i));
  return p;
}

class DualAveraging {
 public:
  explicit DualAveraging(double target) : target_(target) {}

  void restart(double step) {
    mu_ = std::log(10.0 * step);
    h_bar_ = 0.0;
    x_bar_ = 0.0;
    t_ = 0;
  }

  double update(double accept_prob) {
    ++t_;
    const double t = static_cast<double>(t_);
    const double eta = 1.0 / (t + kT0);
    h_bar_ = (1.0 - eta) * h_bar_ + eta * (target_ - accept_prob);
    const double log_step = mu_ - std::sqrt(t) / kGamma * h_bar_;
    const double weight = std::pow(t, -kKappa);
    x_bar_ = weight * log_step + (1.0 - weight) * x_bar_;
    return std::exp(log_step);
  }

  double final_step() const { return std::exp(x_bar_); }

 private:
  static constexpr double kGamma = 0.05;
  static constexpr double kT0 = 10.0;
  static constexpr double kKappa = 0.75;
  double target_;
  double mu_ = 0.0;
  double h_bar_ = 0.0;
  double x_bar_ = 0.0;
  std::size_t t_ = 0;
};

// Doubles or halves the step until the one-step acceptance crosses 0.8.
double find_reasonable_step(const Model& model, const ChainState& state, double step, Rng& rng,
                            std::span<const double> inv_metric) {
  const double log_threshold = std::log(0.8);
  int direction = 0;
  for (int iter = 0; iter < 100; ++iter) {
    const auto p = draw_momentum(state.q.size(), rng, inv_metric);
    const double h0 = hamiltonian(state.log_density, p, inv_metric);
    const auto lf = leapfrog(model, state, p, step, 1, inv_metric);
    double delta = -std::numeric_limits<double>::infinity();
    if (!lf.divergent) delta = h0 - hamiltonian(lf.end.log_density, lf.p, inv_metric);
    if (std::isnan(delta)) delta = -std::numeric_limits<double>::infinity();
    if (direction == 0) direction = delta > log_threshold ? 1 : -1;
    if (direction == 1 && !(delta > log_threshold)) break;
    if (direction == -1 && !(delta < log_threshold)) break;
    step = direction == 1 ? 2.0 * step : 0.5 * step;
    if (step > 1e7 || step < 1e-12) break;
  }
  return std::clamp(step, 1e-12, 1e7);
}

// End iterations of the slow metric-adaptation windows: a 75-iteration
// initial buffer, doubling windows from 25, and a terminal step-size-only
// buffer of 40% of burn-in. A 50-iteration terminal buffer leaves the
// averaged log step biased low and post-burn-in acceptance near 0.95.
std::vector<std::size_t> metric_window_ends(std::size_t burn_in, std::size_t& first_start) {
  std::size_t init = 75, term = std::max<std::size_t>(50, burn_in * 2 / 5), base = 25;
  if (burn_in < 20) return {};
  if (init + term + base > burn_in) {
    init = burn_in * 15 / 100;
    term = burn_in * 2 / 5;
    base = burn_in - init - term;
  }
  first_start = init;
  const std::size_t limit = burn_in - term;
  std::vector<std::size_t> ends;
  std::size_t start = init, width = base;
  while (start < limit) {
    std::size_t end = start + width;
    if (end + 2 * width > limit) end = limit;
    ends.push_back(end);
    start = end;
    width *= 2;
  }
  return ends;
}

class Welford {
 public:
  explicit Welford(std::size_t d) : mean_(d, 0.0), m2_(d, 0.0) {}
  void add(std::span<const double> x) {
    ++n_;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double delta = x[i] - mean_[i];
      mean_[i] += delta / static_cast<double>(n_);
      m2_[i] += delta * (x[i] - mean_[i]);
    }
  }
  // Variance shrunk toward 1e-3 as in the common regularized estimator.
  std::vector<double> regularized_variance() const {
    const double n = static_cast<double>(n_);
    std::vector<double> v(m2_.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double var = n > 1 ? m2_[i] / (n - 1.0) : 1.0;
      v[i] = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0));
    }
    return v;
  }
  void reset() {
    n_ = 0;
    std::ranges::fill(mean_, 0.0);
    std::ranges::fill(m2_, 0.0);
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> mean_, m2_;
};

}  // namespace

double hamiltonian(double log_density, std::span<const double> p,
                   std::span<const double> inv_metric) {
  double kinetic = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) kinetic += metric_at(inv_metric, i) * p[i] * p[i];
  return -log_density + 0.5 * kinetic;
}

LeapfrogResult leapfrog(const Model& model, const ChainState& start, std::span<const double> p,
                        double step, std::size_t steps, std::span<const double> inv_metric) {
  LeapfrogResult r{start, {p.begin(), p.end()}, false};
  auto& s = r.end;
  for (std::size_t n = 0; n < steps; ++n) {
    for (std::size_t i = 0; i < s.q.size(); ++i) r.p[i] += 0.5 * step * s.gradient[i];
    for (std::size_t i = 0; i < s.q.size(); ++i) s.q[i] += step * metric_at(inv_metric, i) * r.p[i];
    if (!all_finite(s.q)) {
      r.divergent = true;
      return r;
    }
    s.log_density = model.log_density_gradient(s.q, s.gradient);
    if (!std::isfinite(s.log_density) || !all_finite(s.gradient)) {
      r.divergent = true;
      return r;
    }
    for (std::size_t i = 0; i < s.q.size(); ++i) r.p[i] += 0.5 * step * s.gradient[i];
  }
  return r;
}

LeapfrogResult leapfrog(const Model& model, std::span<const double> q, std::span<const double> p,
                        double step, std::size_t steps, std::span<const double> inv_metric) {
  return leapfrog(model, make_state(model, q), p, step, steps, inv_metric);
}

HmcTransition hmc_step(const Model& model, const ChainState& current, double step,
                       std::size_t steps, Rng& rng, std::span<const double> inv_metric) {
  const auto p = draw_momentum(current.q.size(), rng, inv_metric);
  const double h0 = hamiltonian(current.log_density, p, inv_metric);
  auto lf = leapfrog(model, current, p, step, steps, inv_metric);

  HmcTransition t{current, false, lf.divergent, 0.0};
  const double u = rng.uniform();
  if (lf.divergent) return t;
  const double delta = h0 - hamiltonian(lf.end.log_density, lf.p, inv_metric);
  if (!std::isfinite(delta) || delta < -1000.0) {
    t.divergent = true;
    return t;
  }
  t.accept_prob = delta >= 0.0 ? 1.0 : std::exp(delta);
  if (u < t.accept_prob) {
    t.state = std::move(lf.end);
    t.accepted = true;
  }
  return t;
}

PosteriorSamples run_chain(const Model& model, const HmcConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const std::size_t d = model.dim();

  Rng rng(config.seed);
  ChainState state = make_state(model, std::vector<double>(d, 0.0));
  if (!std::isfinite(state.log_density) || !all_finite(state.gradient)) {
    throw SamplerError(
        fmt::format("model '{}': log density not finite at the unconstrained origin", model.id()));
  }

  std::vector<double> inv_metric(d, 1.0);
  double step = find_reasonable_step(model, state, config.initial_step_size, rng, inv_metric);
  DualAveraging adapt(config.target_accept);
  adapt.restart(step);

  std::size_t window_start = 0;
  const auto window_ends =
      config.adapt_metric ? metric_window_ends(config.burn_in, window_start) : std::vector<std::size_t>{};
  std::size_t next_window = 0;
  Welford welford(d);

  const std::size_t min_steps = (config.leapfrog_steps + 1) / 2;
  const auto jittered_steps = [&] {
    return min_steps + rng.index(config.leapfrog_steps - min_steps + 1);
  };

  bool any_finite_proposal = false;
  for (std::size_t it = 0; it < config.burn_in; ++it) {
    const auto t = hmc_step(model, state, step, jittered_steps(), rng, inv_metric);
    any_finite_proposal = any_finite_proposal || !t.divergent;
    state = t.state;
    step = adapt.update(t.accept_prob);

    if (next_window < window_ends.size() && it >= window_start) {
      welford.add(state.q);
      if (it + 1 == window_ends[next_window]) {
        inv_metric = welford.regularized_variance();
        welford.reset();
        ++next_window;
        step = find_reasonable_step(model, state, step, rng, inv_metric);
        adapt.restart(step);
      }
    }
  }
  if (config.burn_in > 0) {
    if (!any_finite_proposal) {
      throw SamplerError(fmt::format(
          "model '{}': cannot adapt, every burn-in proposal diverged", model.id()));
    }
    step = adapt.final_step();
  }

  PosteriorSamples out;
  out.model_id = model.id();
  out.names = model.space().column_names();
  out.config = config;
  out.step_size = step;
  out.draws.resize(static_cast<Eigen::Index>(config.draws), static_cast<Eigen::Index>(d));
  const auto transforms = model.space().coordinate_transforms();

  std::size_t accepted = 0;
  for (std::size_t it = 0; it < config.draws; ++it) {
    auto t = hmc_step(model, state, step, jittered_steps(), rng, inv_metric);
    accepted += t.accepted ? 1 : 0;
    state = std::move(t.state);
    for (std::size_t i = 0; i < d; ++i) {
      out.draws(static_cast<Eigen::Index>(it), static_cast<Eigen::Index>(i)) =
          constrain(transforms[i], state.q[i]);
    }
  }
  out.accept_rate = static_cast<double>(accepted) / static_cast<double>(config.draws);
  out.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

}  // namespace sf

#include <doctest.h>

#include <cmath>
#include <limits>

#include "stumpfungus/case_studies/marbles.hpp"
#include "stumpfungus/case_studies/rats.hpp"
#include "stumpfungus/stump.hpp"

using namespace sf;

namespace {

WeightedSampleSet joint_set(std::vector<double> thetas, std::vector<double> weights) {
  WeightedSampleSet set;
  set.model_id = "test";
  set.samples.resize(static_cast<Eigen::Index>(thetas.size()), 1);
  set.weights.resize(static_cast<Eigen::Index>(weights.size()), 1);
  for (std::size_t j = 0; j < thetas.size(); ++j) {
    set.samples(static_cast<Eigen::Index>(j), 0) = thetas[j];
    set.weights(static_cast<Eigen::Index>(j), 0) = weights[j];
  }
  return set;
}

HyperSampleSet rats_hypers(std::size_t n) {
  HyperSampleSet hyper;
  hyper.taus.resize(static_cast<Eigen::Index>(n), 2);
  hyper.log_prior = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    hyper.taus(static_cast<Eigen::Index>(i), 0) = 1.0 + 0.3 * static_cast<double>(i);
    hyper.taus(static_cast<Eigen::Index>(i), 1) = 4.0 - 0.2 * static_cast<double>(i % 7);
  }
  return hyper;
}

// The same log density at every tau.
class FlatKernel final : public GroupKernel {
 public:
  std::size_t group_dim() const override { return 1; }
  std::size_t hyper_dim() const override { return 2; }
  void log_prob(std::span<const double> theta, std::span<const double>,
                std::span<double> out) const override {
    out[0] = -theta[0] * theta[0];
  }
};

class NowhereKernel final : public GroupKernel {
 public:
  std::size_t group_dim() const override { return 1; }
  std::size_t hyper_dim() const override { return 2; }
  void log_prob(std::span<const double>, std::span<const double>,
                std::span<double> out) const override {
    out[0] = -std::numeric_limits<double>::infinity();
  }
};

PosteriorSamples tiny_posterior() {
  PosteriorSamples post;
  post.model_id = "tiny";
  post.names = {"a[1]", "a[2]"};
  post.draws.resize(3, 2);
  post.draws << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
  return post;
}

}  // namespace

TEST_CASE("log_stoch_cond") {
  const RatsKernel kernel;
  const std::vector<double> tau{2.0, 2.0};
  CHECK(log_stoch_cond(joint_set({0.3, 0.7}, {0.0, 0.0}), tau, kernel) == 0.0);
  const double value = log_stoch_cond(joint_set({0.3, 0.7}, {1.0, 1.0}), tau, kernel);
  CHECK(value == doctest::Approx(2.0 * std::log(6.0 * 0.3 * 0.7)).epsilon(1e-12));
  CHECK(value == doctest::Approx(0.4622234419267729).epsilon(1e-14));
  const double doubled = log_stoch_cond(joint_set({0.3, 0.7}, {2.0, 2.0}), tau, kernel);
  CHECK(doubled == 2.0 * value);
  const double mixed = log_stoch_cond(joint_set({0.2, 0.9}, {0.5, -1.5}), tau, kernel);
  CHECK(log_stoch_cond(joint_set({0.2, 0.9}, {1.5, -4.5}), tau, kernel) == doctest::Approx(3.0 * mixed));
}

TEST_CASE("s_hat special cases") {
  const RatsKernel kernel;
  const auto set = joint_set({0.1, 0.25, 0.4}, {1.0, 0.5, 2.0});
  CHECK(s_hat_uniform(set, rats_hypers(1), kernel) == 0.0);
  CHECK(s_hat_full(set, rats_hypers(1), kernel) == 0.0);

  const auto zero = joint_set({0.1, 0.25, 0.4}, {0.0, 0.0, 0.0});
  const double n = 12.0;
  CHECK(s_hat_uniform(zero, rats_hypers(12), kernel) == doctest::Approx(-n * std::log(n)).epsilon(1e-14));

  auto hyper = rats_hypers(12);
  CHECK(s_hat_full(set, hyper, kernel) == s_hat_uniform(set, hyper, kernel));
  hyper.log_prior.setConstant(-3.25);
  CHECK(s_hat_full(set, hyper, kernel) == doctest::Approx(s_hat_uniform(set, hyper, kernel)).epsilon(1e-12));
}

TEST_CASE("s_hat agrees with naive summation on a marbles stump") {
  const auto study = marbles_study(synthesize_marbles(2));
  HmcConfig config;
  config.burn_in = 300;
  config.draws = 500;
  const auto post = run_chain(*study->hierarchical(), config);
  const auto stump = study->draw_stump(post, 10, 3);
  const auto hyper = make_hyper_set(post, study->hyper_columns(post.names), 50);
  REQUIRE(hyper.size() == 50);

  const auto loglik = loglik_matrix(stump, hyper, study->kernel());
  double sum_s = 0.0, sum_exp = 0.0;
  for (Eigen::Index i = 0; i < loglik.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < loglik.cols(); ++j) s += loglik(i, j);
    sum_s += s;
    sum_exp += std::exp(s);
  }
  const double naive = sum_s - 50.0 * std::log(sum_exp);
  const double value = s_hat_uniform(stump, hyper, study->kernel());
  CHECK(std::isfinite(value));
  CHECK(value < 0.0);
  CHECK(std::abs(value - naive) <= 1e-9 * std::max(1.0, std::abs(naive)));
}

TEST_CASE("grad_s_hat special cases") {
  const RatsKernel kernel;
  const auto set = joint_set({0.1, 0.25, 0.4}, {1.0, 0.5, 2.0});
  const auto single = grad_s_hat(set, rats_hypers(1), kernel);
  CHECK(single.cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  // A column constant in i contributes nothing.
  const FlatKernel flat;
  const auto g = grad_s_hat(set, rats_hypers(9), flat);
  CHECK(g.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("grad_s_hat matches finite differences") {
  const RatsKernel kernel;
  auto set = joint_set({0.15, 0.3, 0.55}, {0.8, 1.2, 1.0});
  const auto hyper = rats_hypers(7);
  const auto g = grad_s_hat(set, hyper, kernel);
  const double h = 1e-6;
  for (Eigen::Index j = 0; j < 3; ++j) {
    auto up = set, down = set;
    up.weights(j, 0) += h;
    down.weights(j, 0) -= h;
    const double fd = (s_hat_full(up, hyper, kernel) - s_hat_full(down, hyper, kernel)) / (2.0 * h);
    CHECK(std::abs(g(j, 0) - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("optimize_weights keeps w = 1 when the objective is flat") {
  const FlatKernel flat;
  const auto set = joint_set({0.1, 0.25, 0.4}, {1.0, 1.0, 1.0});
  const auto result = optimize_weights(set, rats_hypers(9), flat);
  CHECK(result.set.weights == set.weights);
  CHECK(result.final_objective == result.initial_objective);
}

TEST_CASE("optimize_weights never scores below w = 1") {
  const RatsKernel kernel;
  const auto hyper = rats_hypers(20);
  for (double shift : {0.0, 0.1, 0.3}) {
    const auto set = joint_set({0.05 + shift, 0.2 + shift, 0.35 + shift, 0.5 + shift}, {1, 1, 1, 1});
    for (bool preserve : {true, false}) {
      OptimizerConfig config;
      config.preserve_total_weight = preserve;
      const auto result = optimize_weights(set, hyper, kernel, config);
      CHECK(result.final_objective >= result.initial_objective);
      CHECK(s_hat_uniform(result.set, hyper, kernel) >= s_hat_uniform(set, hyper, kernel));
      if (preserve) CHECK(result.set.weights.sum() == doctest::Approx(4.0).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(optimize_weights(joint_set({0.3}, {1.0}), rats_hypers(1), kernel),
                  std::invalid_argument);
}

TEST_CASE("draw_sample_set") {
  const auto post = tiny_posterior();
  GroupLayout layout;
  layout.hierarchies = {{{0}, {1}}};

  const auto full = draw_sample_set(post, layout, 6, 11, false, "tiny");
  CHECK(full.size() == 6);
  CHECK(full.weights == Eigen::MatrixXd::Ones(6, 1));
  std::vector<double> values(full.samples.data(), full.samples.data() + 6);
  std::ranges::sort(values);
  CHECK(values == std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6});

  const auto again = draw_sample_set(post, layout, 4, 11, false, "tiny");
  CHECK(again.samples == draw_sample_set(post, layout, 4, 11, false, "tiny").samples);
  CHECK_THROWS_AS(draw_sample_set(post, layout, 7, 11, false, "tiny"), std::invalid_argument);

  const auto per_component = draw_sample_set(post, layout, 3, 11, true, "tiny");
  CHECK(per_component.weights.cols() == 1);
  CHECK(per_component.per_component);
}

TEST_CASE("stump drawn from a marbles posterior stays in the unit interval") {
  const auto study = marbles_study(synthesize_marbles(1));
  HmcConfig config;
  config.burn_in = 200;
  config.draws = 200;
  const auto post = run_chain(*study->hierarchical(), config);
  const auto stump = study->draw_stump(post, 10, 5);
  CHECK(stump.size() == 10);
  CHECK(stump.samples.minCoeff() > 0.0);
  CHECK(stump.samples.maxCoeff() < 1.0);
}

TEST_CASE("every hyper sample at zero density is a degenerate support") {
  const NowhereKernel nowhere;
  const auto set = joint_set({0.1, 0.2}, {1.0, 1.0});
  CHECK_THROWS_AS(s_hat_uniform(set, rats_hypers(5), nowhere), DegenerateSupportError);
  CHECK_THROWS_AS(grad_s_hat(set, rats_hypers(5), nowhere), DegenerateSupportError);
  CHECK_THROWS_AS(optimize_weights(set, rats_hypers(5), nowhere), DegenerateSupportError);
}

TEST_CASE("weighted sample set validation") {
  auto set = joint_set({0.1, 0.2}, {1.0, 1.0});
  set.weights.resize(3, 1);
  set.weights.setOnes();
  CHECK_THROWS_AS(set.validate(), DimensionError);
}

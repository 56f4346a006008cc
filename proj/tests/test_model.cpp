#include <doctest.h>

#include <cmath>

#include "stumpfungus/case_studies/marbles.hpp"
#include "stumpfungus/model.hpp"
#include "stumpfungus/rng.hpp"
#include "test_support.hpp"

using sf::ParameterSpace;
using sf::TransformKind;

TEST_CASE("parameter space layout and names") {
  ParameterSpace s;
  s.add("alpha", 1, TransformKind::LogPositive)
      .add("p", 3, TransformKind::LogitUnit)
      .add("beta", std::vector<std::size_t>{2, 2}, TransformKind::Identity)
      .add("one", std::vector<std::size_t>{1}, TransformKind::Identity);
  CHECK(s.total_dim() == 9);
  CHECK(s.entry("p").offset == 1);
  CHECK(s.column_names() == std::vector<std::string>{"alpha", "p[1]", "p[2]", "p[3]", "beta[1,1]",
                                                     "beta[1,2]", "beta[2,1]", "beta[2,2]", "one[1]"});
  CHECK_THROWS_AS(s.add("p", 1, TransformKind::Identity), std::invalid_argument);
  CHECK_THROWS_AS(s.add("empty", 0, TransformKind::Identity), std::invalid_argument);
  CHECK_THROWS_AS(s.entry("missing"), std::out_of_range);
}

TEST_CASE("to_constrained on each transform") {
  ParameterSpace s;
  s.add("a", 1, TransformKind::Identity).add("b", 1, TransformKind::LogitUnit).add("c", 1, TransformKind::LogPositive);
  const std::vector<double> v{0.5, 0.0, 0.0};
  CHECK(sf::to_constrained(s, v) == std::vector<double>{0.5, 0.5, 1.0});
  CHECK_THROWS_AS(sf::to_constrained(s, std::vector<double>{1.0}), sf::DimensionError);
}

TEST_CASE("log_jacobian examples") {
  ParameterSpace identity;
  identity.add("x", 4, TransformKind::Identity);
  CHECK(sf::log_jacobian(identity, std::vector<double>{1.0, -3.0, 7.0, 0.2}) == 0.0);

  ParameterSpace positive;
  positive.add("x", 1, TransformKind::LogPositive);
  CHECK(sf::log_jacobian(positive, std::vector<double>{0.0}) == 0.0);

  ParameterSpace unit;
  unit.add("x", 1, TransformKind::LogitUnit);
  CHECK(sf::log_jacobian(unit, std::vector<double>{0.0}) == doctest::Approx(-1.3862944).epsilon(1e-7));
}

TEST_CASE("round trip through the constraining transforms") {
  ParameterSpace s;
  s.add("a", 1, TransformKind::Identity).add("b", 1, TransformKind::LogitUnit).add("c", 1, TransformKind::LogPositive);
  for (double v = -10.0; v <= 10.0; v += 0.25) {
    const std::vector<double> in{v, v, v};
    const auto back = sf::to_unconstrained(s, sf::to_constrained(s, in));
    for (double b : back) CHECK(std::abs(b - v) <= 1e-12 * std::max(1.0, std::abs(v)));
  }
}

TEST_CASE("check_gradient") {
  const sf::test::StandardNormal quadratic(3);
  const auto q = sf::check_gradient(quadratic, std::vector<double>{0.3, -1.7, 4.0});
  CHECK(q.max_error <= 1e-8);
  CHECK(q.passed(1e-8));

  const auto marbles = sf::marbles_hier(sf::synthesize_marbles(1));
  CHECK(sf::check_gradient(*marbles, std::vector<double>(marbles->dim(), 0.0)).max_error <= 1e-5);

  const sf::test::BoxedNormal boxed(0.5);
  const auto outside = sf::check_gradient(boxed, std::vector<double>{2.0});
  REQUIRE(outside.failed_coordinate.has_value());
  CHECK(*outside.failed_coordinate == 0);
  CHECK_FALSE(outside.passed(1.0));
}

TEST_CASE("identity-only model has no Jacobian term") {
  const sf::test::StandardNormal quadratic(2);
  CHECK(quadratic.log_density(std::vector<double>{1.0, 2.0}) == -2.5);
  CHECK_THROWS_AS(quadratic.log_density(std::vector<double>{1.0}), sf::DimensionError);
}

TEST_CASE("rng streams are reproducible and distinct") {
  auto a = sf::Rng::stream(5, 0);
  auto b = sf::Rng::stream(5, 0);
  auto c = sf::Rng::stream(5, 1);
  const double x = a.uniform();
  CHECK(x == b.uniform());
  CHECK(x != c.uniform());
}

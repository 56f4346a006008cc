#include <doctest.h>

#include <cmath>
#include <thread>
#include <vector>

#include "stumpfungus/ad.hpp"

using sf::ad::Var;

namespace {

std::vector<double> grad_of(auto f, std::vector<double> x) {
  std::vector<double> g(x.size());
  sf::ad::gradient(f, x, g);
  return g;
}

}  // namespace

TEST_CASE("arithmetic partials") {
  const auto g = grad_of(
      [](std::span<const Var> v) { return v[0] * v[1] + v[0] / v[1] - v[1]; }, {3.0, 2.0});
  CHECK(g[0] == doctest::Approx(2.0 + 0.5));
  CHECK(g[1] == doctest::Approx(3.0 - 3.0 / 4.0 - 1.0));
}

TEST_CASE("elementary functions") {
  const double x = 0.7;
  auto d = [](auto f, double at) { return grad_of([&](std::span<const Var> v) { return f(v[0]); }, {at})[0]; };
  CHECK(d([](const Var& v) { return exp(v); }, x) == doctest::Approx(std::exp(x)));
  CHECK(d([](const Var& v) { return log(v); }, x) == doctest::Approx(1.0 / x));
  CHECK(d([](const Var& v) { return log1p(v); }, x) == doctest::Approx(1.0 / (1.0 + x)));
  CHECK(d([](const Var& v) { return sqrt(v); }, x) == doctest::Approx(0.5 / std::sqrt(x)));
  CHECK(d([](const Var& v) { return square(v); }, x) == doctest::Approx(2.0 * x));
  const double s = 1.0 / (1.0 + std::exp(-x));
  CHECK(d([](const Var& v) { return sigmoid(v); }, x) == doctest::Approx(s * (1.0 - s)));
  CHECK(d([](const Var& v) { return log_sigmoid(v); }, x) == doctest::Approx(1.0 - s));
}

TEST_CASE("lgamma derivative is digamma") {
  const double euler_gamma = 0.57721566490153286;
  const auto g = grad_of([](std::span<const Var> v) { return lgamma(v[0]); }, {1.0});
  CHECK(g[0] == doctest::Approx(-euler_gamma).epsilon(1e-12));
  CHECK(sf::digamma(2.0) == doctest::Approx(1.0 - euler_gamma).epsilon(1e-12));
}

TEST_CASE("log_sigmoid stays finite far in the tails") {
  CHECK(sf::log_sigmoid(-800.0) == doctest::Approx(-800.0));
  CHECK(sf::log_sigmoid(800.0) == 0.0);
  CHECK(sf::sigmoid(-800.0) >= 0.0);
}

TEST_CASE("a variable used twice accumulates both paths") {
  const auto g = grad_of([](std::span<const Var> v) { return v[0] * v[0] * v[0]; }, {2.0});
  CHECK(g[0] == doctest::Approx(12.0));
}

TEST_CASE("constant result has zero gradient") {
  const auto g = grad_of([](std::span<const Var>) { return Var(4.0); }, {1.0, 2.0});
  CHECK(g == std::vector<double>{0.0, 0.0});
}

TEST_CASE("tapes are per thread") {
  std::vector<double> results(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([t, &results] {
      double last = 0.0;
      for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> g(1);
        sf::ad::gradient([](std::span<const Var> v) { return v[0] * v[0]; },
                         std::vector<double>{static_cast<double>(t)}, g);
        last = g[0];
      }
      results[static_cast<std::size_t>(t)] = last;
    });
  }
  for (auto& th : threads) th.join();
  for (int t = 0; t < 4; ++t) CHECK(results[static_cast<std::size_t>(t)] == 2.0 * t);
}

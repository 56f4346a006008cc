#pragma once

// Log densities shared by the case-study models. Each is generic over double
// and ad::Var so a single definition serves evaluation and differentiation.

#include <cmath>
#include <numbers>

#include "stumpfungus/ad.hpp"

namespace sf::dist {

inline constexpr double kHalfLog2Pi = 0.91893853320467274178;

template <class A, class B>
auto log_beta_fn(const A& a, const B& b) {
  using std::lgamma;
  return lgamma(a) + lgamma(b) - lgamma(a + b);
}

// Normal(x | mu, exp(log_sigma)).
template <class X, class M, class S>
auto normal_lpdf_log_sd(const X& x, const M& mu, const S& log_sigma) {
  using std::exp;
  const auto z = (x - mu) * exp(-log_sigma);
  return -kHalfLog2Pi - log_sigma - 0.5 * z * z;
}

// Beta(x | a, b) for a fixed x in (0, 1).
template <class A, class B>
auto beta_lpdf(double x, const A& a, const B& b) {
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta_fn(a, b);
}

// Density of v = logit(x) when x ~ Beta(a, b); includes the Jacobian.
template <class V, class A, class B>
auto beta_logit_lpdf(const V& v, const A& a, const B& b) {
  return a * log_sigmoid(v) + b * log_sigmoid(-v) - log_beta_fn(a, b);
}

inline double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Binomial(y | n, sigmoid(v)).
template <class V>
V binomial_logit_lpmf(int y, int n, const V& v) {
  return log_choose(n, y) + static_cast<double>(y) * log_sigmoid(v) +
         static_cast<double>(n - y) * log_sigmoid(-v);
}

// Bernoulli(y | sigmoid(v)).
template <class V>
V bernoulli_logit_lpmf(int y, const V& v) {
  return y != 0 ? V(log_sigmoid(v)) : V(log_sigmoid(-v));
}

}  // namespace sf::dist

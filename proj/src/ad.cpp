#include "stumpfungus/ad.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>

namespace sf {

namespace {
using IgnoreErrors = boost::math::policies::policy<
    boost::math::policies::domain_error<boost::math::policies::ignore_error>,
    boost::math::policies::pole_error<boost::math::policies::ignore_error>,
    boost::math::policies::overflow_error<boost::math::policies::ignore_error>,
    boost::math::policies::evaluation_error<boost::math::policies::ignore_error>>;
}

double digamma(double x) { return boost::math::digamma(x, IgnoreErrors()); }

}  // namespace sf

namespace sf::ad {

std::uint32_t Tape::leaf() {
  first_edge_.push_back(static_cast<std::uint32_t>(edges_.size()));
  return static_cast<std::uint32_t>(size() - 1);
}

std::uint32_t Tape::unary(std::uint32_t a, double da) {
  edges_.push_back({a, da});
  first_edge_.push_back(static_cast<std::uint32_t>(edges_.size()));
  return static_cast<std::uint32_t>(size() - 1);
}

std::uint32_t Tape::binary(std::uint32_t a, double da, std::uint32_t b, double db) {
  edges_.push_back({a, da});
  edges_.push_back({b, db});
  first_edge_.push_back(static_cast<std::uint32_t>(edges_.size()));
  return static_cast<std::uint32_t>(size() - 1);
}

void Tape::clear() {
  first_edge_.resize(1);
  edges_.clear();
}

std::span<const double> Tape::backward(std::uint32_t out) {
  adjoint_.assign(size(), 0.0);
  adjoint_[out] = 1.0;
  for (std::size_t i = out + 1; i-- > 0;) {
    const double a = adjoint_[i];
    if (a == 0.0) continue;
    for (std::uint32_t e = first_edge_[i]; e < first_edge_[i + 1]; ++e) {
      adjoint_[edges_[e].target] += edges_[e].partial * a;
    }
  }
  return adjoint_;
}

Tape& Tape::local() {
  static thread_local Tape tape;
  return tape;
}

Var lgamma(const Var& a) {
  return detail::make_unary(std::lgamma(a.value()), a, sf::digamma(a.value()));
}

Var log_sigmoid(const Var& a) {
  // d/dx log sigmoid(x) = sigmoid(-x)
  return detail::make_unary(sf::log_sigmoid(a.value()), a, sf::sigmoid(-a.value()));
}

Var sigmoid(const Var& a) {
  const double s = sf::sigmoid(a.value());
  return detail::make_unary(s, a, s * (1.0 - s));
}

}  // namespace sf::ad

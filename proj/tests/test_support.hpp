#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "stumpfungus/model.hpp"

namespace sf::test {

// -sum v_i^2 / 2 on identity coordinates.
class StandardNormal final : public AdModel<StandardNormal> {
 public:
  explicit StandardNormal(std::size_t d) { space_.add("x", std::vector<std::size_t>{d}, TransformKind::Identity); }
  const ParameterSpace& space() const override { return space_; }
  std::string id() const override { return "std_normal"; }

  template <class T>
  T evaluate(std::span<const T> v) const {
    T lp = 0.0;
    for (const auto& x : v) lp -= 0.5 * x * x;
    return lp;
  }

 private:
  ParameterSpace space_;
};

// Standard normal restricted to |x| < radius; -inf outside.
class BoxedNormal final : public AdModel<BoxedNormal> {
 public:
  explicit BoxedNormal(double radius) : radius_(radius) { space_.add("x", 1, TransformKind::Identity); }
  const ParameterSpace& space() const override { return space_; }
  std::string id() const override { return "boxed"; }

  template <class T>
  T evaluate(std::span<const T> v) const {
    if (std::abs(value_of(v[0])) >= radius_) return T(-std::numeric_limits<double>::infinity());
    return -0.5 * v[0] * v[0];
  }

 private:
  double radius_;
  ParameterSpace space_;
};

}  // namespace sf::test

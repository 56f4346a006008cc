#pragma once

// Small reverse-mode automatic differentiation tape for scalar log densities.
//
// A Var is a value plus the index of the tape node that produced it. Constants
// carry kConstant and never touch the tape. Every thread owns its own tape, so
// concurrent gradient evaluations do not interfere.

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace sf::ad {

inline constexpr std::uint32_t kConstant = 0xffffffffu;

class Tape {
 public:
  std::uint32_t leaf();
  std::uint32_t unary(std::uint32_t a, double da);
  std::uint32_t binary(std::uint32_t a, double da, std::uint32_t b, double db);

  void clear();
  std::size_t size() const { return first_edge_.size() - 1; }

  // Propagates d(out)/d(node) back to every node; returns the adjoints.
  std::span<const double> backward(std::uint32_t out);

  static Tape& local();

 private:
  struct Edge {
    std::uint32_t target;
    double partial;
  };
  std::vector<std::uint32_t> first_edge_{0};
  std::vector<Edge> edges_;
  std::vector<double> adjoint_;
};

class Var {
 public:
  Var() = default;
  Var(double value) : value_(value) {}  // NOLINT: implicit constants are intended
  Var(double value, std::uint32_t node) : value_(value), node_(node) {}

  double value() const { return value_; }
  std::uint32_t node() const { return node_; }
  bool is_constant() const { return node_ == kConstant; }

  Var& operator+=(const Var& o);
  Var& operator-=(const Var& o);
  Var& operator*=(const Var& o);
  Var& operator/=(const Var& o);

 private:
  double value_ = 0.0;
  std::uint32_t node_ = kConstant;
};

namespace detail {
inline Var make_unary(double value, const Var& a, double da) {
  if (a.is_constant()) return Var(value);
  return Var(value, Tape::local().unary(a.node(), da));
}
inline Var make_binary(double value, const Var& a, double da, const Var& b, double db) {
  if (a.is_constant()) return make_unary(value, b, db);
  if (b.is_constant()) return make_unary(value, a, da);
  return Var(value, Tape::local().binary(a.node(), da, b.node(), db));
}
}  // namespace detail

inline Var operator+(const Var& a, const Var& b) {
  return detail::make_binary(a.value() + b.value(), a, 1.0, b, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
  return detail::make_binary(a.value() - b.value(), a, 1.0, b, -1.0);
}
inline Var operator*(const Var& a, const Var& b) {
  return detail::make_binary(a.value() * b.value(), a, b.value(), b, a.value());
}
inline Var operator/(const Var& a, const Var& b) {
  const double q = a.value() / b.value();
  return detail::make_binary(q, a, 1.0 / b.value(), b, -q / b.value());
}
inline Var operator-(const Var& a) { return detail::make_unary(-a.value(), a, -1.0); }

inline Var& Var::operator+=(const Var& o) { return *this = *this + o; }
inline Var& Var::operator-=(const Var& o) { return *this = *this - o; }
inline Var& Var::operator*=(const Var& o) { return *this = *this * o; }
inline Var& Var::operator/=(const Var& o) { return *this = *this / o; }

inline Var exp(const Var& a) {
  const double e = std::exp(a.value());
  return detail::make_unary(e, a, e);
}
inline Var log(const Var& a) { return detail::make_unary(std::log(a.value()), a, 1.0 / a.value()); }
inline Var log1p(const Var& a) {
  return detail::make_unary(std::log1p(a.value()), a, 1.0 / (1.0 + a.value()));
}
inline Var sqrt(const Var& a) {
  const double s = std::sqrt(a.value());
  return detail::make_unary(s, a, 0.5 / s);
}
inline Var square(const Var& a) {
  return detail::make_unary(a.value() * a.value(), a, 2.0 * a.value());
}
Var lgamma(const Var& a);
Var log_sigmoid(const Var& a);
Var sigmoid(const Var& a);

// Evaluates f on fresh leaves at x and writes df/dx into grad. Returns f(x).
template <class F>
double gradient(F&& f, std::span<const double> x, std::span<double> grad) {
  Tape& tape = Tape::local();
  tape.clear();
  std::vector<Var> leaves;
  leaves.reserve(x.size());
  for (double xi : x) leaves.emplace_back(xi, tape.leaf());
  const Var out = std::forward<F>(f)(std::span<const Var>(leaves));
  if (out.is_constant()) {
    for (double& g : grad) g = 0.0;
    return out.value();
  }
  const auto adj = tape.backward(out.node());
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = adj[leaves[i].node()];
  return out.value();
}

}  // namespace sf::ad

namespace sf {

inline double value_of(double x) { return x; }
inline double value_of(const ad::Var& x) { return x.value(); }

inline double square(double x) { return x * x; }

// log(1 / (1 + exp(-x))) without overflow.
inline double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double digamma(double x);

}  // namespace sf

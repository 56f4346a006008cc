#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stumpfungus/ad.hpp"

namespace sf {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class TransformKind { Identity, LogPositive, LogitUnit };

std::string_view to_string(TransformKind kind);

struct ParameterEntry {
  std::string name;
  std::vector<std::size_t> dims;  // row-major; empty for a scalar
  TransformKind transform = TransformKind::Identity;
  std::size_t offset = 0;

  std::size_t size() const;
};

// Ordered, named blocks of unconstrained coordinates.
class ParameterSpace {
 public:
  // shape == 1 adds a scalar, named without an index.
  ParameterSpace& add(std::string name, std::size_t shape, TransformKind transform);
  // Always indexed, even when every dimension is 1.
  ParameterSpace& add(std::string name, std::vector<std::size_t> dims, TransformKind transform);

  const std::vector<ParameterEntry>& entries() const { return entries_; }
  const ParameterEntry& entry(std::string_view name) const;
  std::size_t total_dim() const { return total_dim_; }

  // One name per coordinate: "alpha", "p[3]", "sid.beta[2,1]" (1-based indices).
  std::vector<std::string> column_names() const;
  // Transform of each coordinate, in order.
  std::vector<TransformKind> coordinate_transforms() const;

 private:
  std::vector<ParameterEntry> entries_;
  std::size_t total_dim_ = 0;
};

double constrain(TransformKind kind, double v);
double unconstrain(TransformKind kind, double x);
double log_abs_det_jacobian(TransformKind kind, double v);

std::vector<double> to_constrained(const ParameterSpace& space, std::span<const double> v);
std::vector<double> to_unconstrained(const ParameterSpace& space, std::span<const double> x);
double log_jacobian(const ParameterSpace& space, std::span<const double> v);

// Differentiable unnormalized log density over unconstrained coordinates.
// Immutable after construction; safe to evaluate concurrently.
class Model {
 public:
  virtual ~Model() = default;

  virtual const ParameterSpace& space() const = 0;
  virtual std::string id() const = 0;

  // Includes the log-Jacobian of every non-identity transform. Returns -inf
  // outside the support.
  virtual double log_density(std::span<const double> v) const = 0;
  // Writes the gradient into grad and returns the log density.
  virtual double log_density_gradient(std::span<const double> v, std::span<double> grad) const = 0;

  std::size_t dim() const { return space().total_dim(); }
};

namespace detail {
void check_dim(const ParameterSpace& space, std::size_t n);
inline double support_guard(double lp) {
  return std::isnan(lp) ? -std::numeric_limits<double>::infinity() : lp;
}
}  // namespace detail

// Implements Model for a Derived class exposing
//   template <class T> T evaluate(std::span<const T> v) const;
// Gradients come from the reverse-mode tape.
template <class Derived>
class AdModel : public Model {
 public:
  double log_density(std::span<const double> v) const final {
    detail::check_dim(space(), v.size());
    return detail::support_guard(self().template evaluate<double>(v));
  }

  double log_density_gradient(std::span<const double> v, std::span<double> grad) const final {
    detail::check_dim(space(), v.size());
    detail::check_dim(space(), grad.size());
    const double lp = ad::gradient(
        [this](std::span<const ad::Var> x) { return self().template evaluate<ad::Var>(x); }, v,
        grad);
    return detail::support_guard(lp);
  }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

struct GradientCheck {
  double max_error = 0.0;
  std::optional<std::size_t> failed_coordinate;  // set when a perturbed point is not finite

  bool passed(double tolerance) const { return !failed_coordinate && max_error <= tolerance; }
};

// max_i |analytic_i - central_fd_i| / max(1, |analytic_i|), with step
// h_i = step * max(1, |v_i|).
GradientCheck check_gradient(const Model& model, std::span<const double> v, double step = 1e-5);

}  // namespace sf

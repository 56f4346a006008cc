#include "stumpfungus/model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>

namespace sf {

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::Identity: return "identity";
    case TransformKind::LogPositive: return "log";
    case TransformKind::LogitUnit: return "logit";
  }
  return "?";
}

std::size_t ParameterEntry::size() const {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

ParameterSpace& ParameterSpace::add(std::string name, std::size_t shape, TransformKind transform) {
  if (shape == 0) throw std::invalid_argument(fmt::format("parameter '{}' must have a positive shape", name));
  return add(std::move(name), shape == 1 ? std::vector<std::size_t>{} : std::vector<std::size_t>{shape},
             transform);
}

ParameterSpace& ParameterSpace::add(std::string name, std::vector<std::size_t> dims,
                                    TransformKind transform) {
  if (std::ranges::any_of(dims, [](std::size_t d) { return d == 0; })) {
    throw std::invalid_argument(fmt::format("parameter '{}' must have a positive shape", name));
  }
  if (std::ranges::any_of(entries_, [&](const ParameterEntry& e) { return e.name == name; })) {
    throw std::invalid_argument(fmt::format("duplicate parameter name '{}'", name));
  }
  ParameterEntry e{std::move(name), std::move(dims), transform, total_dim_};
  total_dim_ += e.size();
  entries_.push_back(std::move(e));
  return *this;
}

const ParameterEntry& ParameterSpace::entry(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e;
  }
  throw std::out_of_range(fmt::format("no parameter named '{}'", name));
}

std::vector<std::string> ParameterSpace::column_names() const {
  std::vector<std::string> names;
  names.reserve(total_dim_);
  for (const auto& e : entries_) {
    if (e.dims.empty()) {
      names.push_back(e.name);
      continue;
    }
    std::vector<std::size_t> index(e.dims.size(), 0);
    for (std::size_t k = 0; k < e.size(); ++k) {
      std::string label = e.name + "[";
      for (std::size_t d = 0; d < index.size(); ++d) {
        if (d > 0) label += ",";
        label += std::to_string(index[d] + 1);
      }
      names.push_back(label + "]");
      for (std::size_t d = index.size(); d-- > 0;) {
        if (++index[d] < e.dims[d]) break;
        index[d] = 0;
      }
    }
  }
  return names;
}

std::vector<TransformKind> ParameterSpace::coordinate_transforms() const {
  std::vector<TransformKind> out;
  out.reserve(total_dim_);
  for (const auto& e : entries_) out.insert(out.end(), e.size(), e.transform);
  return out;
}

double constrain(TransformKind kind, double v) {
  switch (kind) {
    case TransformKind::Identity: return v;
    case TransformKind::LogPositive: return std::exp(v);
    case TransformKind::LogitUnit: return sigmoid(v);
  }
  return v;
}

double unconstrain(TransformKind kind, double x) {
  switch (kind) {
    case TransformKind::Identity: return x;
    case TransformKind::LogPositive: return std::log(x);
    case TransformKind::LogitUnit: return std::log(x) - std::log1p(-x);
  }
  return x;
}

double log_abs_det_jacobian(TransformKind kind, double v) {
  switch (kind) {
    case TransformKind::Identity: return 0.0;
    case TransformKind::LogPositive: return v;
    case TransformKind::LogitUnit: return log_sigmoid(v) + log_sigmoid(-v);
  }
  return 0.0;
}

namespace detail {
void check_dim(const ParameterSpace& space, std::size_t n) {
  if (n != space.total_dim()) {
    throw DimensionError(
        fmt::format("expected {} coordinates, got {}", space.total_dim(), n));
  }
}
}  // namespace detail

std::vector<double> to_constrained(const ParameterSpace& space, std::span<const double> v) {
  detail::check_dim(space, v.size());
  std::vector<double> x(v.size());
  for (const auto& e : space.entries()) {
    for (std::size_t k = e.offset; k < e.offset + e.size(); ++k) x[k] = constrain(e.transform, v[k]);
  }
  return x;
}

std::vector<double> to_unconstrained(const ParameterSpace& space, std::span<const double> x) {
  detail::check_dim(space, x.size());
  std::vector<double> v(x.size());
  for (const auto& e : space.entries()) {
    for (std::size_t k = e.offset; k < e.offset + e.size(); ++k) {
      v[k] = unconstrain(e.transform, x[k]);
    }
  }
  return v;
}

double log_jacobian(const ParameterSpace& space, std::span<const double> v) {
  detail::check_dim(space, v.size());
  double total = 0.0;
  for (const auto& e : space.entries()) {
    for (std::size_t k = e.offset; k < e.offset + e.size(); ++k) {
      total += log_abs_det_jacobian(e.transform, v[k]);
    }
  }
  return total;
}

GradientCheck check_gradient(const Model& model, std::span<const double> v, double step) {
  const std::size_t d = model.dim();
  detail::check_dim(model.space(), v.size());
  std::vector<double> grad(d);
  model.log_density_gradient(v, grad);

  GradientCheck report;
  std::vector<double> x(v.begin(), v.end());
  for (std::size_t i = 0; i < d; ++i) {
    const double h = step * std::max(1.0, std::abs(v[i]));
    x[i] = v[i] + h;
    const double up = model.log_density(x);
    x[i] = v[i] - h;
    const double down = model.log_density(x);
    x[i] = v[i];
    if (!std::isfinite(up) || !std::isfinite(down) || !std::isfinite(grad[i])) {
      report.failed_coordinate = i;
      return report;
    }
    const double fd = (up - down) / (2.0 * h);
    report.max_error =
        std::max(report.max_error, std::abs(grad[i] - fd) / std::max(1.0, std::abs(grad[i])));
  }
  return report;
}

}  // namespace sf

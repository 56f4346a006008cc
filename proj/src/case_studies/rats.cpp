#include "stumpfungus/case_studies/rats.hpp"

#include <fmt/format.h>

#include <cmath>

#include "stumpfungus/distributions.hpp"

namespace sf {

namespace {

// -5/2 log(alpha + beta) in terms of the log-scale parameters, computed without
// overflow for large arguments.
template <class T>
T log_hyperprior(const T& log_alpha, const T& log_beta) {
  using std::exp;
  using std::log1p;
  const bool alpha_larger = value_of(log_alpha) >= value_of(log_beta);
  const T& hi = alpha_larger ? log_alpha : log_beta;
  const T& lo = alpha_larger ? log_beta : log_alpha;
  return -2.5 * (hi + log1p(exp(lo - hi)));
}

class RatsHier final : public AdModel<RatsHier> {
 public:
  explicit RatsHier(const RatsData& data) : rows_(data.rows) {
    data.validate();
    if (rows_.empty()) throw std::invalid_argument("rats data needs at least one experiment");
    for (const auto& r : rows_) log_choose_ += dist::log_choose(r.n, r.y);
    space_.add("alpha", 1, TransformKind::LogPositive);
    space_.add("beta", 1, TransformKind::LogPositive);
    space_.add("p", std::vector<std::size_t>{rows_.size()}, TransformKind::LogitUnit);
  }

  const ParameterSpace& space() const override { return space_; }
  std::string id() const override { return "rats"; }

  template <class T>
  T evaluate(std::span<const T> v) const {
    using std::exp;
    const T alpha = exp(v[0]);
    const T beta = exp(v[1]);
    // Hyperprior plus the log-Jacobians of both scale transforms.
    T lp = log_hyperprior(v[0], v[1]) + v[0] + v[1];
    T sum_log_p = 0.0;
    T sum_log_q = 0.0;
    T data = log_choose_;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const T lp_i = log_sigmoid(v[2 + i]);
      const T lq_i = log_sigmoid(-v[2 + i]);
      sum_log_p += lp_i;
      sum_log_q += lq_i;
      data += static_cast<double>(rows_[i].y) * lp_i +
              static_cast<double>(rows_[i].n - rows_[i].y) * lq_i;
    }
    // Sum of beta_logit_lpdf over experiments, collected.
    lp += alpha * sum_log_p + beta * sum_log_q -
          static_cast<double>(rows_.size()) * dist::log_beta_fn(alpha, beta);
    return lp + data;
  }

 private:
  std::vector<RatsRow> rows_;
  double log_choose_ = 0.0;
  ParameterSpace space_;
};

class RatsUnpooled final : public AdModel<RatsUnpooled> {
 public:
  RatsUnpooled(int n, int y) : n_(n), y_(y) {
    if (n < 0 || y < 0 || y > n) {
      throw std::invalid_argument(fmt::format("invalid counts n={} y={}", n, y));
    }
    space_.add("p", 1, TransformKind::LogitUnit);
  }

  const ParameterSpace& space() const override { return space_; }
  std::string id() const override { return "rats"; }

  template <class T>
  T evaluate(std::span<const T> v) const {
    return dist::beta_logit_lpdf(v[0], 1.0, 1.0) + dist::binomial_logit_lpmf(y_, n_, v[0]);
  }

 private:
  int n_;
  int y_;
  ParameterSpace space_;
};

class RatsSf final : public AdModel<RatsSf> {
 public:
  explicit RatsSf(const StumpFungusSpec<std::vector<RatsRow>>& spec) {
    detail::check_spec_ids("rats", spec.model_id, spec.stump.model_id);
    spec.stump.validate();
    if (spec.stump.group_dim() != 1) throw DimensionError("rats stump rows must hold one value");
    for (const auto& r : spec.fungus) {
      if (r.n < 0 || r.y < 0 || r.y > r.n) {
        throw std::invalid_argument(fmt::format("invalid counts n={} y={}", r.n, r.y));
      }
      successes_ += r.y;
      failures_ += r.n - r.y;
      log_choose_ += dist::log_choose(r.n, r.y);
    }
    for (std::size_t j = 0; j < spec.stump.size(); ++j) {
      const double w = spec.stump.weight(j, 0);
      if (w == 0.0) continue;
      const double x = spec.stump.samples(static_cast<Eigen::Index>(j), 0);
      total_weight_ += w;
      sum_log_x_ += w * std::log(x);
      sum_log1m_x_ += w * std::log1p(-x);
    }
    space_.add("alpha", 1, TransformKind::LogPositive);
    space_.add("beta", 1, TransformKind::LogPositive);
    space_.add("theta", 1, TransformKind::LogitUnit);
  }

  const ParameterSpace& space() const override { return space_; }
  std::string id() const override { return "rats"; }

  template <class T>
  T evaluate(std::span<const T> v) const {
    using std::exp;
    const T alpha = exp(v[0]);
    const T beta = exp(v[1]);
    T lp = log_hyperprior(v[0], v[1]) + v[0] + v[1];
    // sum_j w_j log Beta(x_j | alpha, beta)
    lp += (alpha - 1.0) * sum_log_x_ + (beta - 1.0) * sum_log1m_x_ -
          total_weight_ * dist::log_beta_fn(alpha, beta);
    lp += dist::beta_logit_lpdf(v[2], alpha, beta);
    return lp + log_choose_ + static_cast<double>(successes_) * log_sigmoid(v[2]) +
           static_cast<double>(failures_) * log_sigmoid(-v[2]);
  }

 private:
  long successes_ = 0;
  long failures_ = 0;
  double log_choose_ = 0.0;
  double total_weight_ = 0.0;
  double sum_log_x_ = 0.0;
  double sum_log1m_x_ = 0.0;
  ParameterSpace space_;
};

class RatsStudy final : public Study {
 public:
  explicit RatsStudy(RatsData data) : data_(std::move(data)) { data_.validate(); }

  std::string id() const override { return "rats"; }
  std::size_t group_count() const override { return data_.rows.size(); }
  std::unique_ptr<Model> hierarchical() const override { return rats_hier(data_); }
  std::unique_ptr<Study> without_group(std::size_t g) const override {
    return rats_study(data_.without_row(g));
  }

  GroupLayout group_layout(std::span<const std::string> names) const override {
    GroupLayout layout;
    auto& groups = layout.hierarchies.emplace_back();
    const std::size_t n = count_prefixed(names, "p[");
    for (std::size_t g = 0; g < n; ++g) {
      groups.push_back({column_index(names, fmt::format("p[{}]", g + 1))});
    }
    return layout;
  }
  std::vector<std::size_t> hyper_columns(std::span<const std::string> names) const override {
    return {column_index(names, "alpha"), column_index(names, "beta")};
  }
  std::function<double(std::span<const double>)> log_hyper_prior() const override {
    return [](std::span<const double> tau) { return rats_log_hyperprior(tau[0], tau[1]); };
  }
  const GroupKernel& kernel() const override { return kernel_; }

  std::unique_ptr<Model> stump_and_fungus(const WeightedSampleSet& stump,
                                          std::size_t g) const override {
    return rats_sf({stump, {data_.rows.at(g)}, "rats"});
  }

  std::vector<std::string> group_names(std::size_t g) const override {
    return {fmt::format("p[{}]", g + 1)};
  }
  std::vector<std::string> fungus_names(std::size_t) const override { return {"theta"}; }

 private:
  RatsData data_;
  RatsKernel kernel_;
};

}  // namespace

std::unique_ptr<Model> rats_hier(const RatsData& data) { return std::make_unique<RatsHier>(data); }

std::unique_ptr<Model> rats_unpooled(int n, int y) { return std::make_unique<RatsUnpooled>(n, y); }

std::unique_ptr<Model> rats_sf(const StumpFungusSpec<std::vector<RatsRow>>& spec) {
  return std::make_unique<RatsSf>(spec);
}

double rats_log_hyperprior(double alpha, double beta) {
  return log_hyperprior(std::log(alpha), std::log(beta));
}

void RatsKernel::log_prob(std::span<const double> theta, std::span<const double> tau,
                          std::span<double> out) const {
  out[0] = dist::beta_lpdf(theta[0], tau[0], tau[1]);
}

std::unique_ptr<Study> rats_study(RatsData data) {
  return std::make_unique<RatsStudy>(std::move(data));
}

}  // namespace sf

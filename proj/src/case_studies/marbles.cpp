#include "stumpfungus/case_studies/marbles.hpp"

#include <fmt/format.h>

#include <cmath>

#include "stumpfungus/distributions.hpp"

namespace sf {

namespace {

constexpr double kK = MarblesData::kMarblesPerBox;

struct BoxCounts {
  std::vector<double> blue;
  std::vector<double> other;
};

BoxCounts count_outcomes(const MarblesData& data) {
  BoxCounts c{std::vector<double>(data.boxes, 0.0), std::vector<double>(data.boxes, 0.0)};
  for (const auto& d : data.draws) (d.outcome ? c.blue : c.other)[d.box] += 1.0;
  return c;
}

// Beta(K p0, K (1 - p0)) prior on each box plus its Bernoulli draws, with the
// box probabilities on the logit scale.
template <class T, class P>
T boxes_log_density(const BoxCounts& counts, std::span<const T> v, const P& a, const P& b) {
  T lp = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    lp += dist::beta_logit_lpdf(v[i], a, b);
    lp += counts.blue[i] * log_sigmoid(v[i]) + counts.other[i] * log_sigmoid(-v[i]);
  }
  return lp;
}

class MarblesHier final : public AdModel<MarblesHier> {
 public:
  explicit MarblesHier(const MarblesData& data) : counts_(count_outcomes(data)) {
    data.validate();
    space_.add("p0", 1, TransformKind::LogitUnit);
    space_.add("p", std::vector<std::size_t>{static_cast<std::size_t>(data.boxes)},
               TransformKind::LogitUnit);
  }

  const ParameterSpace& space() const override { return space_; }
  std::string id() const override { return "marbles"; }

  template <class T>
  T evaluate(std::span<const T> v) const {
    // Uniform(0, 1) on p0 leaves only the logit Jacobian.
    T lp = log_sigmoid(v[0]) + log_sigmoid(-v[0]);
    const T a = kK * sigmoid(v[0]);
    const T b = kK * sigmoid(-v[0]);
    return lp + boxes_log_density(counts_, v.subspan(1), a, b);
  }

 private:
  BoxCounts counts_;
  ParameterSpace space_;
};

class MarblesEb final : public AdModel<MarblesEb> {
 public:
  MarblesEb(const MarblesData& data, double p0) : counts_(count_outcomes(data)), p0_(p0) {
    data.validate();
    if (!(p0 > 0.0 && p0 < 1.0)) {
      throw std::invalid_argument(fmt::format("p0_fixed must lie in (0, 1), got {}", p0));
    }
    space_.add("p", std::vector<std::size_t>{static_cast<std::size_t>(data.boxes)},
               TransformKind::LogitUnit);
  }

  const ParameterSpace& space() const override { return space_; }
  std::string id() const override { return "marbles"; }

  template <class T>
  T evaluate(std::span<const T> v) const {
    return boxes_log_density(counts_, v, kK * p0_, kK * (1.0 - p0_));
  }

 private:
  BoxCounts counts_;
  double p0_;
  ParameterSpace space_;
};

class MarblesSf final : public AdModel<MarblesSf> {
 public:
  explicit MarblesSf(const StumpFungusSpec<std::vector<int>>& spec) {
    detail::check_spec_ids("marbles", spec.model_id, spec.stump.model_id);
    spec.stump.validate();
    if (spec.stump.group_dim() != 1) throw DimensionError("marbles stump rows must hold one value");
    for (int y : spec.fungus) {
      if (y != 0 && y != 1) throw std::invalid_argument("marble outcomes must be 0 or 1");
      (y ? blue_ : other_) += 1.0;
    }
    // The weighted stump log density is linear in these three sums.
    for (std::size_t j = 0; j < spec.stump.size(); ++j) {
      const double w = spec.stump.weight(j, 0);
      if (w == 0.0) continue;
      const double x = spec.stump.samples(static_cast<Eigen::Index>(j), 0);
      total_weight_ += w;
      sum_log_x_ += w * std::log(x);
      sum_log1m_x_ += w * std::log1p(-x);
    }
    space_.add("p0", 1, TransformKind::LogitUnit);
    space_.add("theta", 1, TransformKind::LogitUnit);
  }

  const ParameterSpace& space() const override { return space_; }
  std::string id() const override { return "marbles"; }

  template <class T>
  T evaluate(std::span<const T> v) const {
    T lp = log_sigmoid(v[0]) + log_sigmoid(-v[0]);
    const T a = kK * sigmoid(v[0]);
    const T b = kK * sigmoid(-v[0]);
    if (total_weight_ != 0.0 || sum_log_x_ != 0.0 || sum_log1m_x_ != 0.0) {
      lp += (a - 1.0) * sum_log_x_ + (b - 1.0) * sum_log1m_x_ -
            total_weight_ * dist::log_beta_fn(a, b);
    }
    lp += dist::beta_logit_lpdf(v[1], a, b);
    return lp + blue_ * log_sigmoid(v[1]) + other_ * log_sigmoid(-v[1]);
  }

 private:
  double blue_ = 0.0;
  double other_ = 0.0;
  double total_weight_ = 0.0;
  double sum_log_x_ = 0.0;
  double sum_log1m_x_ = 0.0;
  ParameterSpace space_;
};

class MarblesStudy final : public Study {
 public:
  explicit MarblesStudy(MarblesData data) : data_(std::move(data)) { data_.validate(); }

  std::string id() const override { return "marbles"; }
  std::size_t group_count() const override { return static_cast<std::size_t>(data_.boxes); }
  std::unique_ptr<Model> hierarchical() const override { return marbles_hier(data_); }
  std::unique_ptr<Study> without_group(std::size_t g) const override {
    return marbles_study(data_.without_box(static_cast<int>(g)));
  }

  GroupLayout group_layout(std::span<const std::string> names) const override {
    GroupLayout layout;
    auto& groups = layout.hierarchies.emplace_back();
    const std::size_t boxes = count_prefixed(names, "p[");
    for (std::size_t g = 0; g < boxes; ++g) {
      groups.push_back({column_index(names, fmt::format("p[{}]", g + 1))});
    }
    return layout;
  }
  std::vector<std::size_t> hyper_columns(std::span<const std::string> names) const override {
    return {column_index(names, "p0")};
  }
  const GroupKernel& kernel() const override { return kernel_; }

  std::unique_ptr<Model> stump_and_fungus(const WeightedSampleSet& stump,
                                          std::size_t g) const override {
    return marbles_sf({stump, data_.outcomes_of(static_cast<int>(g)), "marbles"});
  }
  bool has_empirical_bayes() const override { return true; }
  std::unique_ptr<Model> empirical_bayes(std::span<const double> hypers,
                                         std::size_t g) const override {
    MarblesData local;
    local.boxes = 1;
    for (int y : data_.outcomes_of(static_cast<int>(g))) local.draws.push_back({0, y});
    return marbles_eb(local, hypers[0]);
  }

  std::vector<std::string> group_names(std::size_t g) const override {
    return {fmt::format("p[{}]", g + 1)};
  }
  std::vector<std::string> fungus_names(std::size_t) const override { return {"theta"}; }
  std::vector<std::string> eb_names(std::size_t) const override { return {"p[1]"}; }

 private:
  MarblesData data_;
  MarblesKernel kernel_;
};

}  // namespace

std::unique_ptr<Model> marbles_hier(const MarblesData& data) {
  return std::make_unique<MarblesHier>(data);
}

std::unique_ptr<Model> marbles_eb(const MarblesData& data, double p0_fixed) {
  return std::make_unique<MarblesEb>(data, p0_fixed);
}

std::unique_ptr<Model> marbles_sf(const StumpFungusSpec<std::vector<int>>& spec) {
  return std::make_unique<MarblesSf>(spec);
}

void MarblesKernel::log_prob(std::span<const double> theta, std::span<const double> tau,
                             std::span<double> out) const {
  out[0] = dist::beta_lpdf(theta[0], kK * tau[0], kK * (1.0 - tau[0]));
}

std::unique_ptr<Study> marbles_study(MarblesData data) {
  return std::make_unique<MarblesStudy>(std::move(data));
}

}  // namespace sf

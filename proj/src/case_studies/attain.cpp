#include "stumpfungus/case_studies/attain.hpp"

#include <fmt/format.h>

#include <cmath>

#include "stumpfungus/distributions.hpp"

namespace sf {

namespace {

constexpr std::size_t kH = AttainData::kHierarchies;
constexpr std::size_t kCoef = 3;
constexpr std::size_t kHyper = kAttainHypersPerHierarchy;

// Where each hierarchy's group block starts in the coordinate vector.
struct GroupBlocks {
  std::array<std::size_t, kH> beta{};
  std::array<std::size_t, kH> log_sigma{};
  std::array<std::size_t, kH> count{};
};

void add_hypers(ParameterSpace& space) {
  for (auto h : kAttainHierarchies) {
    space.add(fmt::format("{}.mu_beta", h), std::vector<std::size_t>{kCoef}, TransformKind::Identity);
    space.add(fmt::format("{}.sigma_beta", h), 1, TransformKind::LogPositive);
    space.add(fmt::format("{}.mu_sigma", h), 1, TransformKind::Identity);
    space.add(fmt::format("{}.sigma_sigma", h), 1, TransformKind::LogPositive);
  }
}

GroupBlocks add_groups(ParameterSpace& space, const AttainData& data) {
  GroupBlocks blocks;
  const auto counts = data.groups_per_hierarchy();
  for (std::size_t h = 0; h < kH; ++h) {
    const auto g = static_cast<std::size_t>(counts[h]);
    blocks.count[h] = g;
    blocks.beta[h] = space.total_dim();
    space.add(fmt::format("{}.beta", kAttainHierarchies[h]), std::vector<std::size_t>{g, kCoef},
              TransformKind::Identity);
    blocks.log_sigma[h] = space.total_dim();
    space.add(fmt::format("{}.sigma", kAttainHierarchies[h]), std::vector<std::size_t>{g},
              TransformKind::LogPositive);
  }
  return blocks;
}

// Everything except the hyperprior, which is flat. hyper holds, per hierarchy,
// mu_beta[0..2], log sigma_beta, mu_sigma, log sigma_sigma.
class AttainCore {
 public:
  AttainCore(const AttainData& data, const GroupBlocks& blocks) : rows_(data.rows), blocks_(blocks) {
    for (std::size_t h = 0; h < kH; ++h) group_sizes_[h].assign(blocks.count[h], 0.0);
    for (const auto& r : rows_) {
      const auto g = AttainData::group_index(r);
      for (std::size_t h = 0; h < kH; ++h) group_sizes_[h][static_cast<std::size_t>(g[h])] += 1.0;
    }
    std::size_t groups = 0;
    for (std::size_t h = 0; h < kH; ++h) groups += blocks.count[h];
    constant_ = -dist::kHalfLog2Pi *
                static_cast<double>(groups * kAttainGroupDim + rows_.size() * kH);
  }

  template <class T, class H>
  T operator()(std::span<const T> v, std::span<const H> hyper) const {
    using std::exp;
    T lp = constant_;
    std::array<std::vector<T>, kH> inv_sigma;
    for (std::size_t h = 0; h < kH; ++h) {
      const H* tau = hyper.data() + h * kHyper;
      const H inv_sigma_beta = exp(-tau[3]);
      const H inv_sigma_sigma = exp(-tau[5]);
      const std::size_t n = blocks_.count[h];
      T sq = 0.0;
      T log_scales = 0.0;
      inv_sigma[h].reserve(n);
      for (std::size_t g = 0; g < n; ++g) {
        for (std::size_t k = 0; k < kCoef; ++k) {
          const T z = (v[blocks_.beta[h] + g * kCoef + k] - tau[k]) * inv_sigma_beta;
          sq += z * z;
        }
        const T& log_sigma = v[blocks_.log_sigma[h] + g];
        const T z = (log_sigma - tau[4]) * inv_sigma_sigma;
        sq += z * z;
        log_scales += group_sizes_[h][g] * log_sigma;
        inv_sigma[h].push_back(exp(-log_sigma));
      }
      const double groups = static_cast<double>(n);
      lp += -(groups * kCoef) * tau[3] - groups * tau[5] - 0.5 * sq - log_scales;
    }
    T sq = 0.0;
    for (const auto& r : rows_) {
      const auto g = AttainData::group_index(r);
      for (std::size_t h = 0; h < kH; ++h) {
        const auto gi = static_cast<std::size_t>(g[h]);
        const T* beta = &v[blocks_.beta[h] + gi * kCoef];
        const T z = (r.attain - (beta[0] + beta[1] * r.cc + beta[2] * r.vrq)) * inv_sigma[h][gi];
        sq += z * z;
      }
    }
    return lp - 0.5 * sq;
  }

 private:
  std::vector<AttainRow> rows_;
  GroupBlocks blocks_;
  std::array<std::vector<double>, kH> group_sizes_;
  double constant_ = 0.0;
};

class AttainHier final : public AdModel<AttainHier> {
 public:
  explicit AttainHier(const AttainData& data)
      : core_(data, (data.validate(), add_all(data))) {}

  const ParameterSpace& space() const override { return space_; }
  std::string id() const override { return "attain"; }

  template <class T>
  T evaluate(std::span<const T> v) const {
    return core_(v, v.first(kH * kHyper));
  }

 private:
  GroupBlocks add_all(const AttainData& data) {
    add_hypers(space_);
    return add_groups(space_, data);
  }

  ParameterSpace space_;
  AttainCore core_;
};

std::vector<double> natural_hypers(std::span<const double> constrained) {
  if (constrained.size() != kH * kHyper) {
    throw DimensionError(fmt::format("expected {} hyperparameters, got {}", kH * kHyper,
                                     constrained.size()));
  }
  std::vector<double> out(constrained.begin(), constrained.end());
  for (std::size_t h = 0; h < kH; ++h) {
    for (std::size_t k : {std::size_t{3}, std::size_t{5}}) {
      const double s = constrained[h * kHyper + k];
      if (!(s > 0.0) || !std::isfinite(s)) {
        throw std::invalid_argument(fmt::format("scale hyperparameter must be positive, got {}", s));
      }
      out[h * kHyper + k] = std::log(s);
    }
  }
  return out;
}

class AttainEb final : public AdModel<AttainEb> {
 public:
  AttainEb(const AttainData& data, std::span<const double> fixed)
      : hyper_(natural_hypers(fixed)), core_(data, (data.validate(), add_groups(space_, data))) {}

  const ParameterSpace& space() const override { return space_; }
  std::string id() const override { return "attain"; }

  template <class T>
  T evaluate(std::span<const T> v) const {
    return core_(v, std::span<const double>(hyper_));
  }

 private:
  std::vector<double> hyper_;
  ParameterSpace space_;
  AttainCore core_;
};

// Weighted first and second moments of one stump component about a fixed
// centre, enough to evaluate sum_j w_j log Normal(x_j | mu, sigma) exactly.
struct WeightedMoments {
  double centre = 0.0;
  double total = 0.0;
  double first = 0.0;
  double second = 0.0;
};

class AttainSf final : public AdModel<AttainSf> {
 public:
  explicit AttainSf(const StumpFungusSpec<AttainData>& spec)
      : core_(spec.fungus, (check(spec), add_all(spec.fungus))) {
    const auto& s = spec.stump;
    for (std::size_t c = 0; c < s.group_dim(); ++c) {
      const bool scale = c % kAttainGroupDim == kCoef;
      auto value = [&](std::size_t j) {
        const double x = s.samples(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c));
        return scale ? std::log(x) : x;
      };
      WeightedMoments m;
      for (std::size_t j = 0; j < s.size(); ++j) m.centre += value(j);
      m.centre /= static_cast<double>(s.size());
      for (std::size_t j = 0; j < s.size(); ++j) {
        const double w = s.weight(j, c);
        const double d = value(j) - m.centre;
        m.total += w;
        m.first += w * d;
        m.second += w * d * d;
      }
      moments_[c] = m;
    }
  }

  const ParameterSpace& space() const override { return space_; }
  std::string id() const override { return "attain"; }

  template <class T>
  T evaluate(std::span<const T> v) const {
    const auto hyper = v.first(kH * kHyper);
    T lp = core_(v, hyper);
    for (std::size_t c = 0; c < moments_.size(); ++c) {
      const std::size_t h = c / kAttainGroupDim;
      const std::size_t k = c % kAttainGroupDim;
      const T& mu = hyper[h * kHyper + (k < kCoef ? k : 4)];
      const T& log_sd = hyper[h * kHyper + (k < kCoef ? 3 : 5)];
      lp += stump_term(moments_[c], mu, log_sd);
    }
    return lp;
  }

 private:
  template <class T>
  static T stump_term(const WeightedMoments& m, const T& mu, const T& log_sd) {
    using std::exp;
    const T shift = mu - m.centre;
    const T sum_sq = m.second - 2.0 * m.first * shift + m.total * (shift * shift);
    const T inv_var = exp(-2.0 * log_sd);
    return -m.total * (dist::kHalfLog2Pi + log_sd) - 0.5 * sum_sq * inv_var;
  }

  static int check(const StumpFungusSpec<AttainData>& spec) {
    detail::check_spec_ids("attain", spec.model_id, spec.stump.model_id);
    spec.stump.validate();
    spec.fungus.validate();
    if (spec.stump.group_dim() != kH * kAttainGroupDim) {
      throw DimensionError(fmt::format("attainment stump rows must hold {} values, got {}",
                                       kH * kAttainGroupDim, spec.stump.group_dim()));
    }
    return 0;
  }

  GroupBlocks add_all(const AttainData& data) {
    add_hypers(space_);
    return add_groups(space_, data);
  }

  ParameterSpace space_;
  AttainCore core_;
  std::array<WeightedMoments, kH * kAttainGroupDim> moments_{};
};

class AttainStudy final : public Study {
 public:
  explicit AttainStudy(AttainData data) : data_(std::move(data)) { data_.validate(); }

  std::string id() const override { return "attain"; }
  std::size_t group_count() const override { return static_cast<std::size_t>(data_.n_sid); }
  bool per_component() const override { return true; }
  std::unique_ptr<Model> hierarchical() const override { return attain_hier(data_); }
  std::unique_ptr<Study> without_group(std::size_t g) const override {
    return attain_study(data_.without_school(static_cast<int>(g)));
  }

  GroupLayout group_layout(std::span<const std::string> names) const override {
    GroupLayout layout;
    for (auto h : kAttainHierarchies) {
      auto& groups = layout.hierarchies.emplace_back();
      const std::size_t n = count_prefixed(names, fmt::format("{}.sigma[", h));
      for (std::size_t g = 1; g <= n; ++g) {
        groups.push_back({column_index(names, fmt::format("{}.beta[{},1]", h, g)),
                          column_index(names, fmt::format("{}.beta[{},2]", h, g)),
                          column_index(names, fmt::format("{}.beta[{},3]", h, g)),
                          column_index(names, fmt::format("{}.sigma[{}]", h, g))});
      }
    }
    return layout;
  }
  std::vector<std::size_t> hyper_columns(std::span<const std::string> names) const override {
    std::vector<std::size_t> out;
    for (auto h : kAttainHierarchies) {
      for (std::size_t k = 1; k <= kCoef; ++k) {
        out.push_back(column_index(names, fmt::format("{}.mu_beta[{}]", h, k)));
      }
      out.push_back(column_index(names, fmt::format("{}.sigma_beta", h)));
      out.push_back(column_index(names, fmt::format("{}.mu_sigma", h)));
      out.push_back(column_index(names, fmt::format("{}.sigma_sigma", h)));
    }
    return out;
  }
  const GroupKernel& kernel() const override { return kernel_; }

  std::unique_ptr<Model> stump_and_fungus(const WeightedSampleSet& stump,
                                          std::size_t g) const override {
    return attain_sf({stump, data_.school(static_cast<int>(g)).data, "attain"});
  }

  bool has_empirical_bayes() const override { return true; }
  // The hyperparameters are mu_beta, log sigma_beta, mu_sigma and
  // log sigma_sigma, so scales are averaged on the log scale.
  std::vector<double> hyper_estimate(const PosteriorSamples& posterior) const override {
    const auto cols = hyper_columns(posterior.names);
    std::vector<double> out;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const auto col = posterior.draws.col(static_cast<Eigen::Index>(cols[i]));
      const std::size_t k = i % kHyper;
      out.push_back(k == 3 || k == 5 ? std::exp(col.array().log().mean()) : col.mean());
    }
    return out;
  }
  std::unique_ptr<Model> empirical_bayes(std::span<const double> hypers,
                                         std::size_t g) const override {
    return attain_eb(data_.school(static_cast<int>(g)).data, hypers);
  }

  std::vector<std::string> group_names(std::size_t g) const override {
    return {fmt::format("sid.beta[{},1]", g + 1), fmt::format("sid.beta[{},2]", g + 1),
            fmt::format("sid.beta[{},3]", g + 1), fmt::format("sid.sigma[{}]", g + 1)};
  }
  std::vector<std::string> fungus_names(std::size_t) const override {
    return {"sid.beta[1,1]", "sid.beta[1,2]", "sid.beta[1,3]", "sid.sigma[1]"};
  }

 private:
  AttainData data_;
  AttainKernel kernel_;
};

}  // namespace

std::unique_ptr<Model> attain_hier(const AttainData& data) {
  return std::make_unique<AttainHier>(data);
}

std::unique_ptr<Model> attain_eb(const AttainData& data, std::span<const double> fixed_hypers) {
  return std::make_unique<AttainEb>(data, fixed_hypers);
}

std::unique_ptr<Model> attain_sf(const StumpFungusSpec<AttainData>& spec) {
  return std::make_unique<AttainSf>(spec);
}

void AttainKernel::log_prob(std::span<const double> theta, std::span<const double> tau,
                            std::span<double> out) const {
  for (std::size_t h = 0; h < kH; ++h) {
    const double* t = tau.data() + h * kHyper;
    const double* x = theta.data() + h * kAttainGroupDim;
    double* o = out.data() + h * kAttainGroupDim;
    const double log_sigma_beta = std::log(t[3]);
    for (std::size_t k = 0; k < kCoef; ++k) o[k] = dist::normal_lpdf_log_sd(x[k], t[k], log_sigma_beta);
    o[kCoef] = dist::normal_lpdf_log_sd(std::log(x[kCoef]), t[4], std::log(t[5]));
  }
}

std::unique_ptr<Study> attain_study(AttainData data) {
  return std::make_unique<AttainStudy>(std::move(data));
}

}  // namespace sf

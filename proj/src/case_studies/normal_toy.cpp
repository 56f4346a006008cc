#include "stumpfungus/case_studies/normal_toy.hpp"

#include <fmt/format.h>

#include <cmath>

#include "stumpfungus/distributions.hpp"

namespace sf {

namespace {

const std::vector<double> kY{-1.33, -0.61, -0.20, 0.34, 0.71, 1.23, 1.45, 1.47, 1.83, 2.05};
const std::vector<double> kYTilde{-2.77, -1.80, -0.71, -0.62, 0.31, 0.38, 0.43, 0.70, 1.66, 2.6};

ParameterSpace normal_space() {
  ParameterSpace space;
  space.add("mu", 1, TransformKind::Identity);
  space.add("sigma", 1, TransformKind::LogPositive);
  return space;
}

// sum_j w_j log Normal(x_j | mu, sigma); the flat prior on (mu, log sigma)
// adds nothing on the unconstrained scale.
class NormalModel final : public AdModel<NormalModel> {
 public:
  NormalModel(std::vector<double> x, std::vector<double> w)
      : x_(std::move(x)), w_(std::move(w)), space_(normal_space()) {}

  const ParameterSpace& space() const override { return space_; }
  std::string id() const override { return "normal"; }

  template <class T>
  T evaluate(std::span<const T> v) const {
    using std::exp;
    const T inv_sigma = exp(-v[1]);
    T sum_sq = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < x_.size(); ++j) {
      const T z = (x_[j] - v[0]) * inv_sigma;
      sum_sq += w_[j] * (z * z);
      total += w_[j];
    }
    return -total * (dist::kHalfLog2Pi + v[1]) - 0.5 * sum_sq;
  }

 private:
  std::vector<double> x_;
  std::vector<double> w_;
  ParameterSpace space_;
};

class NormalStudy final : public Study {
 public:
  std::string id() const override { return "normal"; }
  std::size_t group_count() const override { return 1; }
  std::unique_ptr<Model> hierarchical() const override { return normal_model(kY); }
  std::unique_ptr<Study> without_group(std::size_t) const override { return normal_study(); }

  WeightedSampleSet draw_stump(const PosteriorSamples&, std::size_t m,
                               std::uint64_t seed) const override {
    if (m < 1 || m > kYTilde.size()) {
      throw std::invalid_argument(
          fmt::format("normal toy stump size must be in 1..{}, got {}", kYTilde.size(), m));
    }
    WeightedSampleSet set;
    set.model_id = "normal";
    set.samples = Eigen::Map<const Eigen::MatrixXd>(kYTilde.data(), static_cast<Eigen::Index>(m), 1);
    set.weights = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(m), 1);
    set.meta.seed = seed;
    return set;
  }
  GroupLayout group_layout(std::span<const std::string>) const override { return {}; }
  std::vector<std::size_t> hyper_columns(std::span<const std::string> names) const override {
    return {column_index(names, "mu"), column_index(names, "sigma")};
  }
  const GroupKernel& kernel() const override { return kernel_; }

  std::unique_ptr<Model> stump_and_fungus(const WeightedSampleSet& stump,
                                          std::size_t) const override {
    return normal_weighted(stump);
  }

  std::vector<std::string> group_names(std::size_t) const override { return {"mu", "sigma"}; }
  std::vector<std::string> fungus_names(std::size_t) const override { return {"mu", "sigma"}; }

 private:
  NormalKernel kernel_;
};

}  // namespace

NormalToy normal_toy() { return {normal_model(kY), kY, kYTilde}; }

std::unique_ptr<Model> normal_model(std::vector<double> y) {
  std::vector<double> w(y.size(), 1.0);
  return std::make_unique<NormalModel>(std::move(y), std::move(w));
}

std::unique_ptr<Model> normal_weighted(const WeightedSampleSet& set) {
  set.validate();
  if (set.group_dim() != 1) throw DimensionError("normal toy samples must be scalars");
  std::vector<double> x(set.size()), w(set.size());
  for (std::size_t j = 0; j < set.size(); ++j) {
    x[j] = set.samples(static_cast<Eigen::Index>(j), 0);
    w[j] = set.weight(j, 0);
  }
  return std::make_unique<NormalModel>(std::move(x), std::move(w));
}

void NormalKernel::log_prob(std::span<const double> theta, std::span<const double> tau,
                            std::span<double> out) const {
  out[0] = dist::normal_lpdf_log_sd(theta[0], tau[0], std::log(tau[1]));
}

std::unique_ptr<Study> normal_study() { return std::make_unique<NormalStudy>(); }

}  // namespace sf

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "stumpfungus/case_studies/attain.hpp"
#include "stumpfungus/case_studies/marbles.hpp"
#include "stumpfungus/case_studies/normal_toy.hpp"
#include "stumpfungus/case_studies/rats.hpp"
#include "stumpfungus/rng.hpp"

using namespace sf;

namespace {

double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Monte Carlo standard error from 50 batch means.
double batch_mcse(const std::vector<double>& xs) {
  const std::size_t batches = 50, size = xs.size() / batches;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b) {
    means.push_back(std::accumulate(xs.begin() + static_cast<std::ptrdiff_t>(b * size),
                                    xs.begin() + static_cast<std::ptrdiff_t>((b + 1) * size), 0.0) /
                    static_cast<double>(size));
  }
  const double m = mean_of(means);
  double ss = 0.0;
  for (double x : means) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
}

std::vector<double> random_point(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(d);
  for (double& x : v) x = rng.normal(0.0, 0.7);
  return v;
}

PosteriorSamples short_fit(const Model& model) {
  HmcConfig config;
  config.burn_in = 300;
  config.draws = 400;
  config.seed = 21;
  return run_chain(model, config);
}

void check_close(double a, double b) { CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b))); }

}  // namespace

TEST_CASE("marbles hierarchical density by hand") {
  MarblesData data;
  data.boxes = 2;
  data.draws = {{0, 1}, {0, 0}, {1, 1}};
  const auto model = marbles_hier(data);
  REQUIRE(model->space().column_names() == std::vector<std::string>{"p0", "p[1]", "p[2]"});
  // Every probability is 1/2 at the origin: Beta(2, 2) density 1.5 per box,
  // three draws at 1/2 and a logit Jacobian of 1/4 per coordinate.
  const double expected = 2.0 * std::log(1.5) + 3.0 * std::log(0.5) + 3.0 * std::log(0.25);
  CHECK(model->log_density(std::vector<double>(3, 0.0)) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("marbles empirical Bayes is conjugate") {
  MarblesData data;
  data.boxes = 1;
  data.draws = {{0, 1}, {0, 1}};
  const auto model = marbles_eb(data, 0.5);
  const auto post = run_chain(*model, HmcConfig{});
  const auto p = post.column_values("p[1]");
  // Beta(2, 2) prior and two blue marbles give Beta(4, 2).
  CHECK(std::abs(mean_of(p) - 2.0 / 3.0) <= 3.0 * batch_mcse(p));
  CHECK_THROWS_AS(marbles_eb(data, 1.0), std::invalid_argument);
}

TEST_CASE("unpooled rats posterior is a Beta") {
  const auto empty = run_chain(*rats_unpooled(0, 0), HmcConfig{});
  const auto p0 = empty.column_values("p");
  CHECK(std::abs(mean_of(p0) - 0.5) <= 3.0 * batch_mcse(p0));

  const auto full = run_chain(*rats_unpooled(20, 20), HmcConfig{});
  const auto p1 = full.column_values("p");
  CHECK(std::abs(mean_of(p1) - 21.0 / 22.0) <= 3.0 * batch_mcse(p1));
  CHECK_THROWS_AS(rats_unpooled(3, 4), std::invalid_argument);
}

TEST_CASE("rats table") {
  const auto table = rats_tumor_table();
  REQUIRE(table.rows.size() == 71);
  CHECK(table.rows.back().n == 14);
  CHECK(table.rows.back().y == 4);
  const auto model = rats_hier(table);
  CHECK(model->dim() == 73);
  CHECK(model->space().column_names()[2] == "p[1]");
}

TEST_CASE("attainment model size at full scale") {
  const auto data = synthesize_attain(1);
  CHECK(data.rows.size() == 3435);
  CHECK(data.n_sid == 19);
  CHECK(data.n_pid == 148);
  CHECK(data.n_sex == 2);
  const auto model = attain_hier(data);
  CHECK(model->dim() == 694);
  const auto names = model->space().column_names();
  std::size_t group_params = 0;
  for (auto h : kAttainHierarchies) {
    group_params += count_prefixed(names, std::string(h) + ".beta[") + count_prefixed(names, std::string(h) + ".sigma[");
  }
  CHECK(group_params == (19 + 2 + 148) * kAttainGroupDim);
  CHECK(names.size() - group_params == 18);
}

TEST_CASE("attainment synthesis") {
  const auto small = synthesize_attain(4, AttainSizes{10, 2, 2});
  CHECK(small.rows.size() == 10);
  CHECK(to_csv(small) == to_csv(synthesize_attain(4, AttainSizes{10, 2, 2})));
  CHECK(to_csv(small) != to_csv(synthesize_attain(5, AttainSizes{10, 2, 2})));

  const auto full = synthesize_attain(2);
  const auto text = to_csv(full);
  CHECK(to_csv(parse_attain_csv(text)) == text);
  CHECK_THROWS_AS(synthesize_attain(1, AttainSizes{0, 2, 2}), std::invalid_argument);
}

TEST_CASE("CSV loaders report the offending line") {
  try {
    parse_rats_csv("n,y\n14,4\n3,x\n");
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(e.line() == 3);
  }
  try {
    parse_rats_csv("n,y\n14,4\n\n3,5\n");
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(e.line() == 4);
  }
  try {
    parse_marbles_csv("box,color\n0,1\n");
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(e.line() == 1);
  }
  CHECK_THROWS_AS(parse_attain_csv("sid,sex,pid,cc,vrq,attain\n0,2,0,1,1,1\n"), DataError);

  const auto rats = to_csv(rats_tumor_table());
  CHECK(to_csv(parse_rats_csv(rats)) == rats);
  const auto marbles = to_csv(synthesize_marbles(3));
  CHECK(to_csv(parse_marbles_csv(marbles)) == marbles);
}

TEST_CASE("rats stump-and-fungus is the local model plus the stump term") {
  const auto study = rats_study(rats_tumor_table());
  const auto post = short_fit(*study->hierarchical());
  const auto stump = study->draw_stump(post, 10, 4);
  const RatsRow row{20, 7};
  const auto sf_model = rats_sf({stump, {row}, "rats"});
  const auto local = rats_hier(RatsData{{row}});
  REQUIRE(sf_model->dim() == local->dim());
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto v = random_point(3, s);
    const std::vector<double> tau{std::exp(v[0]), std::exp(v[1])};
    check_close(sf_model->log_density(v), local->log_density(v) + log_stoch_cond(stump, tau, RatsKernel{}));
  }
  CHECK_THROWS_AS(rats_sf({stump, {row}, "marbles"}), std::invalid_argument);
}

TEST_CASE("marbles stump-and-fungus is the local model plus the stump term") {
  const auto study = marbles_study(synthesize_marbles(1));
  const auto post = short_fit(*study->hierarchical());
  const auto stump = study->draw_stump(post, 10, 4);
  const std::vector<int> outcomes{1, 0, 1, 1};
  MarblesData one;
  one.boxes = 1;
  for (int y : outcomes) one.draws.push_back({0, y});
  const auto sf_model = marbles_sf({stump, outcomes, "marbles"});
  const auto local = marbles_hier(one);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto v = random_point(2, s);
    const std::vector<double> tau{1.0 / (1.0 + std::exp(-v[0]))};
    check_close(sf_model->log_density(v), local->log_density(v) + log_stoch_cond(stump, tau, MarblesKernel{}));
  }
  auto other = stump;
  other.model_id = "rats";
  CHECK_THROWS_AS(marbles_sf({other, outcomes, "marbles"}), std::invalid_argument);
}

TEST_CASE("attainment stump-and-fungus aggregates per-component stump terms") {
  const auto data = synthesize_attain(6, AttainSizes{150, 6, 4});
  const auto study = attain_study(data);
  const auto post = short_fit(*study->hierarchical());
  const auto stump = study->draw_stump(post, 5, 4);
  REQUIRE(stump.per_component);
  REQUIRE(stump.group_dim() == 12);
  auto weighted = stump;
  for (Eigen::Index j = 0; j < weighted.weights.rows(); ++j) {
    for (Eigen::Index c = 0; c < weighted.weights.cols(); ++c) {
      weighted.weights(j, c) = 0.5 + 0.1 * static_cast<double>((j * 5 + c) % 9);
    }
  }

  const auto local = data.school(1).data;
  const auto sf_model = attain_sf({weighted, local, "attain"});
  const auto local_model = attain_hier(local);
  REQUIRE(sf_model->space().column_names() == local_model->space().column_names());

  const auto transforms = sf_model->space().coordinate_transforms();
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto v = random_point(sf_model->dim(), s);
    std::vector<double> tau(18);
    for (std::size_t i = 0; i < 18; ++i) tau[i] = constrain(transforms[i], v[i]);
    // Direct sum of the kernel factors, one weight per component.
    double stump_term = 0.0;
    std::vector<double> theta(12), factors(12);
    for (std::size_t j = 0; j < weighted.size(); ++j) {
      for (std::size_t c = 0; c < 12; ++c) theta[c] = weighted.samples(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c));
      AttainKernel{}.log_prob(theta, tau, factors);
      for (std::size_t c = 0; c < 12; ++c) stump_term += weighted.weight(j, c) * factors[c];
    }
    check_close(sf_model->log_density(v), local_model->log_density(v) + stump_term);
  }
}

TEST_CASE("studies loaded by id") {
  for (const char* id : {"normal", "marbles", "rats", "attain"}) {
    const auto study = default_study(id, 1);
    CHECK(study->id() == id);
    CHECK(study->group_count() >= 1);
  }
  CHECK_THROWS(default_study("nope", 1));
}

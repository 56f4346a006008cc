#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "stumpfungus/io.hpp"

using namespace sf;

namespace {

PosteriorSamples awkward_posterior() {
  PosteriorSamples post;
  post.model_id = "rats_hier";
  post.names = {"alpha", "p[1]", "sid.beta[2,3]"};
  post.draws.resize(3, 3);
  post.draws << 0.1, 1.0 / 3.0, -2.5e-300, 1e300, std::nextafter(1.0, 2.0), 0.0, -0.0, 123456789.123456789,
      std::acos(-1.0);
  post.accept_rate = 0.8123;
  post.step_size = 0.0123;
  post.config.seed = 18446744073709551615ULL;
  post.config.burn_in = 7;
  post.config.draws = 3;
  return post;
}

WeightedSampleSet small_stump(bool per_component) {
  WeightedSampleSet set;
  set.model_id = "marbles";
  set.per_component = per_component;
  set.samples.resize(2, 2);
  set.samples << 0.25, 0.5, 1.0 / 7.0, 0.75;
  set.weights = per_component ? Eigen::MatrixXd::Constant(2, 2, 0.9) : Eigen::MatrixXd::Constant(2, 1, 1.1);
  set.meta.seed = 42;
  set.meta.hyper_samples = 5000;
  set.meta.created = "stumpfungus";
  set.meta.objective = -12.5;
  set.meta.iterations = 31;
  return set;
}

}  // namespace

TEST_CASE("format_real round-trips exactly") {
  for (double x : {0.1, 1.0 / 3.0, 1e-310, 6.02214076e23, -0.0, 2.0}) {
    const double back = std::strtod(format_real(x).c_str(), nullptr);
    CHECK(back == x);
    CHECK(std::signbit(back) == std::signbit(x));
  }
}

TEST_CASE("posterior JSON round trip is byte-stable") {
  const auto post = awkward_posterior();
  const auto text = posterior_to_json(post);
  const auto back = posterior_from_json(text);
  CHECK(back.names == post.names);
  CHECK(back.model_id == post.model_id);
  CHECK(back.draws == post.draws);
  CHECK(back.config.seed == post.config.seed);
  CHECK(back.accept_rate == post.accept_rate);
  CHECK(posterior_to_json(back) == text);
}

TEST_CASE("stump JSON round trip is byte-stable") {
  for (bool per_component : {false, true}) {
    const auto set = small_stump(per_component);
    const auto text = stump_to_json(set);
    const auto back = stump_from_json(text);
    CHECK(back.samples == set.samples);
    CHECK(back.weights == set.weights);
    CHECK(back.per_component == per_component);
    CHECK(back.meta.hyper_samples == 5000);
    CHECK(stump_to_json(back) == text);
  }
}

TEST_CASE("files round trip through save and load") {
  const auto dir = std::filesystem::temp_directory_path() / "sf_test_io";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  save_posterior(dir / "post.json", awkward_posterior());
  CHECK(load_posterior(dir / "post.json").draws == awkward_posterior().draws);
  save_stump(dir / "stump.json", small_stump(false));
  CHECK(load_stump(dir / "stump.json").samples == small_stump(false).samples);
  CHECK_THROWS_AS(load_posterior(dir / "missing.json"), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("malformed documents are rejected") {
  CHECK_THROWS_AS(posterior_from_json("{not json"), IoError);
  CHECK_THROWS_AS(posterior_from_json("{\"model_id\":\"x\"}"), IoError);
  auto text = posterior_to_json(awkward_posterior());
  text.replace(text.find("\"draws\":[["), 10, "\"draws\":[[1],[");
  CHECK_THROWS_AS(posterior_from_json(text), IoError);

  CHECK_THROWS_AS(stump_from_json("[]"), IoError);
  auto stump = stump_to_json(small_stump(false));
  stump.replace(stump.find("\"M\":2"), 5, "\"M\":3");
  CHECK_THROWS_AS(stump_from_json(stump), IoError);
}

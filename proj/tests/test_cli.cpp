#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "cli.hpp"
#include "stumpfungus/io.hpp"

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "sfcli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return sf::run_cli(static_cast<int>(argv.size()), argv.data());
}

std::filesystem::path scratch() {
  auto dir = std::filesystem::temp_directory_path() / "sf_test_cli";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run({"--model", "rats", "fit-hier", "--bogus"}) == 1);
  CHECK(run({"--model", "rats"}) == 1);
  CHECK(run({"--model", "nope", "fit-hier"}) == 1);
  CHECK(run({"--model", "rats", "--draws", "many", "fit-hier"}) == 1);
}

TEST_CASE("runtime failures exit with 2") {
  const auto dir = scratch();
  CHECK(run({"--model", "rats", "--data", (dir / "missing.csv").string(), "fit-hier"}) == 2);
  CHECK(run({"--model", "rats", "make-stump", "--posterior", (dir / "missing.json").string()}) == 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("fit-hier writes a loadable posterior") {
  const auto dir = scratch();
  const auto out = dir / "post.json";
  REQUIRE(run({"--model", "rats", "--burnin", "100", "--draws", "50", "--seed", "3", "--out", out.string(),
               "fit-hier"}) == 0);
  const auto post = sf::load_posterior(out);
  CHECK(post.model_id == "rats");
  CHECK(post.draws.rows() == 50);
  CHECK(post.draws.cols() == 73);
  CHECK(post.wall_time_seconds == 0.0);

  const auto again = dir / "again.json";
  REQUIRE(run({"--model", "rats", "--burnin", "100", "--draws", "50", "--seed", "3", "--out", again.string(),
               "fit-hier"}) == 0);
  CHECK(sf::read_file(out) == sf::read_file(again));
  std::filesystem::remove_all(dir);
}

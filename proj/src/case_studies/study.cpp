#include "stumpfungus/case_studies/study.hpp"

#include <fmt/format.h>

#include "stumpfungus/case_studies/attain.hpp"
#include "stumpfungus/case_studies/marbles.hpp"
#include "stumpfungus/case_studies/normal_toy.hpp"
#include "stumpfungus/case_studies/rats.hpp"

namespace sf {

namespace detail {

void check_spec_ids(std::string_view expected, std::string_view spec_id, std::string_view stump_id) {
  if (spec_id != expected || stump_id != expected) {
    throw std::invalid_argument(fmt::format(
        "model id mismatch: expected '{}', spec has '{}', stump has '{}'", expected, spec_id,
        stump_id));
  }
}

}  // namespace detail

WeightedSampleSet Study::draw_stump(const PosteriorSamples& posterior, std::size_t m,
                                    std::uint64_t seed) const {
  return draw_sample_set(posterior, group_layout(posterior.names), m, seed, per_component(), id());
}

std::vector<double> Study::hyper_estimate(const PosteriorSamples& posterior) const {
  std::vector<double> out;
  for (std::size_t c : hyper_columns(posterior.names)) {
    out.push_back(posterior.draws.col(static_cast<Eigen::Index>(c)).mean());
  }
  return out;
}

std::unique_ptr<Model> Study::empirical_bayes(std::span<const double>, std::size_t) const {
  throw std::invalid_argument(fmt::format("model '{}' has no empirical-Bayes variant", id()));
}

std::unique_ptr<Study> load_study(std::string_view model_id, const std::filesystem::path& data) {
  if (model_id == "marbles") return marbles_study(load_marbles(data));
  if (model_id == "rats") return rats_study(load_rats(data));
  if (model_id == "attain") return attain_study(load_attain(data));
  if (model_id == "normal") return normal_study();
  throw std::invalid_argument(fmt::format("unknown model '{}'", model_id));
}

std::unique_ptr<Study> default_study(std::string_view model_id, std::uint64_t seed) {
  if (model_id == "marbles") return marbles_study(synthesize_marbles(seed));
  if (model_id == "rats") return rats_study(rats_tumor_table());
  if (model_id == "attain") return attain_study(synthesize_attain(seed));
  if (model_id == "normal") return normal_study();
  throw std::invalid_argument(fmt::format("unknown model '{}'", model_id));
}

std::size_t column_index(std::span<const std::string> names, std::string_view name) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw std::invalid_argument(fmt::format("posterior has no column '{}'", name));
}

std::size_t count_prefixed(std::span<const std::string> names, std::string_view prefix) {
  std::size_t n = 0;
  for (const auto& s : names) {
    if (s.starts_with(prefix)) ++n;
  }
  return n;
}

}  // namespace sf

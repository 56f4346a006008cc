#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stumpfungus/model.hpp"
#include "stumpfungus/sampler.hpp"
#include "stumpfungus/stump.hpp"

namespace sf {

// Stump plus observations of the new group.
template <class Fungus>
struct StumpFungusSpec {
  WeightedSampleSet stump;
  Fungus fungus;
  std::string model_id;
};

namespace detail {
// Throws std::invalid_argument unless both ids equal `expected`.
void check_spec_ids(std::string_view expected, std::string_view spec_id, std::string_view stump_id);
}  // namespace detail

// A hierarchical case study viewed through its groups. Everything the generic
// fit -> stump -> fungus -> compare workflow needs to know about one dataset.
class Study {
 public:
  virtual ~Study() = default;

  virtual std::string id() const = 0;
  virtual std::size_t group_count() const = 0;
  virtual bool per_component() const { return false; }

  virtual std::unique_ptr<Model> hierarchical() const = 0;
  // Same study with group g removed (training data for holding g out).
  virtual std::unique_ptr<Study> without_group(std::size_t g) const = 0;

  // Stump rows drawn from a hierarchical posterior of this study.
  virtual WeightedSampleSet draw_stump(const PosteriorSamples& posterior, std::size_t m,
                                       std::uint64_t seed) const;
  virtual GroupLayout group_layout(std::span<const std::string> names) const = 0;
  virtual std::vector<std::size_t> hyper_columns(std::span<const std::string> names) const = 0;
  // Log hyperprior at a constrained hyperparameter point; empty when uniform.
  virtual std::function<double(std::span<const double>)> log_hyper_prior() const { return {}; }
  virtual const GroupKernel& kernel() const = 0;

  // Model for group g of this study conditioned stochastically on the stump.
  virtual std::unique_ptr<Model> stump_and_fungus(const WeightedSampleSet& stump,
                                                  std::size_t g) const = 0;
  virtual bool has_empirical_bayes() const { return false; }
  // Point estimate of the hyperparameters plugged into empirical_bayes().
  virtual std::vector<double> hyper_estimate(const PosteriorSamples& posterior) const;
  virtual std::unique_ptr<Model> empirical_bayes(std::span<const double> hypers, std::size_t g) const;

  // Columns of group g in the hierarchical posterior, and the matching columns
  // of the stump-and-fungus and empirical-Bayes posteriors, pairwise.
  virtual std::vector<std::string> group_names(std::size_t g) const = 0;
  virtual std::vector<std::string> fungus_names(std::size_t g) const = 0;
  virtual std::vector<std::string> eb_names(std::size_t g) const { return fungus_names(g); }
};

// Position of `name` in a posterior's column names; throws when absent.
std::size_t column_index(std::span<const std::string> names, std::string_view name);
std::size_t count_prefixed(std::span<const std::string> names, std::string_view prefix);

std::unique_ptr<Study> load_study(std::string_view model_id, const std::filesystem::path& data);
// Study on the built-in dataset (normal toy, rats table, synthetic marbles).
std::unique_ptr<Study> default_study(std::string_view model_id, std::uint64_t seed);

}  // namespace sf

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "stumpfungus/diagnostics.hpp"
#include "stumpfungus/sampler.hpp"
#include "stumpfungus/stump.hpp"

namespace sf {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

// Reals are printed with 17 significant digits so documents round-trip
// byte-for-byte.
std::string format_real(double x);

// Posterior file: {model_id, names, draws (row-major), seed, config,
// accept_rate, step_size, wall_time_seconds}.
std::string posterior_to_json(const PosteriorSamples& samples);
PosteriorSamples posterior_from_json(std::string_view text);
void save_posterior(const std::filesystem::path& path, const PosteriorSamples& samples);
PosteriorSamples load_posterior(const std::filesystem::path& path);

// Stump file: {model_id, M, per_component, samples, weights, meta: {seed, N, created, ...}}.
std::string stump_to_json(const WeightedSampleSet& set);
WeightedSampleSet stump_from_json(std::string_view text);
void save_stump(const std::filesystem::path& path, const WeightedSampleSet& set);
WeightedSampleSet load_stump(const std::filesystem::path& path);

std::string ks_report_to_json(const KsReport& report);
std::string timing_to_json(const std::vector<TimingReport>& reports);

}  // namespace sf

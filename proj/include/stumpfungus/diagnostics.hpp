#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "stumpfungus/sampler.hpp"

namespace sf {

struct KsEntry {
  std::string name;
  double ks = 0.0;
};

struct KsReport {
  std::vector<KsEntry> per_marginal;
  double median_ks = 0.0;
};

struct TimingReport {
  std::string label;
  double wall_time_seconds = 0.0;
  std::size_t burn_in = 0;
  std::size_t draws = 0;
  std::uint64_t seed = 0;
};

// Two-sample Kolmogorov-Smirnov statistic: sup |F_a - F_b| over the pooled
// sample, exact under ties.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

double median(std::vector<double> values);

// Linear interpolation between order statistics at h = (n - 1) p.
double quantile_sorted(std::span<const double> sorted, double p);

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
};

std::vector<ParameterSummary> summarize(const PosteriorSamples& samples);

// KS per named pair (column of a, column of b); median over the pairs.
KsReport compare_posteriors(const PosteriorSamples& a, const PosteriorSamples& b,
                            const std::vector<std::pair<std::string, std::string>>& pairs);
KsReport make_ks_report(std::vector<KsEntry> entries);

// Writes hist_<name>.csv (bin_left,bin_right,count; Freedman-Diaconis width)
// and ecdf_<name>.csv (x,F) for every column into dir.
void emit_plot_data(const PosteriorSamples& samples, const std::filesystem::path& dir);
// Writes ks.csv (name,ks) into dir.
void emit_plot_data(const KsReport& report, const std::filesystem::path& dir);

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  std::size_t count = 0;
};
std::vector<HistogramBin> histogram(std::span<const double> values);

}  // namespace sf

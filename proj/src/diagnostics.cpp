#include "stumpfungus/diagnostics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stumpfungus/io.hpp"

namespace sf {

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS statistic needs nonempty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::ranges::sort(x);
  std::ranges::sort(y);
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty list");
  std::ranges::sort(values);
  return quantile_sorted(values, 0.5);
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<ParameterSummary> summarize(const PosteriorSamples& samples) {
  const auto n = samples.draws.rows();
  if (n < 2) throw std::invalid_argument("summaries need at least 2 draws");
  std::vector<ParameterSummary> out;
  for (Eigen::Index c = 0; c < samples.draws.cols(); ++c) {
    std::vector<double> col(samples.draws.col(c).begin(), samples.draws.col(c).end());
    ParameterSummary s;
    s.name = samples.names[static_cast<std::size_t>(c)];
    s.mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : col) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(n - 1));
    std::ranges::sort(col);
    s.q05 = quantile_sorted(col, 0.05);
    s.q50 = quantile_sorted(col, 0.50);
    s.q95 = quantile_sorted(col, 0.95);
    out.push_back(std::move(s));
  }
  return out;
}

KsReport make_ks_report(std::vector<KsEntry> entries) {
  KsReport report;
  report.per_marginal = std::move(entries);
  std::vector<double> values;
  for (const auto& e : report.per_marginal) values.push_back(e.ks);
  report.median_ks = values.empty() ? 0.0 : median(values);
  return report;
}

KsReport compare_posteriors(const PosteriorSamples& a, const PosteriorSamples& b,
                            const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<KsEntry> entries;
  for (const auto& [name_a, name_b] : pairs) {
    const auto x = a.column_values(name_a);
    const auto y = b.column_values(name_b);
    entries.push_back({name_a == name_b ? name_a : name_a + "=" + name_b, ks_two_sample(x, y)});
  }
  return make_ks_report(std::move(entries));
}

std::vector<HistogramBin> histogram(std::span<const double> values) {
  if (values.empty()) return {};
  std::vector<double> sorted(values.begin(), values.end());
  std::ranges::sort(sorted);
  const double lo = sorted.front(), hi = sorted.back();
  const double n = static_cast<double>(sorted.size());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double width = 2.0 * iqr / std::cbrt(n);
  if (sorted.size() == 1 || !(width > 0.0) || hi == lo) {
    return {{lo, hi, sorted.size()}};
  }
  const auto bins = static_cast<std::size_t>(std::clamp(std::ceil((hi - lo) / width), 1.0, 10000.0));
  const double step = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    out[k].left = lo + step * static_cast<double>(k);
    out[k].right = k + 1 == bins ? hi : lo + step * static_cast<double>(k + 1);
  }
  for (double v : sorted) {
    const auto k = std::min(static_cast<std::size_t>((v - lo) / step), bins - 1);
    ++out[k].count;
  }
  return out;
}

namespace {
std::string file_stem(std::string_view name) {
  std::string s(name);
  for (char& ch : s) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '.' && ch != '-') ch = '_';
  }
  return s;
}
}  // namespace

void emit_plot_data(const PosteriorSamples& samples, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  for (Eigen::Index c = 0; c < samples.draws.cols(); ++c) {
    std::vector<double> col(samples.draws.col(c).begin(), samples.draws.col(c).end());
    const std::string stem = file_stem(samples.names[static_cast<std::size_t>(c)]);

    std::string hist = "bin_left,bin_right,count\n";
    for (const auto& bin : histogram(col)) {
      hist += fmt::format("{},{},{}\n", bin.left, bin.right, bin.count);
    }
    write_file_atomic(dir / ("hist_" + stem + ".csv"), hist);

    std::ranges::sort(col);
    std::string ecdf = "x,F\n";
    for (std::size_t i = 0; i < col.size(); ++i) {
      ecdf += fmt::format("{},{}\n", col[i],
                          static_cast<double>(i + 1) / static_cast<double>(col.size()));
    }
    write_file_atomic(dir / ("ecdf_" + stem + ".csv"), ecdf);
  }
}

void emit_plot_data(const KsReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  std::string csv = "name,ks\n";
  for (const auto& e : report.per_marginal) csv += fmt::format("{},{}\n", e.name, e.ks);
  write_file_atomic(dir / "ks.csv", csv);
}

}  // namespace sf

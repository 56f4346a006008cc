#include "stumpfungus/io.hpp"

#include <fmt/format.h>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace sf {

using nlohmann::json;

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", tmp.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError(fmt::format("write to '{}' failed", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError(fmt::format("cannot rename '{}' to '{}': {}", tmp.string(), path.string(), ec.message()));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_real(double x) {
  // "-0" would parse back as the integer 0.
  if (x == 0.0 && std::signbit(x)) return "-0.0";
  return fmt::format("{:.17g}", x);
}

namespace {

std::string json_string(std::string_view s) { return json(std::string(s)).dump(); }

std::string matrix_rows(const Eigen::MatrixXd& m) {
  std::string out = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r > 0) out += ",\n  ";
    out += "[";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out += ",";
      out += format_real(m(r, c));
    }
    out += "]";
  }
  return out + "]";
}

Eigen::MatrixXd matrix_from(const json& rows, std::size_t cols, std::string_view what) {
  if (!rows.is_array()) throw IoError(fmt::format("'{}' must be an array of rows", what));
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (!row.is_array() || row.size() != cols) {
      throw IoError(fmt::format("'{}' row {} must have {} entries", what, r, cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }
  return m;
}

json parse(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(fmt::format("malformed {} JSON: {}", what, e.what()));
  }
}

}  // namespace

std::string posterior_to_json(const PosteriorSamples& s) {
  std::string names = "[";
  for (std::size_t i = 0; i < s.names.size(); ++i) {
    if (i > 0) names += ",";
    names += json_string(s.names[i]);
  }
  names += "]";
  const auto& c = s.config;
  return fmt::format(
      "{{\"model_id\":{},\n\"names\":{},\n\"seed\":{},\n"
      "\"config\":{{\"leapfrog_steps\":{},\"initial_step_size\":{},\"burn_in\":{},"
      "\"draws\":{},\"seed\":{},\"target_accept\":{},\"adapt_metric\":{}}},\n"
      "\"accept_rate\":{},\n\"step_size\":{},\n\"wall_time_seconds\":{},\n\"draws\":{}}}\n",
      json_string(s.model_id), names, c.seed, c.leapfrog_steps, format_real(c.initial_step_size),
      c.burn_in, c.draws, c.seed, format_real(c.target_accept), c.adapt_metric ? "true" : "false",
      format_real(s.accept_rate), format_real(s.step_size), format_real(s.wall_time_seconds),
      matrix_rows(s.draws));
}

PosteriorSamples posterior_from_json(std::string_view text) {
  const json doc = parse(text, "posterior");
  try {
    PosteriorSamples s;
    s.model_id = doc.at("model_id").get<std::string>();
    s.names = doc.at("names").get<std::vector<std::string>>();
    const auto& c = doc.at("config");
    s.config.leapfrog_steps = c.at("leapfrog_steps").get<std::size_t>();
    s.config.initial_step_size = c.at("initial_step_size").get<double>();
    s.config.burn_in = c.at("burn_in").get<std::size_t>();
    s.config.draws = c.at("draws").get<std::size_t>();
    s.config.seed = c.at("seed").get<std::uint64_t>();
    s.config.target_accept = c.at("target_accept").get<double>();
    s.config.adapt_metric = c.value("adapt_metric", true);
    s.accept_rate = doc.at("accept_rate").get<double>();
    s.step_size = doc.value("step_size", 0.0);
    s.wall_time_seconds = doc.value("wall_time_seconds", 0.0);
    s.draws = matrix_from(doc.at("draws"), s.names.size(), "draws");
    return s;
  } catch (const json::exception& e) {
    throw IoError(fmt::format("invalid posterior document: {}", e.what()));
  }
}

void save_posterior(const std::filesystem::path& path, const PosteriorSamples& samples) {
  write_file_atomic(path, posterior_to_json(samples));
}

PosteriorSamples load_posterior(const std::filesystem::path& path) {
  try {
    return posterior_from_json(read_file(path));
  } catch (const IoError& e) {
    throw IoError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string stump_to_json(const WeightedSampleSet& set) {
  std::string weights;
  if (set.per_component) {
    weights = matrix_rows(set.weights);
  } else {
    weights = "[";
    for (Eigen::Index j = 0; j < set.weights.rows(); ++j) {
      if (j > 0) weights += ",";
      weights += format_real(set.weights(j, 0));
    }
    weights += "]";
  }
  return fmt::format(
      "{{\"model_id\":{},\n\"M\":{},\n\"per_component\":{},\n"
      "\"meta\":{{\"seed\":{},\"N\":{},\"created\":{},\"objective\":{},\"iterations\":{}}},\n"
      "\"samples\":{},\n\"weights\":{}}}\n",
      json_string(set.model_id), set.size(), set.per_component ? "true" : "false", set.meta.seed,
      set.meta.hyper_samples, json_string(set.meta.created), format_real(set.meta.objective),
      set.meta.iterations, matrix_rows(set.samples), weights);
}

WeightedSampleSet stump_from_json(std::string_view text) {
  const json doc = parse(text, "stump");
  try {
    WeightedSampleSet set;
    set.model_id = doc.at("model_id").get<std::string>();
    const auto m = doc.at("M").get<std::size_t>();
    set.per_component = doc.at("per_component").get<bool>();
    const auto& samples = doc.at("samples");
    if (!samples.is_array() || samples.size() != m || m == 0) {
      throw IoError("'samples' must hold M rows");
    }
    set.samples = matrix_from(samples, samples.front().size(), "samples");
    const auto& weights = doc.at("weights");
    if (set.per_component) {
      set.weights = matrix_from(weights, set.group_dim(), "weights");
    } else {
      const auto w = weights.get<std::vector<double>>();
      set.weights = Eigen::Map<const Eigen::MatrixXd>(w.data(), static_cast<Eigen::Index>(w.size()), 1);
    }
    const auto& meta = doc.at("meta");
    set.meta.seed = meta.at("seed").get<std::uint64_t>();
    set.meta.hyper_samples = meta.at("N").get<std::size_t>();
    set.meta.created = meta.value("created", std::string{});
    set.meta.objective = meta.value("objective", 0.0);
    set.meta.iterations = meta.value("iterations", std::size_t{0});
    set.validate();
    return set;
  } catch (const json::exception& e) {
    throw IoError(fmt::format("invalid stump document: {}", e.what()));
  } catch (const std::invalid_argument& e) {
    throw IoError(fmt::format("invalid stump document: {}", e.what()));
  }
}

void save_stump(const std::filesystem::path& path, const WeightedSampleSet& set) {
  write_file_atomic(path, stump_to_json(set));
}

WeightedSampleSet load_stump(const std::filesystem::path& path) {
  try {
    return stump_from_json(read_file(path));
  } catch (const IoError& e) {
    throw IoError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string ks_report_to_json(const KsReport& report) {
  std::string entries = "[";
  for (std::size_t i = 0; i < report.per_marginal.size(); ++i) {
    if (i > 0) entries += ",\n  ";
    entries += fmt::format("{{\"name\":{},\"ks\":{}}}", json_string(report.per_marginal[i].name),
                           format_real(report.per_marginal[i].ks));
  }
  entries += "]";
  return fmt::format("{{\"per_marginal\":{},\n\"median_ks\":{}}}\n", entries,
                     format_real(report.median_ks));
}

std::string timing_to_json(const std::vector<TimingReport>& reports) {
  std::string out = "[";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    if (i > 0) out += ",\n ";
    out += fmt::format(
        "{{\"label\":{},\"wall_time_seconds\":{},\"burn_in\":{},\"draws\":{},\"seed\":{}}}",
        json_string(r.label), format_real(r.wall_time_seconds), r.burn_in, r.draws, r.seed);
  }
  return out + "]\n";
}

}  // namespace sf

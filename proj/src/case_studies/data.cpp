#include "stumpfungus/case_studies/data.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "stumpfungus/io.hpp"
#include "stumpfungus/rng.hpp"

namespace sf {

DataError::DataError(const std::string& message, std::size_t line)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}", line, message) : message),
      line_(line) {}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class T>
T parse_number(std::string_view field, std::string_view column, std::size_t line) {
  field = trim(field);
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw DataError(fmt::format("cannot parse {} '{}'", column, field), line);
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw DataError(fmt::format("{} is not finite", column), line);
  }
  return value;
}

// Yields (line number, fields) for every non-empty data row after checking
// the header.
template <class F>
void for_each_row(std::string_view text, const std::vector<std::string_view>& header, F&& row) {
  const auto lines = split(text, '\n');
  std::size_t line_no = 0;
  bool seen_header = false;
  for (auto raw : lines) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (!seen_header) {
      if (fields.size() != header.size() ||
          !std::equal(fields.begin(), fields.end(), header.begin(),
                      [](std::string_view a, std::string_view b) { return trim(a) == b; })) {
        std::string want;
        for (auto h : header) want += (want.empty() ? "" : ",") + std::string(h);
        throw DataError(fmt::format("expected header '{}'", want), line_no);
      }
      seen_header = true;
      continue;
    }
    if (fields.size() != header.size()) {
      throw DataError(fmt::format("expected {} fields, found {}", header.size(), fields.size()),
                      line_no);
    }
    row(line_no, fields);
  }
  if (!seen_header) throw DataError("missing header row", 1);
}

}  // namespace

void MarblesData::validate() const {
  if (boxes < 1) throw DataError("marbles data needs at least one box", 0);
  for (const auto& d : draws) {
    if (d.box < 0 || d.box >= boxes) throw DataError(fmt::format("box {} out of range", d.box), 0);
    if (d.outcome != 0 && d.outcome != 1) throw DataError("outcome must be 0 or 1", 0);
  }
}

std::vector<int> MarblesData::outcomes_of(int box) const {
  std::vector<int> out;
  for (const auto& d : draws) {
    if (d.box == box) out.push_back(d.outcome);
  }
  return out;
}

MarblesData MarblesData::without_box(int box) const {
  MarblesData out;
  out.boxes = boxes - 1;
  for (const auto& d : draws) {
    if (d.box == box) continue;
    out.draws.push_back({d.box > box ? d.box - 1 : d.box, d.outcome});
  }
  return out;
}

void RatsData::validate() const {
  for (const auto& r : rows) {
    if (r.n < 0 || r.y < 0 || r.y > r.n) {
      throw DataError(fmt::format("invalid counts n={} y={}", r.n, r.y), 0);
    }
  }
}

RatsData RatsData::without_row(std::size_t i) const {
  RatsData out = *this;
  out.rows.erase(out.rows.begin() + static_cast<std::ptrdiff_t>(i));
  return out;
}

void AttainData::validate() const {
  if (n_sid < 1 || n_sex < 1 || n_pid < 1) throw DataError("attainment data needs groups", 0);
  for (const auto& r : rows) {
    if (r.sid < 0 || r.sid >= n_sid || r.sex < 0 || r.sex >= n_sex || r.pid < 0 || r.pid >= n_pid) {
      throw DataError(fmt::format("group index out of range (sid={}, sex={}, pid={})", r.sid,
                                  r.sex, r.pid),
                      0);
    }
    if (!std::isfinite(r.cc) || !std::isfinite(r.vrq) || !std::isfinite(r.attain)) {
      throw DataError("non-finite value", 0);
    }
  }
}

AttainData AttainData::without_school(int sid) const {
  AttainData out = *this;
  out.n_sid = n_sid - 1;
  out.rows.clear();
  for (auto r : rows) {
    if (r.sid == sid) continue;
    if (r.sid > sid) --r.sid;
    out.rows.push_back(r);
  }
  return out;
}

AttainData::Local AttainData::school(int sid) const {
  Local local;
  local.data.n_sid = 1;
  std::map<int, int> sex_map, pid_map;
  for (auto r : rows) {
    if (r.sid != sid) continue;
    r.sid = 0;
    auto [sx, sex_new] = sex_map.try_emplace(r.sex, static_cast<int>(sex_map.size()));
    if (sex_new) local.original_sex.push_back(r.sex);
    auto [px, pid_new] = pid_map.try_emplace(r.pid, static_cast<int>(pid_map.size()));
    if (pid_new) local.original_pid.push_back(r.pid);
    r.sex = sx->second;
    r.pid = px->second;
    local.data.rows.push_back(r);
  }
  local.data.n_sex = std::max(1, static_cast<int>(sex_map.size()));
  local.data.n_pid = std::max(1, static_cast<int>(pid_map.size()));
  return local;
}

MarblesData parse_marbles_csv(std::string_view text) {
  MarblesData data;
  int max_box = -1;
  for_each_row(text, {"box", "outcome"}, [&](std::size_t line, const auto& f) {
    const int box = parse_number<int>(f[0], "box", line);
    const int outcome = parse_number<int>(f[1], "outcome", line);
    if (box < 0) throw DataError("box index must be nonnegative", line);
    if (outcome != 0 && outcome != 1) throw DataError("outcome must be 0 or 1", line);
    max_box = std::max(max_box, box);
    data.draws.push_back({box, outcome});
  });
  data.boxes = std::max(6, max_box + 1);
  return data;
}

RatsData parse_rats_csv(std::string_view text) {
  RatsData data;
  for_each_row(text, {"n", "y"}, [&](std::size_t line, const auto& f) {
    const int n = parse_number<int>(f[0], "n", line);
    const int y = parse_number<int>(f[1], "y", line);
    if (n < 0 || y < 0 || y > n) throw DataError(fmt::format("invalid counts n={} y={}", n, y), line);
    data.rows.push_back({n, y});
  });
  return data;
}

AttainData parse_attain_csv(std::string_view text) {
  AttainData data;
  data.n_sid = data.n_sex = data.n_pid = 0;
  for_each_row(text, {"sid", "sex", "pid", "cc", "vrq", "attain"},
               [&](std::size_t line, const auto& f) {
                 AttainRow r;
                 r.sid = parse_number<int>(f[0], "sid", line);
                 r.sex = parse_number<int>(f[1], "sex", line);
                 r.pid = parse_number<int>(f[2], "pid", line);
                 r.cc = parse_number<double>(f[3], "cc", line);
                 r.vrq = parse_number<double>(f[4], "vrq", line);
                 r.attain = parse_number<double>(f[5], "attain", line);
                 if (r.sid < 0 || r.pid < 0 || r.sex < 0 || r.sex > 1) {
                   throw DataError("group index out of range", line);
                 }
                 data.n_sid = std::max(data.n_sid, r.sid + 1);
                 data.n_pid = std::max(data.n_pid, r.pid + 1);
                 data.rows.push_back(r);
               });
  data.n_sex = 2;
  return data;
}

std::string to_csv(const MarblesData& data) {
  std::string out = "box,outcome\n";
  for (const auto& d : data.draws) out += fmt::format("{},{}\n", d.box, d.outcome);
  return out;
}

std::string to_csv(const RatsData& data) {
  std::string out = "n,y\n";
  for (const auto& r : data.rows) out += fmt::format("{},{}\n", r.n, r.y);
  return out;
}

std::string to_csv(const AttainData& data) {
  std::string out = "sid,sex,pid,cc,vrq,attain\n";
  for (const auto& r : data.rows) {
    out += fmt::format("{},{},{},{},{},{}\n", r.sid, r.sex, r.pid, r.cc, r.vrq, r.attain);
  }
  return out;
}

MarblesData load_marbles(const std::filesystem::path& path) { return parse_marbles_csv(read_file(path)); }
RatsData load_rats(const std::filesystem::path& path) { return parse_rats_csv(read_file(path)); }
AttainData load_attain(const std::filesystem::path& path) { return parse_attain_csv(read_file(path)); }

MarblesData synthesize_marbles(std::uint64_t seed, int draws_per_box, std::vector<int> blue_per_box) {
  MarblesData data;
  data.boxes = static_cast<int>(blue_per_box.size());
  Rng rng(seed);
  for (int k = 0; k < draws_per_box; ++k) {
    for (int b = 0; b < data.boxes; ++b) {
      const double p = static_cast<double>(blue_per_box[static_cast<std::size_t>(b)]) /
                       MarblesData::kMarblesPerBox;
      data.draws.push_back({b, rng.bernoulli(p) ? 1 : 0});
    }
  }
  return data;
}

RatsData rats_tumor_table() {
  // (y, n) per experiment; the last row is the current experiment.
  static constexpr std::array<std::array<int, 2>, 71> kTable{{
      {0, 20},  {0, 20},  {0, 20},  {0, 20},  {0, 20},  {0, 20},  {0, 20},  {0, 19},  {0, 19},
      {0, 19},  {0, 19},  {0, 18},  {0, 18},  {0, 17},  {1, 20},  {1, 20},  {1, 20},  {1, 20},
      {1, 19},  {1, 19},  {1, 18},  {1, 18},  {2, 25},  {2, 24},  {2, 23},  {2, 20},  {2, 20},
      {2, 20},  {2, 20},  {2, 20},  {2, 20},  {1, 10},  {5, 49},  {2, 19},  {5, 46},  {3, 27},
      {2, 17},  {7, 49},  {7, 47},  {3, 20},  {3, 20},  {2, 13},  {9, 48},  {10, 50}, {4, 20},
      {4, 20},  {4, 20},  {4, 20},  {4, 20},  {4, 20},  {4, 20},  {10, 48}, {4, 19},  {4, 19},
      {4, 19},  {5, 22},  {11, 46}, {12, 49}, {5, 20},  {5, 20},  {6, 23},  {5, 19},  {6, 22},
      {6, 20},  {6, 20},  {6, 20},  {16, 52}, {15, 46}, {15, 47}, {9, 24},  {4, 14},
  }};
  RatsData data;
  for (const auto& [y, n] : kTable) data.rows.push_back({n, y});
  return data;
}

AttainData synthesize_attain(std::uint64_t seed, const AttainSizes& sizes, const AttainTruth& truth) {
  if (sizes.pupils < 1 || sizes.pid < 1 || sizes.sid < 1) {
    throw std::invalid_argument("attainment sizes must be positive");
  }
  Rng rng(seed);
  AttainData data;
  data.n_sid = sizes.sid;
  data.n_sex = 2;
  data.n_pid = sizes.pid;

  // Group coefficients (intercept, CC, VRQ) and residual scales per hierarchy.
  const auto counts = data.groups_per_hierarchy();
  std::array<std::vector<std::array<double, 3>>, 3> beta;
  std::array<std::vector<double>, 3> sigma;
  for (std::size_t h = 0; h < 3; ++h) {
    for (int g = 0; g < counts[h]; ++g) {
      std::array<double, 3> b{};
      for (std::size_t k = 0; k < 3; ++k) b[k] = rng.normal(truth.mu_beta[h][k], truth.sigma_beta[h]);
      beta[h].push_back(b);
      sigma[h].push_back(std::exp(rng.normal(truth.mu_sigma[h], truth.sigma_sigma[h])));
    }
  }

  for (int i = 0; i < sizes.pupils; ++i) {
    AttainRow r;
    // Pupils of a primary school mostly move on to one secondary school.
    r.pid = i < sizes.pid ? i : static_cast<int>(rng.index(static_cast<std::size_t>(sizes.pid)));
    const int home = r.pid % sizes.sid;
    r.sid = i < sizes.sid ? i
                          : (rng.bernoulli(0.8) ? home
                                                : static_cast<int>(rng.index(static_cast<std::size_t>(sizes.sid))));
    r.sex = rng.bernoulli(0.5) ? 1 : 0;
    r.cc = rng.normal();
    r.vrq = rng.normal();
    const std::array<int, 3> g{r.sid, r.sex, r.pid};
    double precision = 0.0, weighted_mean = 0.0;
    for (std::size_t h = 0; h < 3; ++h) {
      const auto& b = beta[h][static_cast<std::size_t>(g[h])];
      const double mean = b[0] + b[1] * r.cc + b[2] * r.vrq;
      const double s = sigma[h][static_cast<std::size_t>(g[h])];
      precision += 1.0 / (s * s);
      weighted_mean += mean / (s * s);
    }
    r.attain = rng.normal(weighted_mean / precision, 1.0 / std::sqrt(precision));
    data.rows.push_back(r);
  }
  return data;
}

}  // namespace sf

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sf {

// Malformed input, with the 1-based line number where it was found.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& message, std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct MarbleDraw {
  int box = 0;      // 0-based
  int outcome = 0;  // 1 = blue
};

struct MarblesData {
  static constexpr int kMarblesPerBox = 4;
  int boxes = 6;
  std::vector<MarbleDraw> draws;

  void validate() const;
  std::vector<int> outcomes_of(int box) const;
  // The draws of every box except `box`, later boxes shifted down by one.
  MarblesData without_box(int box) const;
};

struct RatsRow {
  int n = 0;
  int y = 0;
};

struct RatsData {
  std::vector<RatsRow> rows;

  void validate() const;
  RatsData without_row(std::size_t i) const;
};

struct AttainRow {
  double cc = 0.0;
  double vrq = 0.0;
  double attain = 0.0;
  int sid = 0;
  int sex = 0;
  int pid = 0;
};

struct AttainData {
  static constexpr std::size_t kHierarchies = 3;  // SID, SEX, PID
  int n_sid = 0;
  int n_sex = 2;
  int n_pid = 0;
  std::vector<AttainRow> rows;

  std::array<int, kHierarchies> groups_per_hierarchy() const { return {n_sid, n_sex, n_pid}; }
  static std::array<int, kHierarchies> group_index(const AttainRow& r) { return {r.sid, r.sex, r.pid}; }

  void validate() const;
  // Pupils of every school except `sid`; later schools renumbered down.
  AttainData without_school(int sid) const;
  // Pupils of school `sid` only, with SID, SEX and PID renumbered densely in
  // order of first appearance. original_* map local index -> original index.
  struct Local;
  Local school(int sid) const;
};

struct AttainData::Local {
  AttainData data;
  std::vector<int> original_sex;
  std::vector<int> original_pid;
};

// CSV: header row required; comma-separated; UTF-8.
MarblesData parse_marbles_csv(std::string_view text);
RatsData parse_rats_csv(std::string_view text);
AttainData parse_attain_csv(std::string_view text);
std::string to_csv(const MarblesData& data);
std::string to_csv(const RatsData& data);
std::string to_csv(const AttainData& data);

MarblesData load_marbles(const std::filesystem::path& path);
RatsData load_rats(const std::filesystem::path& path);
AttainData load_attain(const std::filesystem::path& path);

// Draws `draws_per_box` marbles with replacement from each box, box i holding
// blue_per_box[i] blue marbles out of 4.
MarblesData synthesize_marbles(std::uint64_t seed, int draws_per_box = 5,
                               std::vector<int> blue_per_box = {1, 2, 3, 2, 1, 3});

// Tumor incidence in 71 rat experiments (70 historical and the current one,
// 4 of 14), as tabulated by Tarone (1982).
RatsData rats_tumor_table();

struct AttainSizes {
  int pupils = 3435;
  int pid = 148;
  int sid = 19;
};

struct AttainTruth {
  // Per hierarchy (SID, SEX, PID): mean coefficients, coefficient spread,
  // mean and spread of the log residual scale.
  std::array<std::array<double, 3>, 3> mu_beta{{{5.0, 0.5, 1.5}, {5.0, 0.5, 1.5}, {5.0, 0.5, 1.5}}};
  std::array<double, 3> sigma_beta{0.6, 0.4, 0.5};
  std::array<double, 3> mu_sigma{0.4, 0.4, 0.4};
  std::array<double, 3> sigma_sigma{0.3, 0.3, 0.3};
};

// Generative draw from the cross-classified model: per-hierarchy group
// coefficients and scales, then each score from the normalized product of
// the per-hierarchy normal factors.
AttainData synthesize_attain(std::uint64_t seed, const AttainSizes& sizes = {},
                             const AttainTruth& truth = {});

}  // namespace sf

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rfsl/schedules.hpp"

namespace rfsl {

struct CheckRecord {
  std::string name;
  double observed = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Structural properties of a U-shaped grid. Each record reports a normalized
// worst case that must not exceed its tolerance:
//   midpoint, symmetry                    absolute deviation
//   spacing-geometric                      relative error of eta_i vs h t_i / h (1 - t_{i+1})
//   spacing-ratio, spacing-square          max(eta_i / (1 - t_i), eta_i / (1 - t_{i+1})) / h, and
//                                          eta_i^2 (1 - t_i)^2 / (1 - t_{i+1})^2 / h^2, both against 1
//   spacing-sum                            sum eta_i^2 / ((1 - t_{i+1})^2 t_i^2) / (4 h^2 N)
//   reciprocal-gap                         ((1-t_i)^2/t_i^2 - (1-t_{i+1})^2/t_{i+1}^2) / (2 eta_i / t_i^3)
//   growth-bound                           h / (8 log(1 / (2 delta)) / N)
std::vector<CheckRecord> ushaped_grid_checks(const TimeGrid& grid);

// Suites: "grid", "equivalence", "covariance", "identities".
std::vector<CheckRecord> run_check_suite(std::string_view suite, std::uint64_t seed, std::size_t threads = 1);
const std::vector<std::string>& check_suite_names();

// One CSV record per check: name,observed,tolerance,pass.
void write_check_report(std::ostream& out, const std::vector<CheckRecord>& records);

}  // namespace rfsl

#pragma once

// Machine-readable bound reports (CSV rows + JSON summary).

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace klasian {

/// One grid point of a bound check.
struct BoundPoint {
  std::vector<std::pair<std::string, double>> parameters;
  double measured = 0.0;
  double measured_se = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct BoundReport {
  static constexpr int kSchemaVersion = 1;

  std::string bound_name;
  double stat_tolerance = 0.15;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  std::vector<BoundPoint> points;
  // Scalar summaries (fitted slopes, constants, ...), kept in insertion order.
  std::vector<std::pair<std::string, double>> summary;
  std::vector<std::string> notes;

  /// pass <=> measured <= bound * (1 + stat_tolerance)
  void add_point(std::vector<std::pair<std::string, double>> parameters, double measured,
                 double measured_se, double bound);

  bool all_pass() const;
  void set_summary(const std::string& key, double value);
  const double* find_summary(const std::string& key) const;

  void write_csv(std::ostream& out) const;
  std::string to_json() const;
};

}  // namespace klasian

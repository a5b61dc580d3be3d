#include "klasian/report.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include <json.hpp>

namespace klasian {

namespace {

// Round-trip precision, independent of stream state.
std::string format_number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

}  // namespace

void BoundReport::add_point(std::vector<std::pair<std::string, double>> parameters, double measured,
                            double measured_se, double bound) {
  BoundPoint point;
  point.parameters = std::move(parameters);
  point.measured = measured;
  point.measured_se = measured_se;
  point.bound = bound;
  point.pass = measured <= bound * (1.0 + stat_tolerance);
  points.push_back(std::move(point));
}

bool BoundReport::all_pass() const {
  return std::all_of(points.begin(), points.end(), [](const BoundPoint& p) { return p.pass; });
}

void BoundReport::set_summary(const std::string& key, double value) {
  for (auto& [k, v] : summary) {
    if (k == key) {
      v = value;
      return;
    }
  }
  summary.emplace_back(key, value);
}

const double* BoundReport::find_summary(const std::string& key) const {
  for (const auto& [k, v] : summary)
    if (k == key) return &v;
  return nullptr;
}

void BoundReport::write_csv(std::ostream& out) const {
  out << "bound_name";
  if (!points.empty())
    for (const auto& [name, value] : points.front().parameters) out << ',' << name;
  out << ",measured,measured_se,bound,pass\n";
  for (const auto& p : points) {
    out << bound_name;
    for (const auto& [name, value] : p.parameters) out << ',' << format_number(value);
    out << ',' << format_number(p.measured) << ',' << format_number(p.measured_se) << ','
        << format_number(p.bound) << ',' << (p.pass ? "true" : "false") << '\n';
  }
}

std::string BoundReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["bound_name"] = bound_name;
  j["seed"] = seed;
  j["n_samples"] = n_samples;
  j["stat_tolerance"] = stat_tolerance;
  j["all_pass"] = all_pass();
  auto& summary_json = j["summary"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : summary) summary_json[k] = v;
  auto& rows = j["points"] = nlohmann::ordered_json::array();
  for (const auto& p : points) {
    nlohmann::ordered_json row;
    for (const auto& [name, value] : p.parameters) row[name] = value;
    row["measured"] = p.measured;
    row["measured_se"] = p.measured_se;
    row["bound"] = p.bound;
    row["pass"] = p.pass;
    rows.push_back(std::move(row));
  }
  j["notes"] = notes;
  return j.dump(2);
}

}  // namespace klasian

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace varilet {

struct CheckResult {
  std::string name;
  std::string property;  // what the check asserts, in one line
  bool passed = true;
  double error = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// Ordered list of named checks. Library validators return one of these
/// instead of throwing so that every violation is visible at once.
class VerificationReport {
 public:
  void add(CheckResult result) { checks_.push_back(std::move(result)); }
  void add(std::string name, std::string property, bool passed, double error = 0.0, double tolerance = 0.0,
           std::string detail = {});
  /// Appends another report, prefixing its check names with `prefix/`.
  void merge(const VerificationReport& other, const std::string& prefix = {});

  bool ok() const;
  std::size_t failure_count() const;
  const std::vector<CheckResult>& checks() const { return checks_; }
  std::vector<std::string> failures() const;
  const CheckResult* find(const std::string& name) const;

  /// Sorts by name so that aggregation order never leaks into output.
  void sort();

  std::string to_table() const;
  nlohmann::json to_json() const;

 private:
  std::vector<CheckResult> checks_;
};

}  // namespace varilet

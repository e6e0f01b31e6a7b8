#include "varilet/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace varilet {

void VerificationReport::add(std::string name, std::string property, bool passed, double error, double tolerance,
                             std::string detail) {
  checks_.push_back({std::move(name), std::move(property), passed, error, tolerance, std::move(detail)});
}

void VerificationReport::merge(const VerificationReport& other, const std::string& prefix) {
  for (CheckResult c : other.checks_) {
    if (!prefix.empty()) c.name = prefix + "/" + c.name;
    checks_.push_back(std::move(c));
  }
}

bool VerificationReport::ok() const {
  return std::all_of(checks_.begin(), checks_.end(), [](const CheckResult& c) { return c.passed; });
}

std::size_t VerificationReport::failure_count() const {
  return static_cast<std::size_t>(
      std::count_if(checks_.begin(), checks_.end(), [](const CheckResult& c) { return !c.passed; }));
}

std::vector<std::string> VerificationReport::failures() const {
  std::vector<std::string> out;
  for (const CheckResult& c : checks_) {
    if (!c.passed) out.push_back(c.name + (c.detail.empty() ? "" : ": " + c.detail));
  }
  return out;
}

const CheckResult* VerificationReport::find(const std::string& name) const {
  for (const CheckResult& c : checks_) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

void VerificationReport::sort() {
  std::stable_sort(checks_.begin(), checks_.end(),
                   [](const CheckResult& a, const CheckResult& b) { return a.name < b.name; });
}

std::string VerificationReport::to_table() const {
  std::size_t width = 5;
  for (const CheckResult& c : checks_) width = std::max(width, c.name.size());
  std::ostringstream out;
  char buf[64];
  out << "status  " << std::string("check") << std::string(width - 5, ' ') << "  error       tolerance   detail\n";
  for (const CheckResult& c : checks_) {
    out << (c.passed ? "PASS    " : "FAIL    ") << c.name << std::string(width - c.name.size(), ' ') << "  ";
    std::snprintf(buf, sizeof buf, "%-10.3g  %-10.3g  ", c.error, c.tolerance);
    out << buf << c.detail << '\n';
  }
  out << (ok() ? "all " + std::to_string(checks_.size()) + " checks passed"
               : std::to_string(failure_count()) + " of " + std::to_string(checks_.size()) + " checks failed")
      << '\n';
  return out.str();
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json checks = nlohmann::json::array();
  for (const CheckResult& c : checks_) {
    checks.push_back({{"name", c.name},
                      {"property", c.property},
                      {"passed", c.passed},
                      {"error", c.error},
                      {"tolerance", c.tolerance},
                      {"detail", c.detail}});
  }
  return {{"format", "varilet.report"}, {"ok", ok()}, {"checks", std::move(checks)}};
}

}  // namespace varilet

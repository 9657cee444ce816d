#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace pdrbsde {

struct CheckEntry {
  std::string condition;
  double max_residual = 0.0;
  std::string worst_cell;
  bool pass = true;
};

struct VerificationReport {
  std::vector<CheckEntry> entries;

  bool all_pass() const;
  const CheckEntry* find(const std::string& condition) const;
  std::vector<std::string> failures() const;
  nlohmann::json to_json() const;
};

// Accumulates a residual per cell and keeps the worst one.
class ResidualTracker {
 public:
  ResidualTracker(std::string condition, double tol) : condition_(std::move(condition)), tol_(tol) {}
  void add(double residual, const std::string& cell);
  void add(double residual, int instant, const char* slot, int path);
  void fail(const std::string& reason);
  CheckEntry entry() const;

 private:
  std::string condition_;
  double tol_;
  double worst_ = 0.0;
  std::string cell_;
  bool forced_fail_ = false;
};

}  // namespace pdrbsde

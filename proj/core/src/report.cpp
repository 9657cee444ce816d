#include "pdrbsde/report.hpp"

#include <algorithm>
#include <sstream>

namespace pdrbsde {

bool VerificationReport::all_pass() const {
  for (const auto& e : entries)
    if (!e.pass) return false;
  return true;
}

const CheckEntry* VerificationReport::find(const std::string& condition) const {
  for (const auto& e : entries)
    if (e.condition == condition) return &e;
  return nullptr;
}

std::vector<std::string> VerificationReport::failures() const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (!e.pass) out.push_back(e.condition);
  return out;
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries)
    arr.push_back({{"condition", e.condition},
                   {"max_residual", e.max_residual},
                   {"worst_cell", e.worst_cell},
                   {"pass", e.pass}});
  return arr;
}

void ResidualTracker::add(double residual, const std::string& cell) {
  if (forced_fail_) return;
  if (cell_.empty() || residual > worst_) {
    worst_ = std::max(worst_, residual);
    cell_ = cell;
  }
}

void ResidualTracker::add(double residual, int instant, const char* slot, int path) {
  if (forced_fail_ || (!cell_.empty() && residual <= worst_)) return;
  std::ostringstream os;
  os << "instant " << instant << " slot " << slot << " path " << path;
  add(residual, os.str());
}

void ResidualTracker::fail(const std::string& reason) {
  forced_fail_ = true;
  cell_ = reason;
}

CheckEntry ResidualTracker::entry() const {
  CheckEntry e;
  e.condition = condition_;
  e.max_residual = worst_;
  e.worst_cell = cell_;
  e.pass = !forced_fail_ && worst_ <= tol_;
  return e;
}

}  // namespace pdrbsde

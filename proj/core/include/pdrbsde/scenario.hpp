#pragma once

#include "pdrbsde/driver_solver.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdrbsde {

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ScenarioConfig {
  std::string name;
  SpaceSpec space;
  nlohmann::json barriers;
  nlohmann::json driver;
  ContractionParams params;
  double tol = 1e-10;
  long max_iter = 0;
  int max_outer = 60;
  double outer_tol = 1e-12;
  Arithmetic arithmetic = Arithmetic::Rational;
  std::uint64_t seed = 0;
  nlohmann::json raw;
};

// Numbers may be JSON numbers or strings such as "3/4".
Rational json_rational(const nlohmann::json& j, const std::string& where);

ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& path);

template <class S>
struct Scenario {
  FilteredSpace space;
  BarrierPair<S> barriers;
  LipschitzDriver<S> driver;
  bool driver_depends_on_solution = false;
  IntegrandProcess<S> base;  // g(., 0, 0)
};

// Builds the space, barriers and driver; admissibility failures raise ConfigError naming the cell.
template <class S>
Scenario<S> instantiate(const ScenarioConfig& cfg);

template <class S>
struct ScenarioSolution {
  DrbsdeRun<S> run;
  IntegrandProcess<S> g;              // driver process the returned solution solves exactly
  IntegrandProcess<S> g_on_solution;  // driver evaluated on the returned (Y, Z)
  std::optional<OuterTrace> outer;    // present for drivers depending on (y, z)
};

PicardOptions picard_options(const ScenarioConfig& cfg);

// Frozen-driver solve for zero and process drivers, outer iteration otherwise.
template <class S>
ScenarioSolution<S> solve_scenario(const Scenario<S>& sc, const ScenarioConfig& cfg);

// Paths with weights, ΔW signs and marks, plus the atoms of both partitions per instant.
nlohmann::json space_to_json(const FilteredSpace& space);

// FNV-1a of the canonical JSON dump.
std::string digest(const nlohmann::json& j);

// Deterministic admissible random scenario; index selects the member of the family.
nlohmann::json generate_scenario(std::uint64_t seed, int index);
std::vector<nlohmann::json> generate_corpus(std::uint64_t seed, int count);

}  // namespace pdrbsde

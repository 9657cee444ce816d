#include "pdrbsde/scenario.hpp"

#include "pdrbsde/enumeration.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace pdrbsde {

using nlohmann::json;

Rational json_rational(const json& j, const std::string& where) {
  try {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_number()) return parse_rational(j.dump());
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": expected a number");
}

namespace {

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  return j.at(key);
}

double json_double(const json& j, const std::string& where) { return to_double(json_rational(j, where)); }

template <class S>
S json_scalar(const json& j, const std::string& where) {
  return from_rational<S>(json_rational(j, where));
}

std::string cell(const std::string& where, int k, const char* slot, int p) {
  std::ostringstream os;
  os << where << " instant " << k << " slot " << slot << " path " << p;
  return os.str();
}

// A process given as {"minus": [[...]], "mid": [[...]], "plus": [[...]]} per path,
// or as a deterministic array applied to every slot of each instant,
// or as {"minus": [...], "mid": [...], "plus": [...]} with one value per instant.
template <class S>
LadlagProcess<S> read_process(const FilteredSpace& space, const json& j, const std::string& where) {
  auto x = LadlagProcess<S>::zeros(space, Kind::Predictable);
  const int N = space.N;
  const int n = space.n_paths;
  if (j.is_array()) {
    if (static_cast<int>(j.size()) != N + 1) throw ConfigError(where + ": needs " + std::to_string(N + 1) + " values");
    for (int k = 0; k <= N; ++k) {
      S v = json_scalar<S>(j[k], where + "[" + std::to_string(k) + "]");
      for (int p = 0; p < n; ++p) {
        x.minus[k][p] = x.mid[k][p] = v;
        if (k < N) x.plus[k][p] = v;
      }
    }
    return x;
  }
  for (auto [name, slot, count] : {std::tuple{"minus", Slot::Minus, N + 1}, std::tuple{"mid", Slot::Mid, N + 1},
                                   std::tuple{"plus", Slot::Plus, N}}) {
    const std::string w = where + "." + name;
    if (!j.contains(name)) {
      if (slot == Slot::Mid) throw ConfigError(w + ": missing");
      continue;
    }
    const auto& arr = j.at(name);
    if (!arr.is_array() || static_cast<int>(arr.size()) != count)
      throw ConfigError(w + ": needs " + std::to_string(count) + " entries");
    for (int k = 0; k < count; ++k) {
      const auto& row = arr[k];
      if (row.is_array()) {
        if (static_cast<int>(row.size()) != n)
          throw ConfigError(w + "[" + std::to_string(k) + "]: needs " + std::to_string(n) + " path values");
        for (int p = 0; p < n; ++p) x.at(k, slot)[p] = json_scalar<S>(row[p], cell(w, k, name, p));
      } else {
        S v = json_scalar<S>(row, w + "[" + std::to_string(k) + "]");
        for (int p = 0; p < n; ++p) x.at(k, slot)[p] = v;
      }
    }
  }
  if (!j.contains("minus")) x.minus = x.mid;
  if (!j.contains("plus"))
    for (int k = 0; k < N; ++k) x.plus[k] = x.mid[k];
  return x;
}

template <class S>
IntegrandProcess<S> read_integrand(const FilteredSpace& space, const json& j, const std::string& where) {
  auto z = IntegrandProcess<S>::zeros(space);
  if (!j.is_array() || static_cast<int>(j.size()) != space.N)
    throw ConfigError(where + ": needs " + std::to_string(space.N) + " entries");
  for (int k = 0; k < space.N; ++k) {
    if (j[k].is_array()) {
      if (static_cast<int>(j[k].size()) != space.n_paths)
        throw ConfigError(where + "[" + std::to_string(k) + "]: needs " + std::to_string(space.n_paths) + " path values");
      for (int p = 0; p < space.n_paths; ++p) z.z[k][p] = json_scalar<S>(j[k][p], cell(where, k, "interval", p));
    } else {
      S v = json_scalar<S>(j[k], where + "[" + std::to_string(k) + "]");
      for (auto& e : z.z[k]) e = v;
    }
  }
  if (auto why = class_violation(space, z, structural_tol<S>())) throw ConfigError(where + ": " + *why);
  return z;
}

template <class S>
BarrierPair<S> game_option(const FilteredSpace& space, const json& j) {
  const std::string w = "barriers";
  const S s0 = json_scalar<S>(j.value("s0", json(1)), w + ".s0");
  const S strike = json_scalar<S>(j.value("strike", json(1)), w + ".strike");
  const S penalty = json_scalar<S>(j.value("penalty", json("1/4")), w + ".penalty");
  const S jump = json_scalar<S>(j.value("jump", json("1/4")), w + ".jump");
  const S vol = json_scalar<S>(j.value("vol", json(1)), w + ".vol");
  const int N = space.N;
  auto X = LadlagProcess<S>::zeros(space, Kind::Predictable);
  for (int p = 0; p < space.n_paths; ++p) {
    S level = s0;
    for (int k = 0; k <= N; ++k) {
      X.minus[k][p] = X.mid[k][p] = level;
      level += jump * S(space.mark[k][p]);
      if (k < N) {
        X.plus[k][p] = level;
        level += vol * space.dW<S>(k, p);
      }
    }
  }
  BarrierPair<S> b;
  b.lower = X;
  X.for_each_slot([&](int k, Slot s) {
    for (int p = 0; p < space.n_paths; ++p) b.lower.at(k, s)[p] = pos_part(S(strike - X.at(k, s)[p]));
  });
  b.lower.minus[0] = b.lower.mid[0];
  b.upper = b.lower;
  b.upper.for_each_slot([&](int k, Slot s) {
    if (k == N && s == Slot::Mid) return;
    for (auto& v : b.upper.at(k, s)) v += penalty;
  });
  b.upper.minus[0] = b.upper.mid[0];
  return b;
}

template <class S>
BarrierPair<S> random_pair(const FilteredSpace& space, const json& j) {
  std::mt19937_64 rng(j.value("seed", 0ULL));
  const long lo = j.value("lo", -8L), hi = j.value("hi", 8L), denom = j.value("denom", 4L);
  BarrierPair<S> b;
  b.lower = random_predictable<S>(space, rng, lo, hi, denom);
  auto gap = random_predictable<S>(space, rng, j.value("gap_lo", -2L), j.value("gap_hi", 8L), denom);
  gap.for_each_slot([&](int k, Slot s) {
    for (auto& v : gap.at(k, s)) v = pos_part(v);
  });
  gap.minus[0] = gap.mid[0];
  const int N = space.N;
  if (j.value("right_continuous", false))
    for (int k = 0; k < N; ++k) {
      b.lower.plus[k] = b.lower.mid[k];
      gap.plus[k] = gap.mid[k];
    }
  if (j.value("left_usc", false))
    for (int k = 1; k <= N; ++k)
      for (int p = 0; p < space.n_paths; ++p) b.lower.minus[k][p] = min_of(b.lower.minus[k][p], b.lower.mid[k][p]);
  b.upper = b.lower + gap;
  b.upper.mid[N] = b.lower.mid[N];
  b.lower.kind = b.upper.kind = Kind::Predictable;
  return b;
}

}  // namespace

ScenarioConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  if (!j.contains("schema") || j.at("schema") != kSchemaVersion)
    throw ConfigError("schema: expected " + std::to_string(kSchemaVersion));
  ScenarioConfig c;
  c.raw = j;
  c.name = j.value("name", "scenario");
  const auto& grid = need(j, "grid", "config");
  const auto& n = need(grid, "N", "grid");
  if (!n.is_number_integer() || n.get<long>() < 1) throw ConfigError("grid.N: expected an integer >= 1");
  c.space.N = n.get<int>();
  c.space.T = json_rational(need(grid, "T", "grid"), "grid.T");
  if (c.space.T <= 0) throw ConfigError("grid.T: must be positive");
  if (j.contains("filtration")) {
    const auto& f = j.at("filtration");
    c.space.quasi_left_continuous = f.value("quasi_left_continuous", false);
    int idx = 0;
    for (const auto& m : f.value("marks", json::array())) {
      const std::string w = "filtration.marks[" + std::to_string(idx++) + "]";
      MarkSpec spec;
      spec.instant = need(m, "instant", w).get<int>();
      for (const auto& a : need(m, "alphabet", w)) spec.alphabet.push_back(a.get<std::string>());
      const auto& probs = need(m, "probs", w);
      if (!probs.is_array() || probs.empty()) throw ConfigError(w + ".probs: expected rows");
      int r = 0;
      for (const auto& row : probs) {
        std::vector<Rational> q;
        int col = 0;
        for (const auto& v : row)
          q.push_back(json_rational(v, w + ".probs[" + std::to_string(r) + "][" + std::to_string(col++) + "]"));
        spec.probs.push_back(std::move(q));
        ++r;
      }
      c.space.marks.push_back(std::move(spec));
    }
  }
  c.barriers = need(j, "barriers", "config");
  if (!c.barriers.contains("type")) throw ConfigError("barriers: missing 'type'");
  c.driver = j.value("driver", json{{"type", "zero"}});
  if (j.contains("params")) {
    const auto& p = j.at("params");
    if (p.contains("beta")) c.params.beta = json_double(p["beta"], "params.beta");
    if (p.contains("epsilon")) c.params.epsilon = json_double(p["epsilon"], "params.epsilon");
    if (p.contains("c")) c.params.c = json_double(p["c"], "params.c");
    if (p.contains("tol")) c.tol = json_double(p["tol"], "params.tol");
    if (p.contains("outer_tol")) c.outer_tol = json_double(p["outer_tol"], "params.outer_tol");
    c.max_iter = p.value("max_iter", 0L);
    c.max_outer = p.value("max_outer", 60);
    if (c.tol < 0 || c.outer_tol <= 0) throw ConfigError("params: tolerances must be nonnegative");
    if (c.params.beta <= 0 || c.params.epsilon <= 0 || c.params.c <= 0)
      throw ConfigError("params: beta, epsilon and c must be positive");
  }
  const std::string arith = j.value("arithmetic", "rational");
  if (arith == "rational") c.arithmetic = Arithmetic::Rational;
  else if (arith == "float") c.arithmetic = Arithmetic::Float;
  else throw ConfigError("arithmetic: expected 'rational' or 'float'");
  c.seed = j.value("seed", 0ULL);
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

template <class S>
Scenario<S> instantiate(const ScenarioConfig& cfg) {
  Scenario<S> s;
  try {
    s.space = build_space(cfg.space);
  } catch (const SpaceError& e) {
    throw ConfigError(std::string("filtration: ") + e.what());
  }
  if (is_exact_v<S> && !s.space.has_exact_sqrt)
    throw ConfigError("grid: rational arithmetic needs T/N to be the square of a rational");

  const auto& bj = cfg.barriers;
  const std::string type = bj.at("type").get<std::string>();
  if (type == "constant") {
    S lo = json_scalar<S>(need(bj, "lower", "barriers"), "barriers.lower");
    S hi = json_scalar<S>(bj.value("upper", bj.at("lower")), "barriers.upper");
    S term = json_scalar<S>(bj.value("terminal", bj.at("lower")), "barriers.terminal");
    s.barriers.lower = LadlagProcess<S>::constant(s.space, lo);
    s.barriers.upper = LadlagProcess<S>::constant(s.space, hi);
    s.barriers.lower.mid[s.space.N].assign(s.space.n_paths, term);
    s.barriers.upper.mid[s.space.N].assign(s.space.n_paths, term);
  } else if (type == "deterministic" || type == "table") {
    s.barriers.lower = read_process<S>(s.space, need(bj, "lower", "barriers"), "barriers.lower");
    s.barriers.upper = read_process<S>(s.space, need(bj, "upper", "barriers"), "barriers.upper");
  } else if (type == "game_option") {
    s.barriers = game_option<S>(s.space, bj);
  } else if (type == "random_pair") {
    s.barriers = random_pair<S>(s.space, bj);
  } else {
    throw ConfigError("barriers.type: unknown '" + type + "'");
  }
  if (auto why = barrier_violation(s.space, s.barriers)) throw ConfigError("barriers: " + *why);

  const auto& dj = cfg.driver;
  const std::string dtype = dj.value("type", "zero");
  if (dtype == "zero") {
    s.driver = zero_driver<S>();
    s.base = IntegrandProcess<S>::zeros(s.space);
  } else if (dtype == "process") {
    s.base = read_integrand<S>(s.space, need(dj, "values", "driver"), "driver.values");
    s.driver = process_driver<S>(s.base);
  } else if (dtype == "linear") {
    S a = json_scalar<S>(dj.value("a", json(0)), "driver.a");
    S b = json_scalar<S>(dj.value("b", json(0)), "driver.b");
    s.base = dj.contains("c") ? read_integrand<S>(s.space, dj.at("c"), "driver.c") : IntegrandProcess<S>::zeros(s.space);
    double need_k = std::max(to_double(abs_of(a)), to_double(abs_of(b)));
    std::optional<double> K;
    if (dj.contains("K")) {
      K = json_double(dj.at("K"), "driver.K");
      if (*K < need_k) throw ConfigError("driver.K: must be at least max(|a|, |b|)");
    }
    s.driver = linear_driver<S>(a, b, s.base, K);
    s.driver_depends_on_solution = a != 0 || b != 0;
  } else {
    throw ConfigError("driver.type: unknown '" + dtype + "'");
  }
  return s;
}

PicardOptions picard_options(const ScenarioConfig& cfg) {
  PicardOptions o;
  o.tol = cfg.tol;
  o.max_iter = cfg.max_iter;
  return o;
}

template <class S>
ScenarioSolution<S> solve_scenario(const Scenario<S>& sc, const ScenarioConfig& cfg) {
  ScenarioSolution<S> out;
  if (!sc.driver_depends_on_solution) {
    out.g = freeze_driver(sc.space, sc.driver, LadlagProcess<S>::zeros(sc.space), IntegrandProcess<S>::zeros(sc.space));
    out.run = solve_drbsde(sc.space, sc.barriers, out.g, picard_options(cfg));
    out.g_on_solution = out.g;
    return out;
  }
  auto gs = solve_general(sc.space, sc.driver, sc.barriers, cfg.params, cfg.outer_tol, cfg.max_outer,
                          picard_options(cfg));
  out.run = std::move(gs.run);
  out.g = std::move(gs.g_inner);
  out.g_on_solution = std::move(gs.g);
  out.outer = std::move(gs.trace);
  return out;
}

json space_to_json(const FilteredSpace& space) {
  json paths = json::array();
  for (int p = 0; p < space.n_paths; ++p) {
    json marks = json::array(), signs = json::array();
    for (int k = 0; k <= space.N; ++k)
      marks.push_back(space.alphabet[k].empty() ? std::string() : space.alphabet[k][space.mark[k][p]]);
    for (int k = 0; k < space.N; ++k) signs.push_back(space.dw_sign[k][p]);
    paths.push_back({{"path", p}, {"weight", to_string(space.weight_q[p])}, {"marks", marks}, {"dw_sign", signs}});
  }
  json instants = json::array();
  for (int k = 0; k <= space.N; ++k)
    instants.push_back({{"instant", k},
                        {"time", to_string(space.dt * k)},
                        {"sigma_minus", space.sigma_minus[k].atoms},
                        {"sigma_mid", space.sigma_mid[k].atoms}});
  return {{"N", space.N},
          {"T", to_string(space.T)},
          {"quasi_left_continuous", space.quasi_left_continuous},
          {"non_qlc_instants", space.non_qlc_instants()},
          {"paths", paths},
          {"instants", instants}};
}

std::string digest(const json& j) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

json process_table(const LadlagProcess<Rational>& x) {
  auto rows = [](const std::vector<RandomVariable<Rational>>& v) {
    json out = json::array();
    for (const auto& r : v) {
      json row = json::array();
      for (const auto& e : r) row.push_back(to_string(e));
      out.push_back(row);
    }
    return out;
  };
  return {{"minus", rows(x.minus)}, {"mid", rows(x.mid)}, {"plus", rows(x.plus)}};
}

json integrand_table(const IntegrandProcess<Rational>& z) {
  json out = json::array();
  for (const auto& r : z.z) {
    json row = json::array();
    for (const auto& e : r) row.push_back(to_string(e));
    out.push_back(row);
  }
  return out;
}

double slot_rule_count(const FilteredSpace& space) {
  std::vector<const Partition*> info;
  for (int k = 0; k <= space.N; ++k) {
    if (k > 0) info.push_back(&space.sigma_minus[k]);
    info.push_back(&space.sigma_minus[k]);
    if (k < space.N) info.push_back(&space.sigma_mid[k]);
  }
  return count_stopping_rules(info);
}

}  // namespace

json generate_scenario(std::uint64_t seed, int index) {
  std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(index));
  auto pick = [&](unsigned long n) { return static_cast<int>(rng() % n); };

  const bool qlc = pick(5) == 0;
  const bool fine = pick(4) == 0;
  json cfg;
  SpaceSpec spec;
  FilteredSpace space;
  for (int attempt = 0;; ++attempt) {
    spec = SpaceSpec{};
    spec.N = 1 + pick(3);
    spec.T = fine ? Rational(spec.N, 16) : Rational(spec.N, 4);
    spec.quasi_left_continuous = qlc;
    if (!qlc) {
      int count = 1 + pick(2);
      std::vector<int> used;
      for (int m = 0; m < count; ++m) {
        int k = pick(static_cast<unsigned long>(spec.N + 1));
        if (std::find(used.begin(), used.end(), k) != used.end()) continue;
        used.push_back(k);
        MarkSpec mk;
        mk.instant = k;
        mk.alphabet = {"u", "d"};
        static const Rational rows[][2] = {{Rational(1, 2), Rational(1, 2)},
                                           {Rational(1, 3), Rational(2, 3)},
                                           {Rational(1, 4), Rational(3, 4)}};
        int r = pick(3);
        mk.probs.push_back({rows[r][0], rows[r][1]});
        spec.marks.push_back(std::move(mk));
      }
    }
    space = build_space(spec);
    if (space.n_paths <= 16 && slot_rule_count(space) <= kEnumerationMaxRules / 4) break;
    if (attempt > 50) throw std::logic_error("corpus generator could not fit the enumeration caps");
  }

  cfg["schema"] = kSchemaVersion;
  cfg["name"] = "corpus-" + std::to_string(seed) + "-" + std::to_string(index);
  cfg["grid"] = {{"N", spec.N}, {"T", to_string(spec.T)}};
  json marks = json::array();
  for (const auto& m : spec.marks) {
    json probs = json::array();
    for (const auto& row : m.probs) {
      json r = json::array();
      for (const auto& q : row) r.push_back(to_string(q));
      probs.push_back(r);
    }
    marks.push_back({{"instant", m.instant}, {"alphabet", m.alphabet}, {"probs", probs}});
  }
  cfg["filtration"] = {{"quasi_left_continuous", qlc}, {"marks", marks}};

  const int flavor = pick(4);
  json bspec = {{"type", "random_pair"},
                {"seed", rng() % 1000000},
                {"right_continuous", flavor == 1 || flavor == 3},
                {"left_usc", flavor == 2 || flavor == 3},
                {"gap_lo", pick(2) == 0 ? -4 : 0}};
  BarrierPair<Rational> bars = random_pair<Rational>(space, bspec);
  cfg["barriers"] = {{"type", "table"},
                     {"flavor", bspec},
                     {"lower", process_table(bars.lower)},
                     {"upper", process_table(bars.upper)}};

  auto random_integrand = [&](long lo, long hi, long denom) {
    auto z = IntegrandProcess<Rational>::zeros(space);
    for (int k = 0; k < space.N; ++k)
      for (const auto& atom : space.sigma_mid[k].atoms) {
        Rational v(lo + static_cast<long>(rng() % static_cast<unsigned long>(hi - lo + 1)), denom);
        for (int p : atom) z.z[k][p] = v;
      }
    return z;
  };
  switch (pick(3)) {
    case 0:
      cfg["driver"] = {{"type", "zero"}};
      break;
    case 1:
      cfg["driver"] = {{"type", "process"}, {"values", integrand_table(random_integrand(-8, 8, 4))}};
      break;
    default: {
      static const char* coeffs[] = {"-1/64", "0", "1/64"};
      cfg["driver"] = {{"type", "linear"},
                       {"a", coeffs[pick(3)]},
                       {"b", coeffs[pick(3)]},
                       {"c", integrand_table(random_integrand(-8, 8, 4))},
                       {"K", "1/64"}};
    }
  }
  cfg["params"] = {{"beta", 5}, {"epsilon", "1/2"}, {"c", 2}, {"tol", 1e-10}, {"max_outer", 60}};
  cfg["arithmetic"] = "rational";
  cfg["seed"] = seed;
  return cfg;
}

std::vector<json> generate_corpus(std::uint64_t seed, int count) {
  std::vector<json> out;
  for (int i = 0; i < count; ++i) out.push_back(generate_scenario(seed, i));
  return out;
}

template Scenario<double> instantiate(const ScenarioConfig&);
template Scenario<Rational> instantiate(const ScenarioConfig&);
template ScenarioSolution<double> solve_scenario(const Scenario<double>&, const ScenarioConfig&);
template ScenarioSolution<Rational> solve_scenario(const Scenario<Rational>&, const ScenarioConfig&);

}  // namespace pdrbsde

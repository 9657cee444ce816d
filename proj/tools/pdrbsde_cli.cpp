#include "pdrbsde/calculus_checks.hpp"
#include "pdrbsde/enumeration.hpp"
#include "pdrbsde/scenario.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pdrbsde;

namespace {

enum Exit : int { kOk = 0, kOther = 1, kConfig = 2, kDivergence = 3, kVerification = 4, kOracle = 5 };

const std::vector<std::string> kModes = {"solve", "verify", "oracle", "estimate", "formula-check",
                                         "certificate", "corpus", "space"};

struct Options {
  std::string mode = "solve";
  std::string config;
  std::string out = "pdrbsde_out";
  std::optional<std::uint64_t> seed;
  std::string arithmetic;
  std::optional<double> tol;
  std::optional<long> max_iter;
  std::optional<int> count;
};

class Stopwatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Job {
  Job(const Options& o, fs::path config, fs::path dir) : opt(o), config_path(std::move(config)), out(std::move(dir)) {}

  const Options& opt;
  fs::path config_path;
  fs::path out;
  json raw;
  ScenarioConfig cfg;
  json report;
  json timings = json::object();
  int code = kOk;
  std::string summary;

  void fail(int c, const std::string& why) {
    report["failures"].push_back(why);
    code = std::max(code, c);
  }
};

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void apply_overrides(json& j, const Options& opt) {
  if (!j.is_object()) return;
  if (opt.seed) j["seed"] = *opt.seed;
  if (!opt.arithmetic.empty()) j["arithmetic"] = opt.arithmetic;
  if (opt.tol) j["params"]["tol"] = *opt.tol;
  if (opt.max_iter) j["params"]["max_iter"] = *opt.max_iter;
}

template <class P>
void write_process(const fs::path& path, const P& x) {
  std::ofstream os(path);
  write_csv(os, x);
}

template <class S>
double verification_tol(const ScenarioConfig& cfg) {
  return is_exact_v<S> ? 0.0 : std::max(cfg.tol, 1e-10);
}

double outer_tol(const ScenarioConfig& cfg) { return std::max(cfg.tol, 1e-10); }

template <class S>
json atom_values(const std::vector<RandomVariable<S>>& slot, int k, const Partition& P) {
  json out = json::array();
  for (const auto& atom : P.atoms) out.push_back({{"paths", atom}, {"value", to_string(slot[k][atom.front()])}});
  return out;
}

json picard_json(const PicardTrace& t) {
  return {{"iterations", t.iterations},
          {"converged", t.converged},
          {"monotonicity_violations", t.monotonicity_violations},
          {"fixed_point_residual", t.fixed_point_residual},
          {"final_delta", t.delta.empty() ? 0.0 : t.delta.back()}};
}

void write_picard_trace(const fs::path& path, const PicardTrace& t) {
  std::ofstream os(path);
  os << "iteration,delta,norm_J,norm_Jbar\n";
  for (std::size_t i = 0; i < t.delta.size(); ++i)
    os << i + 1 << ',' << to_string(t.delta[i]) << ',' << to_string(t.norm_J[i]) << ','
       << to_string(t.norm_Jbar[i]) << '\n';
}

json outer_json(const OuterTrace& t) {
  json steps = json::array();
  for (const auto& s : t.steps)
    steps.push_back({{"step", s.index}, {"dU", s.dU}, {"dV", s.dV}, {"combined", s.combined}, {"ratio", s.ratio},
                     {"inner_iterations", s.inner_iterations}});
  return {{"converged", t.converged}, {"max_ratio", t.max_ratio}, {"steps", steps}};
}

void write_outer_trace(const fs::path& path, const OuterTrace& t) {
  std::ofstream os(path);
  os << "step,dU,dV,combined,ratio,inner_iterations\n";
  for (const auto& s : t.steps)
    os << s.index << ',' << to_string(s.dU) << ',' << to_string(s.dV) << ',' << to_string(s.combined) << ','
       << to_string(s.ratio) << ',' << s.inner_iterations << '\n';
}

template <class S>
ScenarioSolution<S> solve_timed(Job& job, const Scenario<S>& sc) {
  Stopwatch w;
  auto sol = solve_scenario(sc, job.cfg);
  job.timings["solve"] = w.ms();
  return sol;
}

template <class S>
void write_solution(const fs::path& dir, const Scenario<S>& sc, const ScenarioSolution<S>& sol) {
  const auto& s = sol.run.solution;
  write_process(dir / "Y.csv", s.Y);
  write_process(dir / "Z.csv", s.Z);
  write_process(dir / "M.csv", s.M);
  write_process(dir / "A.csv", s.A);
  write_process(dir / "B.csv", s.B);
  write_process(dir / "A2.csv", s.A2);
  write_process(dir / "B2.csv", s.B2);
  write_process(dir / "g.csv", sol.g);
  write_process(dir / "lower.csv", sc.barriers.lower);
  write_process(dir / "upper.csv", sc.barriers.upper);
  write_picard_trace(dir / "picard_trace.csv", sol.run.picard.trace);
  if (sol.outer) write_outer_trace(dir / "outer_trace.csv", *sol.outer);
}

template <class S>
json solution_json(const FilteredSpace& space, const SolutionSeptuple<S>& s, const ContractionParams& p) {
  json norms = {{"Y_s2p", beta_norm_s2p(space, s.Y, p.beta)},
                {"Z_h2", beta_norm_h2(space, s.Z, p.beta)},
                {"M_m2", beta_norm_m2(space, s.M, p.beta)},
                {"A_sup", sup_norm(s.A)},
                {"B_sup", sup_norm(s.B)},
                {"A2_sup", sup_norm(s.A2)},
                {"B2_sup", sup_norm(s.B2)}};
  return {{"Y0", atom_values(s.Y.mid, 0, space.sigma_minus[0])},
          {"Y0_plus", atom_values(s.Y.plus, 0, space.sigma_mid[0])},
          {"norms", norms}};
}

template <class S>
std::string y0_text(const LadlagProcess<S>& Y, const FilteredSpace& space) {
  std::string out;
  for (const auto& atom : space.sigma_minus[0].atoms) {
    if (!out.empty()) out += ", ";
    out += to_string(Y.mid[0][atom.front()]);
  }
  return out;
}

template <class S>
void mode_solve(Job& job, const Scenario<S>& sc) {
  auto sol = solve_timed(job, sc);
  const auto& space = sc.space;
  const auto& s = sol.run.solution;
  write_solution(job.out, sc, sol);
  job.report["solution"] = solution_json(space, s, job.cfg.params);
  job.report["picard"] = picard_json(sol.run.picard.trace);
  if (sol.outer) job.report["outer"] = outer_json(*sol.outer);
  Stopwatch w;
  auto rep = verify_drbsde_solution(space, sol.g, sc.barriers, s, verification_tol<S>(job.cfg));
  job.report["verification"] = rep.to_json();
  for (const auto& f : rep.failures()) job.fail(kVerification, "verification: " + f);
  if (sol.outer) {
    auto on = verify_drbsde_solution(space, sol.g_on_solution, sc.barriers, s, outer_tol(job.cfg));
    job.report["verification_on_solution"] = on.to_json();
    for (const auto& f : on.failures()) job.fail(kVerification, "verification on solution: " + f);
  }
  job.timings["verify"] = w.ms();
  job.summary = "Y0 = " + y0_text(s.Y, space);
}

template <class S>
LadlagProcess<S> read_dump(const fs::path& path, const FilteredSpace& space, Kind kind) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dumped solution " + path.string());
  return read_csv<S>(in, space, kind);
}

template <class S>
void mode_verify(Job& job, const Scenario<S>& sc) {
  const auto& space = sc.space;
  SolutionSeptuple<S> s;
  s.Y = read_dump<S>(job.out / "Y.csv", space, Kind::Predictable);
  {
    std::ifstream in(job.out / "Z.csv");
    if (!in) throw std::runtime_error("cannot open dumped solution " + (job.out / "Z.csv").string());
    s.Z = read_integrand_csv<S>(in, space);
  }
  s.M = read_dump<S>(job.out / "M.csv", space, Kind::CadlagMartingale);
  s.A = read_dump<S>(job.out / "A.csv", space, Kind::FiniteVariation);
  s.B = read_dump<S>(job.out / "B.csv", space, Kind::PurelyDiscontinuous);
  s.A2 = read_dump<S>(job.out / "A2.csv", space, Kind::FiniteVariation);
  s.B2 = read_dump<S>(job.out / "B2.csv", space, Kind::PurelyDiscontinuous);
  auto g = sc.driver_depends_on_solution ? freeze_driver(space, sc.driver, s.Y, s.Z) : sc.base;
  double tol = sc.driver_depends_on_solution ? outer_tol(job.cfg) : verification_tol<S>(job.cfg);
  Stopwatch w;
  auto rep = verify_drbsde_solution(space, g, sc.barriers, s, tol);
  job.timings["verify"] = w.ms();
  job.report["verification"] = rep.to_json();
  job.report["tolerance"] = tol;
  job.report["solution"] = solution_json(space, s, job.cfg.params);
  for (const auto& f : rep.failures()) job.fail(kVerification, "verification: " + f);
  job.summary = rep.all_pass() ? "dumped solution verified" : "dumped solution rejected";
}

template <class S>
void mode_oracle(Job& job, const Scenario<S>& sc) {
  const auto& space = sc.space;
  if (space.n_paths > kEnumerationMaxPaths)
    throw ConfigError("oracle: the space has " + std::to_string(space.n_paths) + " paths, at most " +
                      std::to_string(kEnumerationMaxPaths) + " are enumerable");
  const double tol = is_exact_v<S> ? 0.0 : 1e-9;
  json checks = json::array();
  auto compare = [&](const std::string& what, const LadlagProcess<S>& a, const LadlagProcess<S>& b) {
    double d = sup_distance(a, b);
    bool ok = d <= tol;
    checks.push_back({{"check", what}, {"sup_distance", d}, {"pass", ok}});
    if (!ok) job.fail(kOracle, what + " differs by " + to_string(d));
  };
  Stopwatch w;
  try {
    compare("pre_operator vs snell_bruteforce (lower)", pre_operator(space, sc.barriers.lower).Y,
            snell_bruteforce(space, sc.barriers.lower));
    auto neg = -sc.barriers.upper;
    compare("pre_operator vs snell_bruteforce (-upper)", pre_operator(space, neg).Y, snell_bruteforce(space, neg));
  } catch (const EnumerationTooLarge& e) {
    throw ConfigError(std::string("oracle: ") + e.what());
  }
  job.timings["enumeration"] = w.ms();
  auto sol = solve_timed(job, sc);
  compare("solver vs hand recursion", sol.run.solution.Y, hand_recursion(space, sc.barriers, sol.g));
  job.report["checks"] = checks;
  job.report["solution"] = solution_json(space, sol.run.solution, job.cfg.params);
  job.summary = job.code == kOk ? "solver and enumeration agree" : "oracle mismatch";
}

template <class S>
void mode_estimate(Job& job, const Scenario<S>& sc) {
  const auto& p = job.cfg.params;
  if (p.beta <= 1.0 / (p.epsilon * p.epsilon)) throw ConfigError("params: estimate needs beta > 1/epsilon^2");
  const auto& space = sc.space;
  auto sol = solve_timed(job, sc);
  const int count = job.opt.count.value_or(20);
  std::mt19937_64 rng(job.cfg.seed * 7919 + 1);
  std::ofstream csv(job.out / "estimate.csv");
  csv << "trial,lhs,rhs,margin,holds,y_norm,rhs_l11,ratio_l11,empirical_c\n";
  json trials = json::array();
  int held = 0, diverged = 0;
  double tightest = 1e300, worst_c = 0;
  Stopwatch w;
  for (int t = 0; t < count; ++t) {
    auto delta = IntegrandProcess<S>::zeros(space);
    for (int k = 0; k < space.N; ++k)
      for (const auto& atom : space.sigma_mid[k].atoms) {
        S v = from_rational<S>(Rational(static_cast<long>(rng() % 17) - 8, 16));
        for (int q : atom) delta.z[k][q] = v;
      }
    auto gbar = sol.g + delta;
    DrbsdeRun<S> other;
    try {
      other = solve_drbsde(space, sc.barriers, gbar, picard_options(job.cfg));
    } catch (const Divergence&) {
      ++diverged;
      continue;
    }
    auto r = apriori_estimate_check(space, sol.run.solution, other.solution, sol.g, gbar, p);
    csv << t << ',' << to_string(r.lhs_l1) << ',' << to_string(r.rhs_l1) << ',' << to_string(r.margin_l1) << ','
        << (r.l1_holds ? 1 : 0) << ',' << to_string(r.y_norm) << ',' << to_string(r.rhs_l11) << ','
        << to_string(r.ratio_l11) << ',' << to_string(r.empirical_c) << '\n';
    auto j = r.to_json();
    j["trial"] = t;
    trials.push_back(j);
    if (r.l1_holds) ++held;
    else job.fail(kVerification, "trial " + std::to_string(t) + ": first estimate violated");
    if (r.rhs_l1 > 0) tightest = std::min(tightest, r.margin_l1 / r.rhs_l1);
    worst_c = std::max(worst_c, r.empirical_c);
  }
  job.timings["sweep"] = w.ms();
  job.report["trials"] = trials;
  job.report["summary"] = {{"count", count},
                           {"held", held},
                           {"diverged", diverged},
                           {"smallest_relative_margin", tightest == 1e300 ? 0.0 : tightest},
                           {"largest_empirical_c", worst_c}};
  job.summary = std::to_string(held) + "/" + std::to_string(count - diverged) + " perturbations satisfy the estimate";
}

template <class S>
void mode_formula_check(Job& job, const Scenario<S>& sc) {
  const auto& space = sc.space;
  const int count = job.opt.count.value_or(200);
  const double tol = is_exact_v<S> ? 0.0 : 1e-9;
  std::mt19937_64 rng(job.cfg.seed);
  std::ofstream csv(job.out / "formula_check.csv");
  csv << "trial,components,degree,max_deviation\n";
  int passed = 0;
  double worst = 0;
  Stopwatch w;
  for (int t = 0; t < count; ++t) {
    int n = 1 + static_cast<int>(rng() % 3);
    std::vector<OptionalSemimartingale<S>> X;
    for (int i = 0; i < n; ++i) X.push_back(OptionalSemimartingale<S>::random(space, rng));
    auto F = Polynomial::random(n, 4, rng);
    auto r = galchouk_lenglart_check(space, X, F);
    csv << t << ',' << n << ',' << F.degree() << ',' << to_string(r.max_deviation) << '\n';
    worst = std::max(worst, r.max_deviation);
    if (r.max_deviation <= tol) ++passed;
    else job.fail(kVerification, "trial " + std::to_string(t) + " F = " + F.to_string() + " deviates");
  }
  job.timings["trials"] = w.ms();
  auto sol = solve_timed(job, sc);
  auto y = OptionalSemimartingale<S>::from_process(space, sol.run.solution.Y);
  auto cor = corollary_expansion(space, y, job.cfg.params.beta);
  if (cor.max_deviation > tol) job.fail(kVerification, "weighted square expansion of Y deviates");
  job.report["trials"] = {{"count", count}, {"passed", passed}, {"max_deviation", worst}};
  job.report["weighted_square_of_Y"] = cor.summary();
  job.summary = std::to_string(passed) + "/" + std::to_string(count) + " identity trials exact";
}

template <class S>
void mode_certificate(Job& job, const Scenario<S>& sc) {
  const auto& space = sc.space;
  const double tol = verification_tol<S>(job.cfg);
  auto sol = solve_timed(job, sc);
  Stopwatch w;
  auto cert = mokobodzki_certificate(space, sc.barriers, sol.g, picard_options(job.cfg));
  if (!cert) {
    job.fail(kDivergence, "no certificate: the coupled scheme diverges");
    return;
  }
  write_process(job.out / "H.csv", cert->H);
  write_process(job.out / "Hbar.csv", cert->Hbar);
  auto rep = check_certificate(space, sc.barriers, *cert, tol);
  job.report["certificate"] = rep.to_json();
  for (const auto& f : rep.failures()) job.fail(kVerification, "certificate: " + f);
  const auto& run = sol.run;
  double gap = sup_distance(cert->H - cert->Hbar, run.solution.Y);
  job.report["sup_distance_H_minus_Hbar_to_Y"] = gap;
  if (gap > tol) job.fail(kVerification, "H - Hbar differs from Y by " + to_string(gap));
  auto base = reflector_pair(space, run.solution);
  std::mt19937_64 rng(job.cfg.seed * 104729 + 3);
  const int count = job.opt.count.value_or(10);
  int minimal = 0;
  for (int t = 0; t < count; ++t) {
    auto dom = random_dominating_pair(space, base, rng);
    auto m = minimality_check(space, run.picard.J, run.picard.Jbar, dom, run.shifted, tol);
    if (m.precondition_ok && m.pass) ++minimal;
    else job.fail(kVerification, "minimality: " + m.message);
  }
  job.timings["certificate"] = w.ms();
  job.report["minimality"] = {{"dominating_pairs", count}, {"passed", minimal}};
  job.summary = "certificate " + std::string(rep.all_pass() ? "valid" : "invalid") + ", " + std::to_string(minimal) +
                "/" + std::to_string(count) + " dominating pairs above (J, Jbar)";
}

template <class S>
void dispatch(Job& job) {
  Stopwatch w;
  auto sc = instantiate<S>(job.cfg);
  job.timings["instantiate"] = w.ms();
  job.report["paths"] = sc.space.n_paths;
  job.report["non_qlc_instants"] = sc.space.non_qlc_instants();
  const auto& m = job.opt.mode;
  if (m == "solve") mode_solve(job, sc);
  else if (m == "verify") mode_verify(job, sc);
  else if (m == "oracle") mode_oracle(job, sc);
  else if (m == "estimate") mode_estimate(job, sc);
  else if (m == "formula-check") mode_formula_check(job, sc);
  else if (m == "certificate") mode_certificate(job, sc);
  else if (m == "space") {
    std::ofstream(job.out / "space.json") << space_to_json(sc.space).dump(2) << '\n';
    job.summary = std::to_string(sc.space.n_paths) + " paths";
  }
}

void run_job(Job& job) {
  Stopwatch total;
  job.report = {{"mode", job.opt.mode}, {"config", job.config_path.string()}, {"failures", json::array()}};
  try {
    job.raw = read_json(job.config_path);
    apply_overrides(job.raw, job.opt);
    job.report["digest"] = digest(job.raw);
    job.cfg = parse_config(job.raw);
    job.report["name"] = job.cfg.name;
    job.report["arithmetic"] = job.cfg.arithmetic == Arithmetic::Rational ? "rational" : "float";
    job.report["seed"] = job.cfg.seed;
    fs::create_directories(job.out);
    if (job.cfg.arithmetic == Arithmetic::Rational) dispatch<Rational>(job);
    else dispatch<double>(job);
  } catch (const ConfigError& e) {
    job.fail(kConfig, std::string("config: ") + e.what());
  } catch (const Divergence& e) {
    job.fail(kDivergence, std::string("divergence: ") + e.what());
  } catch (const NonContraction& e) {
    job.fail(kDivergence, std::string("outer iteration: ") + e.what());
  } catch (const std::exception& e) {
    job.fail(kOther, std::string("error: ") + e.what());
  }
  job.timings["total"] = total.ms();
  job.report["exit_code"] = job.code;
  job.report["timings_ms"] = job.timings;
  if (fs::exists(job.out)) std::ofstream(job.out / ("report_" + job.opt.mode + ".json")) << job.report.dump(2) << '\n';
}

int thread_cap() {
  if (const char* env = std::getenv("PDRBSDE_THREADS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int run_corpus(const Options& opt) {
  const int count = opt.count.value_or(50);
  const auto seed = opt.seed.value_or(0);
  fs::create_directories(opt.out);
  for (const auto& j : generate_corpus(seed, count)) {
    auto name = j.at("name").get<std::string>();
    std::ofstream(fs::path(opt.out) / (name + ".json")) << j.dump(2) << '\n';
  }
  std::cout << "wrote " << count << " scenarios to " << opt.out << '\n';
  return kOk;
}

int run(const Options& opt) {
  if (opt.mode == "corpus") return run_corpus(opt);
  if (opt.config.empty()) {
    std::cerr << "--config is required for mode " << opt.mode << '\n';
    return kConfig;
  }
  const fs::path config(opt.config);
  std::vector<std::unique_ptr<Job>> jobs;
  if (fs::is_directory(config)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(config))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files)
      jobs.push_back(std::make_unique<Job>(opt, f, fs::path(opt.out) / f.stem()));
  } else {
    jobs.push_back(std::make_unique<Job>(opt, config, fs::path(opt.out)));
  }
  if (jobs.empty()) {
    std::cerr << "no .json scenarios in " << config << '\n';
    return kConfig;
  }
  std::mutex print;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      auto& job = *jobs[i];
      run_job(job);
      std::lock_guard lock(print);
      std::string name = job.report.value("name", job.config_path.stem().string());
      if (job.code == kOk) {
        std::cout << name << ": " << opt.mode << " ok";
        if (!job.summary.empty()) std::cout << ", " << job.summary;
        std::cout << '\n';
      } else {
        std::cout << name << ": " << opt.mode << " failed with exit code " << job.code;
        if (!job.summary.empty()) std::cout << ", " << job.summary;
        std::cout << '\n';
        for (const auto& f : job.report["failures"]) std::cerr << "  " << f.get<std::string>() << '\n';
      }
    }
  };
  const int n = std::min<int>(thread_cap(), static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  int code = kOk;
  for (const auto& j : jobs) code = std::max(code, j->code);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete doubly reflected BSDE solver and checks"};
  Options opt;
  app.add_option("--mode", opt.mode, "What to run")->check(CLI::IsMember(kModes));
  app.add_option("--config", opt.config, "Scenario JSON file, or a directory of them");
  app.add_option("--out", opt.out, "Output directory");
  app.add_option("--seed", opt.seed, "Overrides the scenario seed; corpus family seed");
  app.add_option("--arithmetic", opt.arithmetic, "Overrides the scenario arithmetic")
      ->check(CLI::IsMember({"rational", "float"}));
  app.add_option("--tol", opt.tol, "Float Picard tolerance");
  app.add_option("--max-iter", opt.max_iter, "Picard iteration cap");
  app.add_option("--count", opt.count, "Trials, perturbations, dominating pairs or corpus size");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }
  try {
    return run(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
}

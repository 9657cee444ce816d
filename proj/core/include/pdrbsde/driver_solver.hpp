#pragma once

#include "pdrbsde/drbsde.hpp"

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace pdrbsde {

// g(t_k, y, z) on a path; the evaluator must be sigma_mid[k]-measurable in the path argument.
template <class S>
struct LipschitzDriver {
  std::function<S(int k, int path, const S& y, const S& z)> eval;
  double K = 0;
  std::string name = "custom";
};

template <class S>
LipschitzDriver<S> zero_driver();

// Driver independent of (y, z).
template <class S>
LipschitzDriver<S> process_driver(IntegrandProcess<S> c);

// a*y + b*z + c_k; K defaults to max(|a|, |b|).
template <class S>
LipschitzDriver<S> linear_driver(const S& a, const S& b, IntegrandProcess<S> c, std::optional<double> K = {});

struct LipschitzProbe {
  bool pass = true;
  double worst_ratio = 0;  // max |g1 - g2| / (|y1 - y2| + |z1 - z2|)
  long probes = 0;
};

// 32 random (y, z) pairs per instant by default.
template <class S>
LipschitzProbe check_lipschitz(const FilteredSpace& space, const LipschitzDriver<S>& driver, std::mt19937_64& rng,
                               int probes_per_instant = 32);

struct ContractionParams {
  double beta = 5.0;
  double epsilon = 0.5;
  double c = 2.0;
};

// 2K(1+T) eps^2 (3 + 16 c^2)
double contraction_modulus(const ContractionParams& p, double K, double T);
std::optional<std::string> contraction_violation(const ContractionParams& p, double K, double T);

// E sum_{k<N} e^{beta t_k} phi_k^2 dt
template <class S>
double beta_norm_h2(const FilteredSpace& space, const IntegrandProcess<S>& phi, double beta);
// E max_k e^{beta t_k} mid_k^2
template <class S>
double beta_norm_s2p(const FilteredSpace& space, const LadlagProcess<S>& x, double beta);
// E sum e^{beta t} (increment)^2, instant jumps at t_k and interval increments at t_{k+1}
template <class S>
double beta_norm_m2(const FilteredSpace& space, const LadlagProcess<S>& m, double beta);

// g_k = driver(t_k, U.plus_k, V_k) for k < N.
template <class S>
IntegrandProcess<S> freeze_driver(const FilteredSpace& space, const LipschitzDriver<S>& driver,
                                  const LadlagProcess<S>& U, const IntegrandProcess<S>& V);

struct OuterStep {
  int index = 0;
  double dU = 0;  // squared s2p beta-norm of U^{m+1} - U^m
  double dV = 0;  // squared h2 beta-norm of V^{m+1} - V^m
  double combined = 0;
  double ratio = 0;  // sqrt(combined_m / combined_{m-1}); 0 on the first step
  long inner_iterations = 0;
};

struct OuterTrace {
  std::vector<OuterStep> steps;
  bool converged = false;
  double max_ratio = 0;
};

class NonContraction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class S>
struct GeneralSolution {
  DrbsdeRun<S> run;           // last inner solve
  IntegrandProcess<S> g_inner;  // driver used by the last inner solve
  IntegrandProcess<S> g;      // driver frozen on the returned solution
  OuterTrace trace;
};

// Banach iteration (U, V) -> (Y, Z) of the frozen-driver problem, from (0, 0).
// Stops when dU + dV <= tol^2. Throws Divergence or NonContraction.
template <class S>
GeneralSolution<S> solve_general(const FilteredSpace& space, const LipschitzDriver<S>& driver,
                                 const BarrierPair<S>& b, const ContractionParams& params, double tol,
                                 int max_outer, const PicardOptions& inner = {});

}  // namespace pdrbsde

#pragma once

#include "pdrbsde/drbsde.hpp"
#include "pdrbsde/driver_solver.hpp"

#include <nlohmann/json.hpp>

#include <random>
#include <string>
#include <vector>

namespace pdrbsde {

// Polynomial in n variables with rational coefficients.
struct Polynomial {
  struct Term {
    Rational coeff;
    std::vector<int> exps;
  };
  int n = 0;
  std::vector<Term> terms;

  template <class S>
  S eval(const std::vector<S>& x) const;
  Polynomial derivative(int i) const;
  int degree() const;
  std::string to_string() const;

  static Polynomial random(int n, int max_degree, std::mt19937_64& rng);
};

// X = X_0 + M + A + B on the slot grid.
//   interval k:    X_{(k+1)-} - X_{k+} = mI_k + aI_k
//   instant k:     X_k - X_{k-}        = mL_k + aL_k    (k >= 1)
//   right jump k:  X_{k+} - X_k        = bR_k
template <class S>
struct OptionalSemimartingale {
  RandomVariable<S> X0;
  std::vector<RandomVariable<S>> aI, mI, bR;  // k < N
  std::vector<RandomVariable<S>> aL, mL;      // k = 0..N, entries at 0 are zero

  static OptionalSemimartingale zeros(const FilteredSpace& space);
  // Interval increments split into E[. | sigma_mid] (A) and the rest (M); left jumps go to A, right jumps to B.
  static OptionalSemimartingale from_process(const FilteredSpace& space, const LadlagProcess<S>& x);
  // Deterministic path w_k = e^{beta t_k}, carried by A over intervals.
  static OptionalSemimartingale exponential_weight(const FilteredSpace& space, double beta);
  static OptionalSemimartingale random(const FilteredSpace& space, std::mt19937_64& rng);

  LadlagProcess<S> to_process(const FilteredSpace& space) const;
  // Martingale increments have zero conditional mean and X_0 is deterministic.
  bool well_formed(const FilteredSpace& space, double tol = 0.0) const;
};

template <class S>
struct GalchoukLenglartResult {
  LadlagProcess<S> lhs;  // F(X) - F(X_0)
  LadlagProcess<S> rhs;  // running sum of the right-hand side terms
  std::vector<LadlagProcess<S>> a_integral;  // per component, int D_i F(X_-) dA^i
  std::vector<LadlagProcess<S>> m_integral;  // per component, int D_i F(X_-) dM^i
  std::vector<LadlagProcess<S>> b_integral;  // per component, int D_i F(X) dB^i_+
  LadlagProcess<S> bracket;                  // continuous bracket term, identically zero
  LadlagProcess<S> left_jumps;
  LadlagProcess<S> right_jumps;
  double max_deviation = 0;
};

template <class S>
GalchoukLenglartResult<S> galchouk_lenglart_check(const FilteredSpace& space,
                                                  const std::vector<OptionalSemimartingale<S>>& X,
                                                  const Polynomial& F);

template <class S>
struct CorollaryTerms {
  LadlagProcess<S> lhs;  // e^{beta t} Y_t^2 - Y_0^2
  LadlagProcess<S> drift;
  LadlagProcess<S> a_integral;
  LadlagProcess<S> bracket;
  LadlagProcess<S> bm_integral;
  LadlagProcess<S> left_jump_sum;
  LadlagProcess<S> right_jump_sum;
  double max_deviation = 0;

  nlohmann::json summary() const;
};

template <class S>
CorollaryTerms<S> corollary_expansion(const FilteredSpace& space, const OptionalSemimartingale<S>& Y, double beta);

struct AprioriReport {
  double lhs_l1 = 0;  // |Z - Z'|^2 + |M - M'|^2
  double rhs_l1 = 0;  // eps^2 |g - g'|^2
  double margin_l1 = 0;
  bool l1_holds = true;
  double y_norm = 0;   // S2p beta-norm of Y - Y'
  double rhs_l11 = 0;  // 2 eps^2 (1 + 8 c^2) |g - g'|^2
  double ratio_l11 = 0;
  double empirical_c = 0;  // smallest c for which the second bound holds
  bool identical = false;  // Y, Z, M equal cellwise

  nlohmann::json to_json() const;
};

template <class S>
AprioriReport apriori_estimate_check(const FilteredSpace& space, const SolutionSeptuple<S>& s,
                                     const SolutionSeptuple<S>& sbar, const IntegrandProcess<S>& g,
                                     const IntegrandProcess<S>& gbar, const ContractionParams& params);

}  // namespace pdrbsde

#pragma once

#include "pdrbsde/processes.hpp"
#include "pdrbsde/report.hpp"

#include <stdexcept>

namespace pdrbsde {

template <class S>
struct RbsdeQuintuple {
  LadlagProcess<S> Y;
  IntegrandProcess<S> Z;
  LadlagProcess<S> M;
  LadlagProcess<S> A;
  LadlagProcess<S> B;
};

// Smallest predictable strong supermartingale dominating xi, slot by slot:
//   mid_N = xi_N
//   minus_k = max(xi.minus_k, mid_k)
//   plus_k = max(xi.plus_k, E[minus_{k+1} | sigma_mid_k])
//   mid_k = max(xi.mid_k, E[plus_k | sigma_minus_k])
// and minus_0 = mid_0.
template <class S>
LadlagProcess<S> pre_value(const FilteredSpace& space, const LadlagProcess<S>& xi);

template <class S>
RbsdeQuintuple<S> pre_operator(const FilteredSpace& space, const LadlagProcess<S>& xi);

// Maximum over every stopping rule of E[xi_tau | info], the decision stages being
// mid_0, plus_0, minus_1, mid_1, plus_1, ..., minus_N, mid_N.
template <class S>
LadlagProcess<S> snell_bruteforce(const FilteredSpace& space, const LadlagProcess<S>& xi);

class NotSupermartingale : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <class S>
struct MertensParts {
  LadlagProcess<S> N;  // martingale with N_{0-} = V_0
  LadlagProcess<S> A;
  LadlagProcess<S> B;
};

// V_k = N_{k-} - A_k - B_{k-}, V_{k-} = N_{k-} - A_{k-} - B_{k-}, V_{k+} = N_k - A_k - B_k.
template <class S>
MertensParts<S> mertens_decompose(const FilteredSpace& space, const LadlagProcess<S>& V, double tol = 0.0);

// Right-hand side of the backward equation evaluated at every slot:
// xi_N + sum g dt - sum z dW - (M_{T-} - M_.) + (A_T - A_.) - (A'_T - A'_.) + (B_{T-} - B_.) - (B'_{T-} - B'_.)
// with the slot conventions of the left limit, value and right limit.
template <class S>
LadlagProcess<S> equation_rhs(const FilteredSpace& space, const RandomVariable<S>& terminal,
                              const IntegrandProcess<S>& g, const IntegrandProcess<S>& Z,
                              const LadlagProcess<S>& M, const LadlagProcess<S>& A,
                              const LadlagProcess<S>& A2, const LadlagProcess<S>& B,
                              const LadlagProcess<S>& B2);

template <class S>
VerificationReport verify_rbsde_solution(const FilteredSpace& space, const LadlagProcess<S>& xi,
                                         const RbsdeQuintuple<S>& q, double tol = 0.0);

}  // namespace pdrbsde

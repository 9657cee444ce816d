#pragma once

#include "pdrbsde/processes.hpp"
#include "pdrbsde/report.hpp"
#include "pdrbsde/snell.hpp"

#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdrbsde {

template <class S>
struct BarrierPair {
  LadlagProcess<S> lower;  // xi
  LadlagProcess<S> upper;  // zeta
};

// First admissibility violation (class, ordering, terminal equality), naming the cell.
template <class S>
std::optional<std::string> barrier_violation(const FilteredSpace& space, const BarrierPair<S>& b);

template <class S>
struct SolutionSeptuple {
  LadlagProcess<S> Y;
  IntegrandProcess<S> Z;
  LadlagProcess<S> M;
  LadlagProcess<S> A;
  LadlagProcess<S> B;
  LadlagProcess<S> A2;  // A'
  LadlagProcess<S> B2;  // B'
};

// Psi = E[xi_N + sum_{j>=k} g_j dt | F_{t-}] at every slot: sigma_minus at minus and mid, sigma_mid at plus.
template <class S>
LadlagProcess<S> conditional_tail(const FilteredSpace& space, const RandomVariable<S>& terminal,
                                  const IntegrandProcess<S>& g);

template <class S>
struct ShiftedBarriers {
  LadlagProcess<S> lower;  // xi - Psi
  LadlagProcess<S> upper;  // zeta - Psi
  LadlagProcess<S> psi;
};

template <class S>
ShiftedBarriers<S> shift_barriers(const FilteredSpace& space, const BarrierPair<S>& b,
                                  const IntegrandProcess<S>& g);

struct PicardOptions {
  double tol = 1e-10;      // float mode; rational mode waits for exact stabilization
  long max_iter = 0;       // 0 selects 10 * N * paths
  double blowup = 1e9;
  bool gauss_seidel = false;
};

struct PicardTrace {
  std::vector<double> delta;
  std::vector<double> norm_J;
  std::vector<double> norm_Jbar;
  long iterations = 0;
  bool converged = false;
  bool diverged = false;
  long monotonicity_violations = 0;
  double fixed_point_residual = 0;
};

template <class S>
struct PicardResult {
  LadlagProcess<S> J;
  LadlagProcess<S> Jbar;
  PicardTrace trace;
};

class Divergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFixedPoint : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// (J + x) with the terminal value forced to 0.
template <class S>
LadlagProcess<S> truncated_sum(const LadlagProcess<S>& a, const LadlagProcess<S>& b);

// J^{n+1} = Pre[(Jbar^n + lower) 1_{[0,T)}], Jbar^{n+1} = Pre[(J^n - upper) 1_{[0,T)}], from 0.
template <class S>
PicardResult<S> picard_coupled(const FilteredSpace& space, const ShiftedBarriers<S>& shifted,
                               const PicardOptions& opts = {});

template <class S>
double fixed_point_residual(const FilteredSpace& space, const LadlagProcess<S>& J, const LadlagProcess<S>& Jbar,
                            const ShiftedBarriers<S>& shifted);

template <class S>
SolutionSeptuple<S> assemble_solution(const FilteredSpace& space, const LadlagProcess<S>& J,
                                      const LadlagProcess<S>& Jbar, const IntegrandProcess<S>& g,
                                      const BarrierPair<S>& b, double tol = 0.0);

template <class S>
VerificationReport verify_drbsde_solution(const FilteredSpace& space, const IntegrandProcess<S>& g,
                                          const BarrierPair<S>& b, const SolutionSeptuple<S>& s,
                                          double tol = 0.0);

struct Singularity {
  bool singular = true;
  double overlap = 0;                // worst min(dP, dQ) over cells
  std::vector<std::string> witness;  // cells where P increases
};

// Cells are instant jumps and interval increments on every path.
template <class S>
Singularity mutually_singular(const LadlagProcess<S>& P, const LadlagProcess<S>& Q, double tol = 0.0);

template <class S>
struct CertificatePair {
  LadlagProcess<S> H;
  LadlagProcess<S> Hbar;
};

// H = E[xi_N^+ + sum g^+ dt + A_T - A_. + B_{T-} - B_. | F_{.-}] slotwise; Hbar from xi_N^-, g^-, A', B'.
template <class S>
CertificatePair<S> certificate_from_solution(const FilteredSpace& space, const IntegrandProcess<S>& g,
                                             const BarrierPair<S>& b, const SolutionSeptuple<S>& s);

// The same construction without the terminal and driver terms; its difference is J - Jbar.
template <class S>
CertificatePair<S> reflector_pair(const FilteredSpace& space, const SolutionSeptuple<S>& s);

template <class S>
VerificationReport check_certificate(const FilteredSpace& space, const BarrierPair<S>& b,
                                     const CertificatePair<S>& c, double tol = 0.0);

struct MinimalityResult {
  bool precondition_ok = true;
  bool pass = true;
  std::string message;
};

template <class S>
MinimalityResult minimality_check(const FilteredSpace& space, const LadlagProcess<S>& J,
                                  const LadlagProcess<S>& Jbar, const CertificatePair<S>& c,
                                  const ShiftedBarriers<S>& shifted, double tol = 0.0);

// (H + R, Hbar + R) with R = Pre[random nonnegative process].
template <class S>
CertificatePair<S> random_dominating_pair(const FilteredSpace& space, const CertificatePair<S>& base,
                                          std::mt19937_64& rng);

// Direct backward recursion clamping between the barriers at every slot.
template <class S>
LadlagProcess<S> hand_recursion(const FilteredSpace& space, const BarrierPair<S>& b,
                                const IntegrandProcess<S>& g);

template <class S>
struct DrbsdeRun {
  ShiftedBarriers<S> shifted;
  PicardResult<S> picard;
  SolutionSeptuple<S> solution;
};

// shift_barriers, picard_coupled, assemble_solution. Throws Divergence.
template <class S>
DrbsdeRun<S> solve_drbsde(const FilteredSpace& space, const BarrierPair<S>& b, const IntegrandProcess<S>& g,
                          const PicardOptions& opts = {});

// Certificate of the solved problem, or empty when the Picard scheme diverges.
template <class S>
std::optional<CertificatePair<S>> mokobodzki_certificate(const FilteredSpace& space, const BarrierPair<S>& b,
                                                         const IntegrandProcess<S>& g,
                                                         const PicardOptions& opts = {});

}  // namespace pdrbsde

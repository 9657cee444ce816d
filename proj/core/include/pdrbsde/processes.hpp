#pragma once

#include "pdrbsde/prob_space.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace pdrbsde {

enum class Slot { Minus, Mid, Plus };
const char* slot_name(Slot s);

enum class Kind {
  Optional,
  Predictable,
  FiniteVariation,      // A, A'
  PurelyDiscontinuous,  // B, B'
  CadlagMartingale,
};
const char* kind_name(Kind k);

// Three slots per instant: left limit, value, right limit. plus has N entries.
template <class S>
struct LadlagProcess {
  int N = 0;
  Kind kind = Kind::Optional;
  std::vector<RandomVariable<S>> minus;
  std::vector<RandomVariable<S>> mid;
  std::vector<RandomVariable<S>> plus;

  static LadlagProcess zeros(const FilteredSpace& space, Kind kind = Kind::Optional);
  static LadlagProcess constant(const FilteredSpace& space, const S& c, Kind kind = Kind::Predictable);

  const RandomVariable<S>& at(int k, Slot s) const;
  RandomVariable<S>& at(int k, Slot s);
  int n_paths() const { return mid.empty() ? 0 : static_cast<int>(mid[0].size()); }

  // Visits every existing slot in path order: mid0, plus0, minus1, mid1, ..., minusN, midN.
  void for_each_slot(const std::function<void(int, Slot)>& f) const;
};

// Acts over (t_k, t_{k+1}); z[k] is sigma_mid[k]-measurable.
template <class S>
struct IntegrandProcess {
  std::vector<RandomVariable<S>> z;

  static IntegrandProcess zeros(const FilteredSpace& space);
  static IntegrandProcess constant(const FilteredSpace& space, const S& c);
};

template <class S>
LadlagProcess<S> operator+(const LadlagProcess<S>& a, const LadlagProcess<S>& b);
template <class S>
LadlagProcess<S> operator-(const LadlagProcess<S>& a, const LadlagProcess<S>& b);
template <class S>
LadlagProcess<S> operator-(const LadlagProcess<S>& a);
template <class S>
IntegrandProcess<S> operator+(const IntegrandProcess<S>& a, const IntegrandProcess<S>& b);
template <class S>
IntegrandProcess<S> operator-(const IntegrandProcess<S>& a, const IntegrandProcess<S>& b);

template <class T, class S>
LadlagProcess<T> convert(const LadlagProcess<S>& x);
template <class T, class S>
IntegrandProcess<T> convert(const IntegrandProcess<S>& x);

template <class S>
double sup_distance(const LadlagProcess<S>& a, const LadlagProcess<S>& b);
template <class S>
double sup_distance(const IntegrandProcess<S>& a, const IntegrandProcess<S>& b);
template <class S>
double sup_norm(const LadlagProcess<S>& a);

// Description of the first violated class invariant, if any.
template <class S>
std::optional<std::string> class_violation(const FilteredSpace& space, const LadlagProcess<S>& x,
                                           double tol = 0.0);
template <class S>
std::optional<std::string> class_violation(const FilteredSpace& space, const IntegrandProcess<S>& z,
                                           double tol = 0.0);

template <class S>
struct Projection {
  LadlagProcess<S> process;             // mid slots replaced by E[mid | sigma_minus]
  std::vector<RandomVariable<S>> plus;  // E[plus | sigma_minus], k < N
};

template <class S>
Projection<S> predictable_projection(const FilteredSpace& space, const LadlagProcess<S>& x);

template <class S>
struct Jumps {
  std::vector<RandomVariable<S>> left;   // mid - minus, k = 0..N
  std::vector<RandomVariable<S>> right;  // plus - mid, k < N
};

template <class S>
Jumps<S> jumps(const LadlagProcess<S>& x);

template <class S>
bool is_martingale(const FilteredSpace& space, const LadlagProcess<S>& m, double tol = 0.0);

// Y_k >= E[Y_{k+1} | sigma_minus[k]] on mid slots.
template <class S>
bool supermartingale_fast_path(const FilteredSpace& space, const LadlagProcess<S>& y, double tol = 0.0);

// Y_S >= E[Y_tau | sigma_minus[S]] for every grid predictable tau >= S.
// Empty when the space or the number of stopping rules exceeds the enumeration caps.
template <class S>
std::optional<bool> supermartingale_by_enumeration(const FilteredSpace& space,
                                                   const LadlagProcess<S>& y, double tol = 0.0);

// Fast path, cross-checked by enumeration on spaces with at most 64 paths.
template <class S>
bool is_predictable_strong_supermartingale(const FilteredSpace& space, const LadlagProcess<S>& y,
                                           double tol = 0.0);

// Supermartingale inequalities along every slot link:
// minus_k >= mid_k, mid_k >= E[plus_k | sigma_minus], plus_k >= E[minus_{k+1} | sigma_mid].
template <class S>
bool is_slot_supermartingale(const FilteredSpace& space, const LadlagProcess<S>& y, double tol = 0.0);

template <class S>
LadlagProcess<S> ito_integral(const FilteredSpace& space, const IntegrandProcess<S>& z);

template <class S>
LadlagProcess<S> brownian(const FilteredSpace& space);

class NotMartingale : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <class S>
struct OrthogonalParts {
  IntegrandProcess<S> Z;
  LadlagProcess<S> N;
};

template <class S>
OrthogonalParts<S> orthogonal_decompose(const FilteredSpace& space, const LadlagProcess<S>& m,
                                        double tol = 0.0);

// Worst |E[(m_{(k+1)-} - m_{k+}) dW_k | sigma_mid_k]| over intervals and paths; zero iff <m, W> = 0.
template <class S>
double brownian_covariation(const FilteredSpace& space, const LadlagProcess<S>& m);

template <class S>
LadlagProcess<S> bracket(const LadlagProcess<S>& m, const LadlagProcess<S>& n);

// Random predictable process with values (lo + u) / denom, u uniform in {0, ..., hi - lo},
// constant on the atoms required by the predictable class. minus_0 = mid_0.
template <class S>
LadlagProcess<S> random_predictable(const FilteredSpace& space, std::mt19937_64& rng, long lo, long hi,
                                    long denom);

template <class S>
void write_csv(std::ostream& os, const LadlagProcess<S>& x);
template <class S>
void write_csv(std::ostream& os, const IntegrandProcess<S>& z);

// Inverse of write_csv; every cell of the space must appear exactly once.
template <class S>
LadlagProcess<S> read_csv(std::istream& is, const FilteredSpace& space, Kind kind);
template <class S>
IntegrandProcess<S> read_integrand_csv(std::istream& is, const FilteredSpace& space);

}  // namespace pdrbsde

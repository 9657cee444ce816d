#pragma once

#include "pdrbsde/scalar.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace pdrbsde {

template <class S>
using RandomVariable = std::vector<S>;

struct Partition {
  std::vector<std::vector<int>> atoms;
  std::vector<int> atom_of;

  static Partition from_atoms(std::vector<std::vector<int>> atoms, int n_paths);
  static Partition trivial(int n_paths);
  static Partition discrete(int n_paths);
  std::size_t size() const { return atoms.size(); }
  bool refines(const Partition& coarser) const;
  bool strictly_refines(const Partition& coarser) const;
};

struct MarkSpec {
  int instant = 0;
  std::vector<std::string> alphabet;
  // One row shared by every atom of sigma_minus[instant], or one row per atom.
  std::vector<std::vector<Rational>> probs;
};

struct SpaceSpec {
  int N = 1;
  Rational T = 1;
  std::vector<MarkSpec> marks;
  bool quasi_left_continuous = false;
};

class SpaceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class FilteredSpace {
 public:
  int N = 0;
  Rational T;
  Rational dt;
  double dt_d = 0;
  bool has_exact_sqrt = false;
  Rational sqrt_dt;  // valid when has_exact_sqrt
  double sqrt_dt_d = 0;
  int n_paths = 0;
  std::vector<Rational> weight_q;
  std::vector<double> weight_d;
  std::vector<std::vector<int>> dw_sign;  // [k][path], k < N
  std::vector<std::vector<int>> mark;     // [k][path], symbol index, k <= N
  std::vector<std::vector<std::string>> alphabet;  // [k]
  std::vector<Partition> sigma_minus;  // k = 0..N
  std::vector<Partition> sigma_mid;    // k = 0..N
  bool quasi_left_continuous = false;

  template <class S>
  S weight(int p) const {
    if constexpr (is_exact_v<S>) return weight_q[p]; else return weight_d[p];
  }
  template <class S>
  std::vector<S> weights() const {
    if constexpr (is_exact_v<S>) return weight_q; else return weight_d;
  }
  template <class S>
  S step() const {
    if constexpr (is_exact_v<S>) return dt; else return dt_d;
  }
  template <class S>
  S sqrt_step() const {
    if constexpr (is_exact_v<S>) {
      if (!has_exact_sqrt) throw SpaceError("rational arithmetic needs a rational sqrt(dt)");
      return sqrt_dt;
    } else {
      return sqrt_dt_d;
    }
  }
  template <class S>
  S dW(int k, int p) const {
    S s = sqrt_step<S>();
    return dw_sign[k][p] > 0 ? s : S(-s);
  }
  template <class S>
  S time(int k) const {
    return step<S>() * k;
  }
  double time_d(int k) const { return dt_d * k; }

  std::vector<int> non_qlc_instants() const;
};

FilteredSpace build_space(const SpaceSpec& spec);

template <class S>
RandomVariable<S> cond_expect(const RandomVariable<S>& X, const Partition& P,
                              const std::vector<S>& weights);

template <class S>
RandomVariable<S> cond_expect(const FilteredSpace& space, const RandomVariable<S>& X,
                              const Partition& P) {
  return cond_expect(X, P, space.weights<S>());
}

template <class S>
S expectation(const FilteredSpace& space, const RandomVariable<S>& X);

template <class S>
bool is_measurable(const RandomVariable<S>& X, const Partition& P, double tol = 0.0);

// First atom on which X is not constant, or -1.
template <class S>
int first_non_measurable_atom(const RandomVariable<S>& X, const Partition& P, double tol = 0.0);

}  // namespace pdrbsde

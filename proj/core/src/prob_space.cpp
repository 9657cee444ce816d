#include "pdrbsde/prob_space.hpp"

#include <algorithm>
#include <set>

namespace pdrbsde {

Partition Partition::from_atoms(std::vector<std::vector<int>> atoms, int n_paths) {
  Partition P;
  P.atom_of.assign(n_paths, -1);
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    if (atoms[a].empty()) throw SpaceError("empty atom in partition");
    for (int p : atoms[a]) {
      if (p < 0 || p >= n_paths || P.atom_of[p] != -1)
        throw SpaceError("atoms do not form a partition");
      P.atom_of[p] = static_cast<int>(a);
    }
  }
  for (int a : P.atom_of)
    if (a < 0) throw SpaceError("atoms do not cover every path");
  P.atoms = std::move(atoms);
  return P;
}

Partition Partition::trivial(int n_paths) {
  std::vector<int> all(n_paths);
  for (int p = 0; p < n_paths; ++p) all[p] = p;
  return from_atoms({all}, n_paths);
}

Partition Partition::discrete(int n_paths) {
  std::vector<std::vector<int>> atoms(n_paths);
  for (int p = 0; p < n_paths; ++p) atoms[p] = {p};
  return from_atoms(std::move(atoms), n_paths);
}

bool Partition::refines(const Partition& coarser) const {
  for (const auto& atom : atoms) {
    int c = coarser.atom_of[atom.front()];
    for (int p : atom)
      if (coarser.atom_of[p] != c) return false;
  }
  return true;
}

bool Partition::strictly_refines(const Partition& coarser) const {
  return refines(coarser) && atoms.size() > coarser.atoms.size();
}

std::vector<int> FilteredSpace::non_qlc_instants() const {
  std::vector<int> out;
  for (int k = 0; k <= N; ++k)
    if (sigma_mid[k].strictly_refines(sigma_minus[k])) out.push_back(k);
  return out;
}

namespace {

Partition blocks(int n_paths, long block) {
  std::vector<std::vector<int>> atoms;
  for (int start = 0; start < n_paths; start += static_cast<int>(block)) {
    std::vector<int> atom;
    for (int p = start; p < start + block; ++p) atom.push_back(p);
    atoms.push_back(std::move(atom));
  }
  return Partition::from_atoms(std::move(atoms), n_paths);
}

}  // namespace

FilteredSpace build_space(const SpaceSpec& spec) {
  if (spec.N < 1) throw SpaceError("grid needs N >= 1");
  if (spec.T <= 0) throw SpaceError("horizon T must be positive");
  const int N = spec.N;

  std::vector<const MarkSpec*> mark_at(N + 1, nullptr);
  for (const auto& m : spec.marks) {
    if (m.instant < 0 || m.instant > N)
      throw SpaceError("mark instant " + std::to_string(m.instant) + " outside the grid");
    if (mark_at[m.instant]) throw SpaceError("two marks at instant " + std::to_string(m.instant));
    if (m.alphabet.empty()) throw SpaceError("empty mark alphabet at instant " + std::to_string(m.instant));
    std::set<std::string> uniq(m.alphabet.begin(), m.alphabet.end());
    if (uniq.size() != m.alphabet.size())
      throw SpaceError("repeated symbol in mark alphabet at instant " + std::to_string(m.instant));
    mark_at[m.instant] = &m;
  }

  // stage 2k is the mark at t_k, stage 2k+1 the increment over (t_k, t_{k+1})
  const int n_stages = 2 * N + 1;
  std::vector<long> size(n_stages, 1);
  for (int k = 0; k <= N; ++k) {
    if (mark_at[k]) size[2 * k] = static_cast<long>(mark_at[k]->alphabet.size());
    if (k < N) size[2 * k + 1] = 2;
  }
  std::vector<long> suffix(n_stages + 1, 1);
  for (int s = n_stages - 1; s >= 0; --s) {
    suffix[s] = suffix[s + 1] * size[s];
    if (suffix[s] > (1L << 22)) throw SpaceError("path space too large");
  }

  FilteredSpace sp;
  sp.N = N;
  sp.T = spec.T;
  sp.dt = spec.T / N;
  sp.dt_d = to_double(sp.dt);
  if (auto r = exact_sqrt(sp.dt)) {
    sp.has_exact_sqrt = true;
    sp.sqrt_dt = *r;
  }
  sp.sqrt_dt_d = std::sqrt(sp.dt_d);
  sp.n_paths = static_cast<int>(suffix[0]);
  sp.quasi_left_continuous = spec.quasi_left_continuous;

  const int n = sp.n_paths;
  auto digit = [&](int p, int s) { return static_cast<int>((p / suffix[s + 1]) % size[s]); };

  sp.alphabet.assign(N + 1, {});
  sp.mark.assign(N + 1, std::vector<int>(n, 0));
  sp.dw_sign.assign(N, std::vector<int>(n, 0));
  for (int k = 0; k <= N; ++k) {
    sp.sigma_minus.push_back(blocks(n, suffix[2 * k]));
    sp.sigma_mid.push_back(blocks(n, suffix[2 * k + 1]));
    if (mark_at[k]) sp.alphabet[k] = mark_at[k]->alphabet;
    for (int p = 0; p < n; ++p) {
      sp.mark[k][p] = digit(p, 2 * k);
      if (k < N) sp.dw_sign[k][p] = digit(p, 2 * k + 1) == 0 ? 1 : -1;
    }
  }

  sp.weight_q.assign(n, Rational(1));
  const Rational half(1, 2);
  for (int k = 0; k <= N; ++k) {
    if (const MarkSpec* m = mark_at[k]) {
      const auto& atoms = sp.sigma_minus[k].atoms;
      if (m->probs.size() != 1 && m->probs.size() != atoms.size())
        throw SpaceError("mark at instant " + std::to_string(k) + " needs 1 or " +
                         std::to_string(atoms.size()) + " probability rows");
      for (std::size_t r = 0; r < m->probs.size(); ++r) {
        const auto& row = m->probs[r];
        if (row.size() != m->alphabet.size())
          throw SpaceError("mark probabilities at instant " + std::to_string(k) +
                           " do not match the alphabet");
        Rational total = 0;
        for (const auto& q : row) {
          if (q <= 0)
            throw SpaceError("non-positive mark probability at instant " + std::to_string(k));
          total += q;
        }
        if (total != 1)
          throw SpaceError("mark probabilities at instant " + std::to_string(k) +
                           " sum to " + to_string(total));
      }
      for (int p = 0; p < n; ++p) {
        const auto& row = m->probs.size() == 1 ? m->probs[0]
                                               : m->probs[sp.sigma_minus[k].atom_of[p]];
        sp.weight_q[p] *= row[sp.mark[k][p]];
      }
    }
    if (k < N)
      for (int p = 0; p < n; ++p) sp.weight_q[p] *= half;
  }
  Rational total = 0;
  for (const auto& w : sp.weight_q) total += w;
  if (total != 1) throw SpaceError("path weights do not sum to 1");
  sp.weight_d.resize(n);
  for (int p = 0; p < n; ++p) sp.weight_d[p] = to_double(sp.weight_q[p]);

  auto witnesses = sp.non_qlc_instants();
  if (spec.quasi_left_continuous && !witnesses.empty())
    throw SpaceError("quasi-left-continuous space requested but marks at instant " +
                     std::to_string(witnesses.front()) + " carry information");
  if (!spec.quasi_left_continuous && witnesses.empty())
    throw SpaceError("no mark carries information; request a quasi-left-continuous space explicitly");
  return sp;
}

template <class S>
RandomVariable<S> cond_expect(const RandomVariable<S>& X, const Partition& P,
                              const std::vector<S>& weights) {
  RandomVariable<S> out(X.size());
  for (const auto& atom : P.atoms) {
    S mass = 0;
    S acc = 0;
    for (int p : atom) {
      mass += weights[p];
      acc += weights[p] * X[p];
    }
    if (mass <= 0) throw SpaceError("conditioning on an atom of zero probability");
    S avg = acc / mass;
    for (int p : atom) out[p] = avg;
  }
  return out;
}

template <class S>
S expectation(const FilteredSpace& space, const RandomVariable<S>& X) {
  S acc = 0;
  for (int p = 0; p < space.n_paths; ++p) acc += space.weight<S>(p) * X[p];
  return acc;
}

template <class S>
int first_non_measurable_atom(const RandomVariable<S>& X, const Partition& P, double tol) {
  for (std::size_t a = 0; a < P.atoms.size(); ++a) {
    const auto& atom = P.atoms[a];
    for (int p : atom)
      if (!near(X[p], X[atom.front()], tol)) return static_cast<int>(a);
  }
  return -1;
}

template <class S>
bool is_measurable(const RandomVariable<S>& X, const Partition& P, double tol) {
  return first_non_measurable_atom(X, P, tol) < 0;
}

#define PDRBSDE_INSTANTIATE(S)                                                                 \
  template RandomVariable<S> cond_expect(const RandomVariable<S>&, const Partition&,           \
                                         const std::vector<S>&);                               \
  template S expectation(const FilteredSpace&, const RandomVariable<S>&);                      \
  template int first_non_measurable_atom(const RandomVariable<S>&, const Partition&, double);  \
  template bool is_measurable(const RandomVariable<S>&, const Partition&, double);

PDRBSDE_INSTANTIATE(double)
PDRBSDE_INSTANTIATE(Rational)

}  // namespace pdrbsde

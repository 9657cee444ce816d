#include "pdrbsde/calculus_checks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pdrbsde {

template <class S>
S Polynomial::eval(const std::vector<S>& x) const {
  S total = 0;
  for (const auto& t : terms) {
    S v = from_rational<S>(t.coeff);
    for (int i = 0; i < n; ++i)
      for (int e = 0; e < t.exps[i]; ++e) v *= x[i];
    total += v;
  }
  return total;
}

Polynomial Polynomial::derivative(int i) const {
  Polynomial d;
  d.n = n;
  for (const auto& t : terms) {
    if (t.exps[i] == 0) continue;
    Term u = t;
    u.coeff *= t.exps[i];
    --u.exps[i];
    d.terms.push_back(std::move(u));
  }
  return d;
}

int Polynomial::degree() const {
  int best = 0;
  for (const auto& t : terms) {
    int s = 0;
    for (int e : t.exps) s += e;
    best = std::max(best, s);
  }
  return best;
}

std::string Polynomial::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& t : terms) {
    if (!first) os << " + ";
    first = false;
    os << "(" << pdrbsde::to_string(t.coeff) << ")";
    for (int i = 0; i < n; ++i)
      if (t.exps[i] > 0) os << "*x" << i << "^" << t.exps[i];
  }
  if (first) os << "0";
  return os.str();
}

Polynomial Polynomial::random(int n, int max_degree, std::mt19937_64& rng) {
  Polynomial P;
  P.n = n;
  int count = 1 + static_cast<int>(rng() % 5);
  for (int c = 0; c < count; ++c) {
    Term t;
    t.coeff = Rational(static_cast<long>(rng() % 7) - 3, 1 + static_cast<long>(rng() % 2));
    if (t.coeff == 0) t.coeff = 1;
    t.exps.assign(n, 0);
    int budget = static_cast<int>(rng() % static_cast<unsigned long>(max_degree + 1));
    for (int b = 0; b < budget; ++b) ++t.exps[rng() % static_cast<unsigned long>(n)];
    P.terms.push_back(std::move(t));
  }
  return P;
}

template <class S>
OptionalSemimartingale<S> OptionalSemimartingale<S>::zeros(const FilteredSpace& space) {
  OptionalSemimartingale x;
  RandomVariable<S> z(space.n_paths, S(0));
  x.X0 = z;
  x.aI.assign(space.N, z);
  x.mI.assign(space.N, z);
  x.bR.assign(space.N, z);
  x.aL.assign(space.N + 1, z);
  x.mL.assign(space.N + 1, z);
  return x;
}

template <class S>
OptionalSemimartingale<S> OptionalSemimartingale<S>::from_process(const FilteredSpace& space,
                                                                  const LadlagProcess<S>& x) {
  auto out = zeros(space);
  const int n = space.n_paths;
  out.X0 = x.mid[0];
  for (int k = 0; k <= space.N; ++k) {
    if (k > 0)
      for (int p = 0; p < n; ++p) out.aL[k][p] = x.mid[k][p] - x.minus[k][p];
    if (k == space.N) break;
    RandomVariable<S> inc(n);
    for (int p = 0; p < n; ++p) {
      out.bR[k][p] = x.plus[k][p] - x.mid[k][p];
      inc[p] = x.minus[k + 1][p] - x.plus[k][p];
    }
    out.aI[k] = cond_expect(space, inc, space.sigma_mid[k]);
    for (int p = 0; p < n; ++p) out.mI[k][p] = inc[p] - out.aI[k][p];
  }
  return out;
}

template <class S>
OptionalSemimartingale<S> OptionalSemimartingale<S>::exponential_weight(const FilteredSpace& space, double beta) {
  auto out = zeros(space);
  auto w = [&](int k) { return from_double<S>(std::exp(beta * space.time_d(k))); };
  for (auto& v : out.X0) v = w(0);
  for (int k = 0; k < space.N; ++k)
    for (auto& v : out.aI[k]) v = w(k + 1) - w(k);
  return out;
}

template <class S>
OptionalSemimartingale<S> OptionalSemimartingale<S>::random(const FilteredSpace& space, std::mt19937_64& rng) {
  auto out = zeros(space);
  const int n = space.n_paths;
  auto draw = [&]() { return from_rational<S>(Rational(static_cast<long>(rng() % 17) - 8, 4)); };
  auto on_atoms = [&](const Partition& P) {
    RandomVariable<S> v(n);
    for (const auto& atom : P.atoms) {
      S x = draw();
      for (int p : atom) v[p] = x;
    }
    return v;
  };
  S x0 = draw();
  for (auto& v : out.X0) v = x0;
  for (int k = 0; k <= space.N; ++k) {
    if (k > 0) {
      out.aL[k] = on_atoms(space.sigma_minus[k]);
      auto v = on_atoms(space.sigma_mid[k]);
      auto e = cond_expect(space, v, space.sigma_minus[k]);
      for (int p = 0; p < n; ++p) out.mL[k][p] = v[p] - e[p];
    }
    if (k == space.N) break;
    out.bR[k] = on_atoms(space.sigma_mid[k]);
    out.aI[k] = on_atoms(space.sigma_minus[k + 1]);
    auto c = on_atoms(space.sigma_mid[k]);
    for (int p = 0; p < n; ++p) out.mI[k][p] = c[p] * space.dW<S>(k, p);
  }
  return out;
}

template <class S>
LadlagProcess<S> OptionalSemimartingale<S>::to_process(const FilteredSpace& space) const {
  auto x = LadlagProcess<S>::zeros(space, Kind::Optional);
  for (int p = 0; p < space.n_paths; ++p) {
    x.minus[0][p] = x.mid[0][p] = X0[p];
    for (int k = 0; k < space.N; ++k) {
      x.plus[k][p] = x.mid[k][p] + bR[k][p];
      x.minus[k + 1][p] = x.plus[k][p] + aI[k][p] + mI[k][p];
      x.mid[k + 1][p] = x.minus[k + 1][p] + aL[k + 1][p] + mL[k + 1][p];
    }
  }
  return x;
}

template <class S>
bool OptionalSemimartingale<S>::well_formed(const FilteredSpace& space, double tol) const {
  if (!is_measurable(X0, Partition::trivial(space.n_paths), tol)) return false;
  for (int k = 0; k <= space.N; ++k) {
    for (const auto& v : cond_expect(space, mL[k], space.sigma_minus[k]))
      if (!near(v, S(0), tol)) return false;
    if (k == space.N) break;
    for (const auto& v : cond_expect(space, mI[k], space.sigma_mid[k]))
      if (!near(v, S(0), tol)) return false;
  }
  return true;
}

template <class S>
GalchoukLenglartResult<S> galchouk_lenglart_check(const FilteredSpace& space,
                                                  const std::vector<OptionalSemimartingale<S>>& X,
                                                  const Polynomial& F) {
  const int d = static_cast<int>(X.size());
  if (d != F.n) throw std::invalid_argument("dimension mismatch between X and F");
  const int N = space.N;
  std::vector<Polynomial> DF;
  for (int i = 0; i < d; ++i) DF.push_back(F.derivative(i));

  GalchoukLenglartResult<S> r;
  auto zero = LadlagProcess<S>::zeros(space, Kind::Optional);
  r.lhs = r.rhs = r.bracket = r.left_jumps = r.right_jumps = zero;
  r.a_integral.assign(d, zero);
  r.m_integral.assign(d, zero);
  r.b_integral.assign(d, zero);

  for (int p = 0; p < space.n_paths; ++p) {
    std::vector<S> x(d), a(d, S(0)), m(d, S(0)), b(d, S(0));
    for (int i = 0; i < d; ++i) x[i] = X[i].X0[p];
    S left = 0, right = 0;
    const S f0 = F.eval(x);
    auto record = [&](int k, Slot s) {
      S total = left + right;
      for (int i = 0; i < d; ++i) {
        total += a[i] + m[i] + b[i];
        r.a_integral[i].at(k, s)[p] = a[i];
        r.m_integral[i].at(k, s)[p] = m[i];
        r.b_integral[i].at(k, s)[p] = b[i];
      }
      r.left_jumps.at(k, s)[p] = left;
      r.right_jumps.at(k, s)[p] = right;
      r.rhs.at(k, s)[p] = total;
      r.lhs.at(k, s)[p] = F.eval(x) - f0;
    };
    // Moves X by da + dm + db, integrating against derivatives at the current point.
    auto move = [&](const std::vector<S>& da, const std::vector<S>& dm, const std::vector<S>& db, S& remainder) {
      std::vector<S> next(x);
      S linear = 0;
      for (int i = 0; i < d; ++i) {
        S Di = DF[i].eval(x);
        a[i] += Di * da[i];
        m[i] += Di * dm[i];
        b[i] += Di * db[i];
        S dx = da[i] + dm[i] + db[i];
        linear += Di * dx;
        next[i] += dx;
      }
      remainder += F.eval(next) - F.eval(x) - linear;
      x = std::move(next);
    };
    std::vector<S> none(d, S(0)), da(d), dm(d), db(d);
    record(0, Slot::Minus);
    record(0, Slot::Mid);
    for (int k = 0; k <= N; ++k) {
      if (k > 0) {
        for (int i = 0; i < d; ++i) {
          da[i] = X[i].aL[k][p];
          dm[i] = X[i].mL[k][p];
        }
        move(da, dm, none, left);
        record(k, Slot::Mid);
      }
      if (k == N) break;
      for (int i = 0; i < d; ++i) db[i] = X[i].bR[k][p];
      move(none, none, db, right);
      record(k, Slot::Plus);
      for (int i = 0; i < d; ++i) {
        da[i] = X[i].aI[k][p];
        dm[i] = X[i].mI[k][p];
      }
      move(da, dm, none, left);
      record(k + 1, Slot::Minus);
    }
  }
  r.max_deviation = sup_distance(r.lhs, r.rhs);
  return r;
}

template <class S>
CorollaryTerms<S> corollary_expansion(const FilteredSpace& space, const OptionalSemimartingale<S>& Y, double beta) {
  Polynomial F;
  F.n = 2;
  F.terms.push_back({Rational(1), {1, 2}});
  std::vector<OptionalSemimartingale<S>> X{OptionalSemimartingale<S>::exponential_weight(space, beta), Y};
  auto gl = galchouk_lenglart_check(space, X, F);
  CorollaryTerms<S> c;
  c.lhs = gl.lhs;
  c.drift = gl.a_integral[0];
  c.a_integral = gl.a_integral[1];
  c.bracket = gl.bracket;
  c.bm_integral = gl.m_integral[0] + gl.m_integral[1] + gl.b_integral[0] + gl.b_integral[1];
  c.left_jump_sum = gl.left_jumps;
  c.right_jump_sum = gl.right_jumps;
  auto total = c.drift + c.a_integral + c.bracket + c.bm_integral + c.left_jump_sum + c.right_jump_sum;
  c.max_deviation = sup_distance(c.lhs, total);
  return c;
}

template <class S>
nlohmann::json CorollaryTerms<S>::summary() const {
  const int N = lhs.N;
  auto mean = [&](const LadlagProcess<S>& x) {
    double s = 0;
    for (const auto& v : x.mid[N]) s += to_double(v);
    return s / static_cast<double>(x.mid[N].size());
  };
  return {{"lhs", mean(lhs)},
          {"drift", mean(drift)},
          {"a_integral", mean(a_integral)},
          {"bracket", mean(bracket)},
          {"bm_integral", mean(bm_integral)},
          {"left_jump_sum", mean(left_jump_sum)},
          {"right_jump_sum", mean(right_jump_sum)},
          {"max_deviation", max_deviation}};
}

nlohmann::json AprioriReport::to_json() const {
  return {{"lhs", lhs_l1},         {"rhs", rhs_l1},           {"margin", margin_l1},
          {"holds", l1_holds},     {"y_norm", y_norm},        {"rhs_l11", rhs_l11},
          {"ratio_l11", ratio_l11}, {"empirical_c", empirical_c}, {"identical", identical}};
}

template <class S>
AprioriReport apriori_estimate_check(const FilteredSpace& space, const SolutionSeptuple<S>& s,
                                     const SolutionSeptuple<S>& sbar, const IntegrandProcess<S>& g,
                                     const IntegrandProcess<S>& gbar, const ContractionParams& params) {
  const double eps2 = params.epsilon * params.epsilon;
  if (!(params.beta > 1.0 / eps2)) throw std::invalid_argument("a priori estimate needs beta > 1/eps^2");
  AprioriReport r;
  const double dg = beta_norm_h2(space, g - gbar, params.beta);
  r.lhs_l1 = beta_norm_h2(space, s.Z - sbar.Z, params.beta) + beta_norm_m2(space, s.M - sbar.M, params.beta);
  r.rhs_l1 = eps2 * dg;
  r.margin_l1 = r.rhs_l1 - r.lhs_l1;
  r.l1_holds = r.lhs_l1 <= r.rhs_l1 * (1 + 1e-12);
  r.y_norm = beta_norm_s2p(space, s.Y - sbar.Y, params.beta);
  r.rhs_l11 = 2 * eps2 * (1 + 8 * params.c * params.c) * dg;
  r.ratio_l11 = r.rhs_l11 > 0 ? r.y_norm / r.rhs_l11 : (r.y_norm > 0 ? INFINITY : 0.0);
  r.empirical_c = dg > 0 ? std::sqrt(std::max(0.0, (r.y_norm / (2 * eps2 * dg) - 1) / 8)) : 0.0;
  r.identical = s.Y.minus == sbar.Y.minus && s.Y.mid == sbar.Y.mid && s.Y.plus == sbar.Y.plus &&
                s.Z.z == sbar.Z.z && s.M.minus == sbar.M.minus && s.M.mid == sbar.M.mid && s.M.plus == sbar.M.plus;
  return r;
}

#define PDRBSDE_INSTANTIATE(S)                                                                                   \
  template S Polynomial::eval(const std::vector<S>&) const;                                                     \
  template struct OptionalSemimartingale<S>;                                                                    \
  template struct CorollaryTerms<S>;                                                                            \
  template GalchoukLenglartResult<S> galchouk_lenglart_check(const FilteredSpace&,                              \
                                                             const std::vector<OptionalSemimartingale<S>>&,     \
                                                             const Polynomial&);                                \
  template CorollaryTerms<S> corollary_expansion(const FilteredSpace&, const OptionalSemimartingale<S>&, double); \
  template AprioriReport apriori_estimate_check(const FilteredSpace&, const SolutionSeptuple<S>&,               \
                                                const SolutionSeptuple<S>&, const IntegrandProcess<S>&,         \
                                                const IntegrandProcess<S>&, const ContractionParams&);

PDRBSDE_INSTANTIATE(double)
PDRBSDE_INSTANTIATE(Rational)

}  // namespace pdrbsde

#include "pdrbsde/drbsde.hpp"

#include <algorithm>
#include <sstream>

namespace pdrbsde {

namespace {

std::string cell_name(int k, const char* slot, int p) {
  std::ostringstream os;
  os << "instant " << k << " slot " << slot << " path " << p;
  return os.str();
}

// tails[k] = terminal + sum_{j>=k} f(g_j) dt, k = 0..N
template <class S, class F>
std::vector<RandomVariable<S>> tail_sums(const FilteredSpace& space, const RandomVariable<S>& terminal,
                                         const IntegrandProcess<S>& g, F f) {
  const int N = space.N;
  const S dt = space.step<S>();
  std::vector<RandomVariable<S>> tails(N + 1, terminal);
  for (int k = N - 1; k >= 0; --k)
    for (int p = 0; p < space.n_paths; ++p) tails[k][p] = tails[k + 1][p] + f(g.z[k][p]) * dt;
  return tails;
}

template <class S>
S clamp_between(const S& x, const S& lo, const S& hi) {
  return max_of(lo, min_of(x, hi));
}

template <class S>
LadlagProcess<S> shifted_constant(LadlagProcess<S> x, const S& c) {
  for (auto* slots : {&x.minus, &x.mid, &x.plus})
    for (auto& v : *slots)
      for (auto& e : v) e -= c;
  return x;
}

// E[tail_k + A_T - A_. + B_{T-} - B_. | F_{.-}] at every slot.
template <class S>
LadlagProcess<S> potential(const FilteredSpace& space, const std::vector<RandomVariable<S>>* tails,
                           const LadlagProcess<S>& A, const LadlagProcess<S>& B) {
  const int N = space.N;
  const int n = space.n_paths;
  auto out = LadlagProcess<S>::zeros(space, Kind::Predictable);
  for (int k = 0; k <= N; ++k) {
    RandomVariable<S> xm(n), xd(n), xp(n);
    for (int p = 0; p < n; ++p) {
      S base = tails ? (*tails)[k][p] : S(0);
      S aT = A.mid[N][p];
      S bT = B.minus[N][p];
      xm[p] = base + aT - A.minus[k][p] + bT - B.minus[k][p];
      xd[p] = base + aT - A.mid[k][p] + bT - B.minus[k][p];
      if (k < N) xp[p] = base + aT - A.mid[k][p] + bT - B.mid[k][p];
    }
    out.minus[k] = cond_expect(space, xm, space.sigma_minus[k]);
    out.mid[k] = cond_expect(space, xd, space.sigma_minus[k]);
    if (k < N) out.plus[k] = cond_expect(space, xp, space.sigma_mid[k]);
  }
  return out;
}

}  // namespace

template <class S>
std::optional<std::string> barrier_violation(const FilteredSpace& space, const BarrierPair<S>& b) {
  for (const auto* x : {&b.lower, &b.upper}) {
    LadlagProcess<S> probe = *x;
    probe.kind = Kind::Predictable;
    if (auto why = class_violation(space, probe, structural_tol<S>()))
      return std::string(x == &b.lower ? "lower" : "upper") + " barrier: " + *why;
    for (int p = 0; p < space.n_paths; ++p)
      if (x->minus[0][p] != x->mid[0][p])
        return std::string(x == &b.lower ? "lower" : "upper") + " barrier: left limit at 0 differs from value at " +
               cell_name(0, "minus", p);
  }
  std::optional<std::string> bad;
  b.lower.for_each_slot([&](int k, Slot s) {
    if (bad) return;
    for (int p = 0; p < space.n_paths; ++p)
      if (b.upper.at(k, s)[p] < b.lower.at(k, s)[p]) {
        bad = "upper barrier below lower barrier at " + cell_name(k, slot_name(s), p);
        return;
      }
  });
  if (bad) return bad;
  for (int p = 0; p < space.n_paths; ++p)
    if (b.lower.mid[space.N][p] != b.upper.mid[space.N][p])
      return "terminal values differ at " + cell_name(space.N, "mid", p);
  return std::nullopt;
}

template <class S>
LadlagProcess<S> conditional_tail(const FilteredSpace& space, const RandomVariable<S>& terminal,
                                  const IntegrandProcess<S>& g) {
  auto tails = tail_sums(space, terminal, g, [](const S& x) { return x; });
  auto psi = LadlagProcess<S>::zeros(space, Kind::Predictable);
  for (int k = 0; k <= space.N; ++k) {
    psi.mid[k] = cond_expect(space, tails[k], space.sigma_minus[k]);
    psi.minus[k] = psi.mid[k];
    if (k < space.N) psi.plus[k] = cond_expect(space, tails[k], space.sigma_mid[k]);
  }
  return psi;
}

template <class S>
ShiftedBarriers<S> shift_barriers(const FilteredSpace& space, const BarrierPair<S>& b,
                                  const IntegrandProcess<S>& g) {
  ShiftedBarriers<S> out;
  out.psi = conditional_tail(space, b.lower.mid[space.N], g);
  out.lower = b.lower - out.psi;
  out.upper = b.upper - out.psi;
  out.lower.kind = out.upper.kind = Kind::Predictable;
  return out;
}

template <class S>
LadlagProcess<S> truncated_sum(const LadlagProcess<S>& a, const LadlagProcess<S>& b) {
  auto out = a + b;
  out.kind = Kind::Predictable;
  for (auto& v : out.mid.back()) v = S(0);
  return out;
}

template <class S>
double fixed_point_residual(const FilteredSpace& space, const LadlagProcess<S>& J, const LadlagProcess<S>& Jbar,
                            const ShiftedBarriers<S>& shifted) {
  auto j = pre_value(space, truncated_sum(Jbar, shifted.lower));
  auto jb = pre_value(space, truncated_sum(J, -shifted.upper));
  return std::max(sup_distance(J, j), sup_distance(Jbar, jb));
}

template <class S>
PicardResult<S> picard_coupled(const FilteredSpace& space, const ShiftedBarriers<S>& shifted,
                               const PicardOptions& opts) {
  PicardResult<S> r;
  r.J = LadlagProcess<S>::zeros(space, Kind::Predictable);
  r.Jbar = r.J;
  const auto neg_upper = -shifted.upper;
  const long max_iter = opts.max_iter > 0 ? opts.max_iter : 10L * space.N * space.n_paths;
  auto count_decreases = [](const LadlagProcess<S>& next, const LadlagProcess<S>& prev) {
    long bad = 0;
    next.for_each_slot([&](int k, Slot s) {
      const auto& a = next.at(k, s);
      const auto& b = prev.at(k, s);
      for (std::size_t p = 0; p < a.size(); ++p)
        if (a[p] < b[p]) ++bad;
    });
    return bad;
  };
  auto& t = r.trace;
  while (t.iterations < max_iter) {
    auto J = pre_value(space, truncated_sum(r.Jbar, shifted.lower));
    auto Jbar = pre_value(space, truncated_sum(opts.gauss_seidel ? J : r.J, neg_upper));
    ++t.iterations;
    t.monotonicity_violations += count_decreases(J, r.J) + count_decreases(Jbar, r.Jbar);
    double delta = std::max(sup_distance(J, r.J), sup_distance(Jbar, r.Jbar));
    const bool same = J.minus == r.J.minus && J.mid == r.J.mid && J.plus == r.J.plus &&
                      Jbar.minus == r.Jbar.minus && Jbar.mid == r.Jbar.mid && Jbar.plus == r.Jbar.plus;
    r.J = std::move(J);
    r.Jbar = std::move(Jbar);
    t.delta.push_back(delta);
    t.norm_J.push_back(sup_norm(r.J));
    t.norm_Jbar.push_back(sup_norm(r.Jbar));
    if (std::max(t.norm_J.back(), t.norm_Jbar.back()) > opts.blowup) break;
    if (is_exact_v<S> ? same : delta <= opts.tol) {
      t.converged = true;
      break;
    }
  }
  t.diverged = !t.converged;
  t.fixed_point_residual = fixed_point_residual(space, r.J, r.Jbar, shifted);
  return r;
}

template <class S>
SolutionSeptuple<S> assemble_solution(const FilteredSpace& space, const LadlagProcess<S>& J,
                                      const LadlagProcess<S>& Jbar, const IntegrandProcess<S>& g,
                                      const BarrierPair<S>& b, double tol) {
  const int N = space.N;
  const int n = space.n_paths;
  const double st = structural_tol<S>();
  auto shifted = shift_barriers(space, b, g);
  double res = fixed_point_residual(space, J, Jbar, shifted);
  if (res > tol) throw NotFixedPoint("coupled system residual " + std::to_string(res) + " above tolerance");
  auto m1 = mertens_decompose(space, J, st);
  auto m2 = mertens_decompose(space, Jbar, st);

  auto tails = tail_sums(space, b.lower.mid[N], g, [](const S& x) { return x; });
  auto L = LadlagProcess<S>::zeros(space, Kind::CadlagMartingale);
  for (int k = 0; k <= N; ++k) {
    L.minus[k] = cond_expect(space, tails[0], space.sigma_minus[k]);
    L.mid[k] = cond_expect(space, tails[0], space.sigma_mid[k]);
    if (k < N) L.plus[k] = L.mid[k];
  }
  auto total = m1.N - m2.N + L;
  total = shifted_constant(total, S(total.minus[0][0]));
  total.kind = Kind::CadlagMartingale;
  auto orth = orthogonal_decompose(space, total, st);

  SolutionSeptuple<S> s;
  s.Y = J - Jbar + shifted.psi;
  s.Y.kind = Kind::Predictable;
  s.Z = std::move(orth.Z);
  s.M = std::move(orth.N);
  s.A = LadlagProcess<S>::zeros(space, Kind::FiniteVariation);
  s.A2 = s.A;
  s.B = LadlagProcess<S>::zeros(space, Kind::PurelyDiscontinuous);
  s.B2 = s.B;
  for (int k = 0; k <= N; ++k) {
    for (int p = 0; p < n; ++p) {
      S dA = (m1.A.mid[k][p] - m1.A.minus[k][p]) - (m2.A.mid[k][p] - m2.A.minus[k][p]);
      s.A.mid[k][p] = s.A.minus[k][p] + pos_part(dA);
      s.A2.mid[k][p] = s.A2.minus[k][p] + neg_part(dA);
      S dB = (m1.B.mid[k][p] - m1.B.minus[k][p]) - (m2.B.mid[k][p] - m2.B.minus[k][p]);
      s.B.mid[k][p] = s.B.minus[k][p] + pos_part(dB);
      s.B2.mid[k][p] = s.B2.minus[k][p] + neg_part(dB);
      if (k == N) continue;
      for (auto* x : {&s.A, &s.A2, &s.B, &s.B2}) x->plus[k][p] = x->mid[k][p];
      S a = (m1.A.minus[k + 1][p] - m1.A.plus[k][p]) - (m2.A.minus[k + 1][p] - m2.A.plus[k][p]);
      s.A.minus[k + 1][p] = s.A.plus[k][p] + pos_part(a);
      s.A2.minus[k + 1][p] = s.A2.plus[k][p] + neg_part(a);
      s.B.minus[k + 1][p] = s.B.plus[k][p];
      s.B2.minus[k + 1][p] = s.B2.plus[k][p];
    }
  }
  return s;
}

template <class S>
Singularity mutually_singular(const LadlagProcess<S>& P, const LadlagProcess<S>& Q, double tol) {
  Singularity out;
  auto visit = [&](const S& dp, const S& dq, const std::string& where) {
    if (to_double(dp) > tol) out.witness.push_back(where);
    double both = to_double(min_of(dp, dq));
    out.overlap = std::max(out.overlap, both);
    if (both > tol) out.singular = false;
  };
  const std::size_t n = P.mid[0].size();
  for (int k = 0; k <= P.N; ++k)
    for (std::size_t p = 0; p < n; ++p) {
      int pi = static_cast<int>(p);
      visit(P.mid[k][p] - P.minus[k][p], Q.mid[k][p] - Q.minus[k][p], cell_name(k, "jump", pi));
      if (k < P.N) {
        visit(P.plus[k][p] - P.mid[k][p], Q.plus[k][p] - Q.mid[k][p], cell_name(k, "right-jump", pi));
        visit(P.minus[k + 1][p] - P.plus[k][p], Q.minus[k + 1][p] - Q.plus[k][p], cell_name(k, "interval", pi));
      }
    }
  return out;
}

template <class S>
VerificationReport verify_drbsde_solution(const FilteredSpace& space, const IntegrandProcess<S>& g,
                                          const BarrierPair<S>& b, const SolutionSeptuple<S>& s, double tol) {
  const int N = space.N;
  const int n = space.n_paths;
  const auto& xi = b.lower;
  const auto& zeta = b.upper;
  VerificationReport r;
  auto class_entry = [&](const char* name, LadlagProcess<S> x, Kind kind) {
    x.kind = kind;
    ResidualTracker t(std::string("class_") + name, tol);
    if (auto why = class_violation(space, x, tol)) t.fail(*why);
    r.entries.push_back(t.entry());
  };
  class_entry("Y", s.Y, Kind::Predictable);
  class_entry("A", s.A, Kind::FiniteVariation);
  class_entry("A'", s.A2, Kind::FiniteVariation);
  class_entry("B", s.B, Kind::PurelyDiscontinuous);
  class_entry("B'", s.B2, Kind::PurelyDiscontinuous);
  {
    ResidualTracker t("class_Z", tol);
    if (auto why = class_violation(space, s.Z, tol)) t.fail(*why);
    r.entries.push_back(t.entry());
  }
  {
    ResidualTracker t("class_M", tol);
    if (!is_martingale(space, s.M, tol)) t.fail("M is not a cadlag martingale");
    for (int p = 0; p < n; ++p) t.add(abs_diff(s.M.minus[0][p], S(0)), 0, "minus", p);
    t.add(brownian_covariation(space, s.M), "covariation with W");
    r.entries.push_back(t.entry());
  }

  auto rhs = equation_rhs(space, xi.mid[N], g, s.Z, s.M, s.A, s.A2, s.B, s.B2);
  ResidualTracker eq("equation", tol), term("terminal", tol), sandwich("barrier_sandwich", tol);
  for (int k = 0; k <= N; ++k)
    for (int p = 0; p < n; ++p) {
      eq.add(abs_diff(s.Y.minus[k][p], rhs.minus[k][p]), k, "minus", p);
      eq.add(abs_diff(s.Y.mid[k][p], rhs.mid[k][p]), k, "mid", p);
      if (k < N) eq.add(abs_diff(s.Y.plus[k][p], rhs.plus[k][p]), k, "plus", p);
    }
  for (int p = 0; p < n; ++p) {
    term.add(abs_diff(s.Y.mid[N][p], xi.mid[N][p]), N, "mid", p);
    term.add(abs_diff(s.Y.mid[N][p], zeta.mid[N][p]), N, "mid", p);
  }
  s.Y.for_each_slot([&](int k, Slot sl) {
    for (int p = 0; p < n; ++p) {
      const S& y = s.Y.at(k, sl)[p];
      S below = neg_part(S(y - xi.at(k, sl)[p]));
      S above = pos_part(S(y - zeta.at(k, sl)[p]));
      sandwich.add(to_double(max_of(below, above)), k, slot_name(sl), p);
    }
  });
  for (auto* t : {&eq, &term, &sandwich}) r.entries.push_back(t->entry());

  // Skorokhod: each reflector increases only where Y touches its barrier.
  auto skorokhod = [&](const char* name, const LadlagProcess<S>& A, const LadlagProcess<S>& B, bool upper) {
    const auto& bar = upper ? zeta : xi;
    auto gap = [&](const S& y, const S& x) { return upper ? S(x - y) : S(y - x); };
    ResidualTracker ai(std::string("skorokhod_") + name + "_interval", tol);
    ResidualTracker aj(std::string("skorokhod_") + name + "_jump", tol);
    ResidualTracker bj(std::string("skorokhod_") + (upper ? "B'" : "B"), tol);
    for (int k = 0; k <= N; ++k)
      for (int p = 0; p < n; ++p) {
        S dA = A.mid[k][p] - A.minus[k][p];
        aj.add(to_double(pos_part(min_of(dA, gap(s.Y.minus[k][p], bar.minus[k][p])))), k, "minus", p);
        S dB = B.mid[k][p] - B.minus[k][p];
        bj.add(to_double(pos_part(min_of(dB, gap(s.Y.mid[k][p], bar.mid[k][p])))), k, "mid", p);
        if (k < N) {
          S a = A.minus[k + 1][p] - A.plus[k][p];
          ai.add(to_double(pos_part(min_of(a, gap(s.Y.plus[k][p], bar.plus[k][p])))), k, "plus", p);
        }
      }
    for (auto* t : {&ai, &aj, &bj}) r.entries.push_back(t->entry());
  };
  skorokhod("A", s.A, s.B, false);
  skorokhod("A'", s.A2, s.B2, true);

  for (auto [name, P, Q] : {std::tuple{"mutual_singularity_A", &s.A, &s.A2},
                            std::tuple{"mutual_singularity_B", &s.B, &s.B2}}) {
    auto m = mutually_singular(*P, *Q, tol);
    ResidualTracker t(name, tol);
    t.add(m.overlap, m.singular ? "" : "overlapping increments");
    r.entries.push_back(t.entry());
  }

  ResidualTracker ja("jump_A", tol), ja2("jump_A'", tol), jb("jump_B", tol), jb2("jump_B'", tol),
      proj("projection_identity", tol);
  for (int k = 0; k <= N; ++k) {
    RandomVariable<S> py;
    if (k < N) py = cond_expect(space, s.Y.plus[k], space.sigma_minus[k]);
    for (int p = 0; p < n; ++p) {
      S dY = s.Y.mid[k][p] - s.Y.minus[k][p];
      ja.add(abs_diff(S(s.A.mid[k][p] - s.A.minus[k][p]), neg_part(dY)), k, "mid", p);
      ja2.add(abs_diff(S(s.A2.mid[k][p] - s.A2.minus[k][p]), pos_part(dY)), k, "mid", p);
      S gap = k < N ? S(py[p] - s.Y.mid[k][p]) : S(0);
      jb.add(abs_diff(S(s.B.mid[k][p] - s.B.minus[k][p]), neg_part(gap)), k, "mid", p);
      jb2.add(abs_diff(S(s.B2.mid[k][p] - s.B2.minus[k][p]), pos_part(gap)), k, "mid", p);
      if (k < N) {
        S target = clamp_between(py[p], xi.mid[k][p], zeta.mid[k][p]);
        proj.add(abs_diff(s.Y.mid[k][p], target), k, "mid", p);
      }
    }
  }
  for (auto* t : {&ja, &ja2, &jb, &jb2, &proj}) r.entries.push_back(t->entry());
  return r;
}

template <class S>
CertificatePair<S> certificate_from_solution(const FilteredSpace& space, const IntegrandProcess<S>& g,
                                             const BarrierPair<S>& b, const SolutionSeptuple<S>& s) {
  const auto& xiN = b.lower.mid[space.N];
  RandomVariable<S> tp(xiN.size()), tn(xiN.size());
  for (std::size_t p = 0; p < xiN.size(); ++p) {
    tp[p] = pos_part(xiN[p]);
    tn[p] = neg_part(xiN[p]);
  }
  auto up = tail_sums(space, tp, g, [](const S& x) { return pos_part(x); });
  auto down = tail_sums(space, tn, g, [](const S& x) { return neg_part(x); });
  return {potential(space, &up, s.A, s.B), potential(space, &down, s.A2, s.B2)};
}

template <class S>
CertificatePair<S> reflector_pair(const FilteredSpace& space, const SolutionSeptuple<S>& s) {
  return {potential<S>(space, nullptr, s.A, s.B), potential<S>(space, nullptr, s.A2, s.B2)};
}

template <class S>
VerificationReport check_certificate(const FilteredSpace& space, const BarrierPair<S>& b,
                                     const CertificatePair<S>& c, double tol) {
  VerificationReport r;
  for (auto [name, H] : {std::pair{"H", &c.H}, std::pair{"Hbar", &c.Hbar}}) {
    ResidualTracker nonneg(std::string(name) + "_nonnegative", tol);
    H->for_each_slot([&](int k, Slot sl) {
      for (int p = 0; p < space.n_paths; ++p) nonneg.add(to_double(neg_part(H->at(k, sl)[p])), k, slot_name(sl), p);
    });
    ResidualTracker sm(std::string(name) + "_supermartingale", tol);
    if (auto why = class_violation(space, *H, tol)) sm.fail(*why);
    else if (!is_slot_supermartingale(space, *H, tol)) sm.fail("slot supermartingale inequality fails");
    else if (!is_predictable_strong_supermartingale(space, *H, tol)) sm.fail("stopping inequality fails");
    r.entries.push_back(nonneg.entry());
    r.entries.push_back(sm.entry());
  }
  ResidualTracker sandwich("certificate_sandwich", tol);
  c.H.for_each_slot([&](int k, Slot sl) {
    for (int p = 0; p < space.n_paths; ++p) {
      S d = c.H.at(k, sl)[p] - c.Hbar.at(k, sl)[p];
      S below = neg_part(S(d - b.lower.at(k, sl)[p]));
      S above = pos_part(S(d - b.upper.at(k, sl)[p]));
      sandwich.add(to_double(max_of(below, above)), k, slot_name(sl), p);
    }
  });
  r.entries.push_back(sandwich.entry());
  return r;
}

template <class S>
MinimalityResult minimality_check(const FilteredSpace& space, const LadlagProcess<S>& J,
                                  const LadlagProcess<S>& Jbar, const CertificatePair<S>& c,
                                  const ShiftedBarriers<S>& shifted, double tol) {
  MinimalityResult out;
  BarrierPair<S> bars{shifted.lower, shifted.upper};
  auto pre = check_certificate(space, bars, c, tol);
  if (!pre.all_pass()) {
    out.precondition_ok = false;
    out.pass = false;
    out.message = "precondition fails: " + pre.failures().front();
    return out;
  }
  J.for_each_slot([&](int k, Slot sl) {
    for (int p = 0; p < space.n_paths; ++p) {
      if (!out.pass) return;
      if (to_double(J.at(k, sl)[p] - c.H.at(k, sl)[p]) > tol) {
        out.pass = false;
        out.message = "J above H at " + cell_name(k, slot_name(sl), p);
      } else if (to_double(Jbar.at(k, sl)[p] - c.Hbar.at(k, sl)[p]) > tol) {
        out.pass = false;
        out.message = "Jbar above Hbar at " + cell_name(k, slot_name(sl), p);
      }
    }
  });
  return out;
}

template <class S>
CertificatePair<S> random_dominating_pair(const FilteredSpace& space, const CertificatePair<S>& base,
                                          std::mt19937_64& rng) {
  auto R = pre_value(space, random_predictable<S>(space, rng, 0, 12, 4));
  CertificatePair<S> out{base.H + R, base.Hbar + R};
  out.H.kind = out.Hbar.kind = Kind::Predictable;
  return out;
}

template <class S>
LadlagProcess<S> hand_recursion(const FilteredSpace& space, const BarrierPair<S>& b,
                                const IntegrandProcess<S>& g) {
  const int N = space.N;
  const int n = space.n_paths;
  const S dt = space.step<S>();
  const auto& lo = b.lower;
  const auto& hi = b.upper;
  auto y = LadlagProcess<S>::zeros(space, Kind::Predictable);
  y.mid[N] = lo.mid[N];
  for (int k = N; k >= 0; --k) {
    if (k < N) {
      auto c = cond_expect(space, y.minus[k + 1], space.sigma_mid[k]);
      for (int p = 0; p < n; ++p) y.plus[k][p] = clamp_between(S(c[p] + g.z[k][p] * dt), lo.plus[k][p], hi.plus[k][p]);
      auto e = cond_expect(space, y.plus[k], space.sigma_minus[k]);
      for (int p = 0; p < n; ++p) y.mid[k][p] = clamp_between(e[p], lo.mid[k][p], hi.mid[k][p]);
    }
    for (int p = 0; p < n; ++p)
      y.minus[k][p] = k == 0 ? y.mid[0][p] : clamp_between(y.mid[k][p], lo.minus[k][p], hi.minus[k][p]);
  }
  return y;
}

template <class S>
DrbsdeRun<S> solve_drbsde(const FilteredSpace& space, const BarrierPair<S>& b, const IntegrandProcess<S>& g,
                          const PicardOptions& opts) {
  DrbsdeRun<S> run;
  run.shifted = shift_barriers(space, b, g);
  run.picard = picard_coupled(space, run.shifted, opts);
  if (!run.picard.trace.converged) {
    std::ostringstream os;
    os << "Picard scheme did not converge after " << run.picard.trace.iterations << " iterations";
    throw Divergence(os.str());
  }
  const double tol = is_exact_v<S> ? 0.0 : opts.tol;
  run.solution = assemble_solution(space, run.picard.J, run.picard.Jbar, g, b, tol);
  return run;
}

template <class S>
std::optional<CertificatePair<S>> mokobodzki_certificate(const FilteredSpace& space, const BarrierPair<S>& b,
                                                         const IntegrandProcess<S>& g,
                                                         const PicardOptions& opts) {
  try {
    auto run = solve_drbsde(space, b, g, opts);
    return certificate_from_solution(space, g, b, run.solution);
  } catch (const Divergence&) {
    return std::nullopt;
  }
}

#define PDRBSDE_INSTANTIATE(S)                                                                                  \
  template std::optional<std::string> barrier_violation(const FilteredSpace&, const BarrierPair<S>&);           \
  template LadlagProcess<S> conditional_tail(const FilteredSpace&, const RandomVariable<S>&,                    \
                                             const IntegrandProcess<S>&);                                       \
  template ShiftedBarriers<S> shift_barriers(const FilteredSpace&, const BarrierPair<S>&,                       \
                                             const IntegrandProcess<S>&);                                       \
  template LadlagProcess<S> truncated_sum(const LadlagProcess<S>&, const LadlagProcess<S>&);                    \
  template PicardResult<S> picard_coupled(const FilteredSpace&, const ShiftedBarriers<S>&, const PicardOptions&); \
  template double fixed_point_residual(const FilteredSpace&, const LadlagProcess<S>&, const LadlagProcess<S>&,  \
                                       const ShiftedBarriers<S>&);                                              \
  template SolutionSeptuple<S> assemble_solution(const FilteredSpace&, const LadlagProcess<S>&,                 \
                                                 const LadlagProcess<S>&, const IntegrandProcess<S>&,           \
                                                 const BarrierPair<S>&, double);                                \
  template VerificationReport verify_drbsde_solution(const FilteredSpace&, const IntegrandProcess<S>&,          \
                                                     const BarrierPair<S>&, const SolutionSeptuple<S>&, double); \
  template Singularity mutually_singular(const LadlagProcess<S>&, const LadlagProcess<S>&, double);             \
  template CertificatePair<S> certificate_from_solution(const FilteredSpace&, const IntegrandProcess<S>&,       \
                                                        const BarrierPair<S>&, const SolutionSeptuple<S>&);     \
  template CertificatePair<S> reflector_pair(const FilteredSpace&, const SolutionSeptuple<S>&);                 \
  template VerificationReport check_certificate(const FilteredSpace&, const BarrierPair<S>&,                    \
                                                const CertificatePair<S>&, double);                             \
  template MinimalityResult minimality_check(const FilteredSpace&, const LadlagProcess<S>&,                     \
                                             const LadlagProcess<S>&, const CertificatePair<S>&,                \
                                             const ShiftedBarriers<S>&, double);                                \
  template CertificatePair<S> random_dominating_pair(const FilteredSpace&, const CertificatePair<S>&,           \
                                                     std::mt19937_64&);                                         \
  template LadlagProcess<S> hand_recursion(const FilteredSpace&, const BarrierPair<S>&,                         \
                                           const IntegrandProcess<S>&);                                         \
  template DrbsdeRun<S> solve_drbsde(const FilteredSpace&, const BarrierPair<S>&, const IntegrandProcess<S>&,   \
                                     const PicardOptions&);                                                     \
  template std::optional<CertificatePair<S>> mokobodzki_certificate(const FilteredSpace&, const BarrierPair<S>&, \
                                                                    const IntegrandProcess<S>&,                 \
                                                                    const PicardOptions&);

PDRBSDE_INSTANTIATE(double)
PDRBSDE_INSTANTIATE(Rational)

}  // namespace pdrbsde

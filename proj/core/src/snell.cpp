#include "pdrbsde/snell.hpp"

#include "pdrbsde/enumeration.hpp"

namespace pdrbsde {

template <class S>
LadlagProcess<S> pre_value(const FilteredSpace& space, const LadlagProcess<S>& xi) {
  const int N = space.N;
  const int n = space.n_paths;
  LadlagProcess<S> y = LadlagProcess<S>::zeros(space, Kind::Predictable);
  y.mid[N] = xi.mid[N];
  for (int k = N; k >= 0; --k) {
    if (k < N) {
      auto cont = cond_expect(space, y.minus[k + 1], space.sigma_mid[k]);
      for (int p = 0; p < n; ++p) y.plus[k][p] = max_of(xi.plus[k][p], cont[p]);
      auto e = cond_expect(space, y.plus[k], space.sigma_minus[k]);
      for (int p = 0; p < n; ++p) y.mid[k][p] = max_of(xi.mid[k][p], e[p]);
    }
    for (int p = 0; p < n; ++p) y.minus[k][p] = k == 0 ? y.mid[0][p] : max_of(xi.minus[k][p], y.mid[k][p]);
  }
  return y;
}

template <class S>
MertensParts<S> mertens_decompose(const FilteredSpace& space, const LadlagProcess<S>& V, double tol) {
  const int N = space.N;
  const int n = space.n_paths;
  LadlagProcess<S> probe = V;
  probe.kind = Kind::Predictable;
  if (auto why = class_violation(space, probe, tol)) throw NotSupermartingale("not predictable: " + *why);
  for (int p = 0; p < n; ++p)
    if (!near(V.minus[0][p], V.mid[0][p], tol)) throw NotSupermartingale("left limit at 0 differs from value");

  MertensParts<S> out;
  out.N = LadlagProcess<S>::zeros(space, Kind::CadlagMartingale);
  out.A = LadlagProcess<S>::zeros(space, Kind::FiniteVariation);
  out.B = LadlagProcess<S>::zeros(space, Kind::PurelyDiscontinuous);
  auto check = [&](const S& inc, const char* what, int k) {
    if (to_double(inc) < -tol)
      throw NotSupermartingale(std::string("negative ") + what + " at instant " + std::to_string(k));
  };

  out.N.minus[0] = V.mid[0];
  for (int k = 0; k <= N; ++k) {
    for (int p = 0; p < n; ++p) {
      S dA = V.minus[k][p] - V.mid[k][p];
      check(dA, "left jump", k);
      out.A.mid[k][p] = out.A.minus[k][p] + dA;
    }
    if (k == N) {
      out.N.mid[N] = out.N.minus[N];
      out.B.mid[N] = out.B.minus[N];
      break;
    }
    auto ep = cond_expect(space, V.plus[k], space.sigma_minus[k]);
    auto em = cond_expect(space, V.minus[k + 1], space.sigma_mid[k]);
    for (int p = 0; p < n; ++p) {
      S dB = V.mid[k][p] - ep[p];
      check(dB, "right jump", k);
      out.B.mid[k][p] = out.B.minus[k][p] + dB;
      out.N.mid[k][p] = out.N.minus[k][p] + (V.plus[k][p] - ep[p]);
      S a = V.plus[k][p] - em[p];
      check(a, "interval decrease", k);
      out.A.plus[k][p] = out.A.mid[k][p];
      out.B.plus[k][p] = out.B.mid[k][p];
      out.N.plus[k][p] = out.N.mid[k][p];
      out.A.minus[k + 1][p] = out.A.plus[k][p] + a;
      out.B.minus[k + 1][p] = out.B.plus[k][p];
      out.N.minus[k + 1][p] = out.N.plus[k][p] + (V.minus[k + 1][p] - em[p]);
    }
  }
  return out;
}

template <class S>
RbsdeQuintuple<S> pre_operator(const FilteredSpace& space, const LadlagProcess<S>& xi) {
  RbsdeQuintuple<S> q;
  q.Y = pre_value(space, xi);
  auto parts = mertens_decompose(space, q.Y, structural_tol<S>());
  auto centred = parts.N;
  const S v0 = parts.N.minus[0][0];
  for (auto* slots : {&centred.minus, &centred.mid, &centred.plus})
    for (auto& v : *slots)
      for (auto& e : v) e -= v0;
  auto orth = orthogonal_decompose(space, centred, structural_tol<S>());
  q.Z = std::move(orth.Z);
  q.M = std::move(orth.N);
  q.A = std::move(parts.A);
  q.B = std::move(parts.B);
  return q;
}

template <class S>
LadlagProcess<S> snell_bruteforce(const FilteredSpace& space, const LadlagProcess<S>& xi) {
  const int N = space.N;
  std::vector<StoppingStage<S>> stages;
  struct Where {
    int k;
    Slot slot;
  };
  std::vector<Where> where;
  for (int k = 0; k <= N; ++k) {
    if (k > 0) {
      stages.push_back({&space.sigma_minus[k], &xi.minus[k]});
      where.push_back({k, Slot::Minus});
    }
    stages.push_back({&space.sigma_minus[k], &xi.mid[k]});
    where.push_back({k, Slot::Mid});
    if (k < N) {
      stages.push_back({&space.sigma_mid[k], &xi.plus[k]});
      where.push_back({k, Slot::Plus});
    }
  }
  auto best = enumerate_stopping_values(stages, space.weights<S>());
  LadlagProcess<S> y = LadlagProcess<S>::zeros(space, Kind::Predictable);
  for (std::size_t s = 0; s < stages.size(); ++s) y.at(where[s].k, where[s].slot) = best[s];
  y.minus[0] = y.mid[0];
  return y;
}

template <class S>
LadlagProcess<S> equation_rhs(const FilteredSpace& space, const RandomVariable<S>& terminal,
                              const IntegrandProcess<S>& g, const IntegrandProcess<S>& Z,
                              const LadlagProcess<S>& M, const LadlagProcess<S>& A,
                              const LadlagProcess<S>& A2, const LadlagProcess<S>& B,
                              const LadlagProcess<S>& B2) {
  const int N = space.N;
  const int n = space.n_paths;
  const S dt = space.step<S>();
  LadlagProcess<S> out = LadlagProcess<S>::zeros(space, Kind::Optional);
  RandomVariable<S> tail(terminal);  // xi_N + sum_{j>=k} g_j dt - sum_{j>=k} z_j dW_j
  for (int k = N; k >= 0; --k) {
    if (k < N)
      for (int p = 0; p < n; ++p) tail[p] += g.z[k][p] * dt - Z.z[k][p] * space.dW<S>(k, p);
    for (int p = 0; p < n; ++p) {
      const S mT = M.minus[N][p];
      const S aT = A.mid[N][p] - A2.mid[N][p];
      const S bT = B.minus[N][p] - B2.minus[N][p];
      out.minus[k][p] = tail[p] - (mT - M.minus[k][p]) + (aT - (A.minus[k][p] - A2.minus[k][p])) +
                        (bT - (B.minus[k][p] - B2.minus[k][p]));
      out.mid[k][p] = tail[p] - (mT - M.minus[k][p]) + (aT - (A.mid[k][p] - A2.mid[k][p])) +
                      (bT - (B.minus[k][p] - B2.minus[k][p]));
      if (k < N)
        out.plus[k][p] = tail[p] - (mT - M.mid[k][p]) + (aT - (A.mid[k][p] - A2.mid[k][p])) +
                         (bT - (B.mid[k][p] - B2.mid[k][p]));
    }
  }
  return out;
}

namespace {

template <class S>
void class_entry(VerificationReport& r, const FilteredSpace& space, const char* name, LadlagProcess<S> x,
                 Kind kind, double tol) {
  x.kind = kind;
  ResidualTracker t(std::string("class_") + name, tol);
  if (auto why = class_violation(space, x, tol)) t.fail(*why);
  r.entries.push_back(t.entry());
}

}  // namespace

template <class S>
VerificationReport verify_rbsde_solution(const FilteredSpace& space, const LadlagProcess<S>& xi,
                                         const RbsdeQuintuple<S>& q, double tol) {
  const int N = space.N;
  const int n = space.n_paths;
  VerificationReport r;
  class_entry(r, space, "Y", q.Y, Kind::Predictable, tol);
  class_entry(r, space, "A", q.A, Kind::FiniteVariation, tol);
  class_entry(r, space, "B", q.B, Kind::PurelyDiscontinuous, tol);
  {
    ResidualTracker t("class_Z", tol);
    if (auto why = class_violation(space, q.Z, tol)) t.fail(*why);
    r.entries.push_back(t.entry());
  }
  {
    ResidualTracker t("class_M", tol);
    if (!is_martingale(space, q.M, tol)) t.fail("M is not a cadlag martingale");
    for (int p = 0; p < n; ++p) t.add(abs_diff(q.M.minus[0][p], S(0)), 0, "minus", p);
    t.add(brownian_covariation(space, q.M), "covariation with W");
    r.entries.push_back(t.entry());
  }

  auto zero = IntegrandProcess<S>::zeros(space);
  auto none = LadlagProcess<S>::zeros(space);
  auto rhs = equation_rhs(space, xi.mid[N], zero, q.Z, q.M, q.A, none, q.B, none);
  ResidualTracker eq("equation", tol), term("terminal", tol), lower("barrier_lower", tol);
  for (int k = 0; k <= N; ++k)
    for (int p = 0; p < n; ++p) {
      eq.add(abs_diff(q.Y.minus[k][p], rhs.minus[k][p]), k, "minus", p);
      eq.add(abs_diff(q.Y.mid[k][p], rhs.mid[k][p]), k, "mid", p);
      if (k < N) eq.add(abs_diff(q.Y.plus[k][p], rhs.plus[k][p]), k, "plus", p);
    }
  for (int p = 0; p < n; ++p) term.add(abs_diff(q.Y.mid[N][p], xi.mid[N][p]), N, "mid", p);
  q.Y.for_each_slot([&](int k, Slot s) {
    for (int p = 0; p < n; ++p)
      lower.add(to_double(neg_part(S(q.Y.at(k, s)[p] - xi.at(k, s)[p]))), k, slot_name(s), p);
  });

  ResidualTracker sa_int("skorokhod_A_interval", tol), sa_jump("skorokhod_A_jump", tol),
      sb("skorokhod_B", tol);
  for (int k = 0; k <= N; ++k)
    for (int p = 0; p < n; ++p) {
      S dA = q.A.mid[k][p] - q.A.minus[k][p];
      S gap = q.Y.minus[k][p] - xi.minus[k][p];
      sa_jump.add(to_double(pos_part(min_of(dA, gap))), k, "minus", p);
      S dB = q.B.mid[k][p] - q.B.minus[k][p];
      gap = q.Y.mid[k][p] - xi.mid[k][p];
      sb.add(to_double(pos_part(min_of(dB, gap))), k, "mid", p);
      if (k < N) {
        S a = q.A.minus[k + 1][p] - q.A.plus[k][p];
        gap = q.Y.plus[k][p] - xi.plus[k][p];
        sa_int.add(to_double(pos_part(min_of(a, gap))), k, "plus", p);
      }
    }
  for (auto* t : {&eq, &term, &lower, &sa_int, &sa_jump, &sb}) r.entries.push_back(t->entry());
  return r;
}

#define PDRBSDE_INSTANTIATE(S)                                                                         \
  template LadlagProcess<S> pre_value(const FilteredSpace&, const LadlagProcess<S>&);                  \
  template RbsdeQuintuple<S> pre_operator(const FilteredSpace&, const LadlagProcess<S>&);              \
  template LadlagProcess<S> snell_bruteforce(const FilteredSpace&, const LadlagProcess<S>&);           \
  template MertensParts<S> mertens_decompose(const FilteredSpace&, const LadlagProcess<S>&, double);   \
  template LadlagProcess<S> equation_rhs(const FilteredSpace&, const RandomVariable<S>&,               \
                                         const IntegrandProcess<S>&, const IntegrandProcess<S>&,       \
                                         const LadlagProcess<S>&, const LadlagProcess<S>&,             \
                                         const LadlagProcess<S>&, const LadlagProcess<S>&,             \
                                         const LadlagProcess<S>&);                                     \
  template VerificationReport verify_rbsde_solution(const FilteredSpace&, const LadlagProcess<S>&,     \
                                                    const RbsdeQuintuple<S>&, double);

PDRBSDE_INSTANTIATE(double)
PDRBSDE_INSTANTIATE(Rational)

}  // namespace pdrbsde

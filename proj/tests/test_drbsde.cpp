#include "pdrbsde/drbsde.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

namespace {

using namespace pdrbsde;
using pdrbsde::testing::all_zero;
using pdrbsde::testing::identical;
using Q = Rational;

FilteredSpace one_step() {
  SpaceSpec s;
  s.N = 1;
  s.T = Rational(1, 4);
  s.quasi_left_continuous = true;
  return build_space(s);
}

FilteredSpace two_step_marked() {
  SpaceSpec s;
  s.N = 2;
  s.T = Rational(1, 2);
  s.marks = {{1, {"a", "b"}, {{Rational(1, 3), Rational(2, 3)}}}, {2, {"c", "d"}, {{Rational(1, 2), Rational(1, 2)}}}};
  return build_space(s);
}

IntegrandProcess<Q> random_driver(const FilteredSpace& sp, std::mt19937_64& rng) {
  auto g = IntegrandProcess<Q>::zeros(sp);
  for (int k = 0; k < sp.N; ++k)
    for (const auto& atom : sp.sigma_mid[k].atoms) {
      Q v(static_cast<long>(rng() % 17) - 8, 4);
      for (int p : atom) g.z[k][p] = v;
    }
  return g;
}

BarrierPair<Q> random_barriers(const FilteredSpace& sp, std::mt19937_64& rng) {
  BarrierPair<Q> b;
  b.lower = random_predictable<Q>(sp, rng, -8, 8, 4);
  auto gap = random_predictable<Q>(sp, rng, -2, 6, 4);
  gap.for_each_slot([&](int k, Slot s) {
    for (auto& v : gap.at(k, s)) v = pos_part(v);
  });
  gap.minus[0] = gap.mid[0];
  b.upper = b.lower + gap;
  b.upper.mid[sp.N] = b.lower.mid[sp.N];
  return b;
}

// E[X | atom of P containing p], summed path by path.
Q atom_mean(const FilteredSpace& sp, const RandomVariable<Q>& x, const Partition& P, int p) {
  Q num = 0, den = 0;
  for (int q = 0; q < sp.n_paths; ++q)
    if (P.atom_of[q] == P.atom_of[p]) {
      num += sp.weight_q[q] * x[q];
      den += sp.weight_q[q];
    }
  return num / den;
}

TEST(BarrierViolation, NamesTheCell) {
  auto sp = two_step_marked();
  auto b = BarrierPair<Q>{LadlagProcess<Q>::constant(sp, Q(0)), LadlagProcess<Q>::constant(sp, Q(1))};
  b.upper.mid[sp.N] = b.lower.mid[sp.N];
  EXPECT_FALSE(barrier_violation(sp, b));
  const auto& atom = sp.sigma_mid[1].atoms[sp.sigma_mid[1].atom_of[5]];
  for (int p : atom) b.upper.plus[1][p] = Q(-1);
  auto why = barrier_violation(sp, b);
  ASSERT_TRUE(why);
  EXPECT_NE(why->find("instant 1"), std::string::npos);
  EXPECT_NE(why->find("path " + std::to_string(atom.front())), std::string::npos);
  for (int p : atom) b.upper.plus[1][p] = Q(1);
  b.upper.mid[sp.N][0] = Q(1);
  EXPECT_TRUE(barrier_violation(sp, b));
}

TEST(ShiftBarriers, MartingaleTypeBarrierShiftsToZero) {
  auto sp = two_step_marked();
  std::mt19937_64 rng(71);
  RandomVariable<Q> term(sp.n_paths);
  for (const auto& atom : sp.sigma_minus[sp.N].atoms) {
    Q v(static_cast<long>(rng() % 9), 2);
    for (int p : atom) term[p] = v;
  }
  auto zero = IntegrandProcess<Q>::zeros(sp);
  auto xi = conditional_tail(sp, term, zero);
  xi.kind = Kind::Predictable;
  auto zeta = xi + LadlagProcess<Q>::constant(sp, Q(1));
  zeta.mid[sp.N] = xi.mid[sp.N];
  auto s = shift_barriers(sp, BarrierPair<Q>{xi, zeta}, zero);
  EXPECT_TRUE(all_zero(s.lower));

  auto c = LadlagProcess<Q>::constant(sp, Q(7, 3));
  EXPECT_TRUE(all_zero(shift_barriers(sp, BarrierPair<Q>{c, c}, zero).lower));
}

TEST(ShiftBarriers, MatchesPerAtomSums) {
  auto sp = two_step_marked();
  std::mt19937_64 rng(73);
  auto b = random_barriers(sp, rng);
  auto g = random_driver(sp, rng);
  auto s = shift_barriers(sp, b, g);
  for (int k = 0; k <= sp.N; ++k) {
    RandomVariable<Q> tail(sp.n_paths);
    for (int p = 0; p < sp.n_paths; ++p) {
      tail[p] = b.lower.mid[sp.N][p];
      for (int j = k; j < sp.N; ++j) tail[p] += g.z[j][p] * sp.dt;
    }
    for (int p = 0; p < sp.n_paths; ++p) {
      Q left = atom_mean(sp, tail, sp.sigma_minus[k], p);
      EXPECT_EQ(s.psi.mid[k][p], left);
      EXPECT_EQ(s.psi.minus[k][p], left);
      EXPECT_EQ(s.lower.mid[k][p], b.lower.mid[k][p] - left);
      if (k < sp.N) EXPECT_EQ(s.psi.plus[k][p], atom_mean(sp, tail, sp.sigma_mid[k], p));
    }
  }
}

TEST(Picard, BarriersStraddlingZero) {
  auto sp = two_step_marked();
  BarrierPair<Q> shifted_like{LadlagProcess<Q>::constant(sp, Q(-1)), LadlagProcess<Q>::constant(sp, Q(2))};
  ShiftedBarriers<Q> s{shifted_like.lower, shifted_like.upper, LadlagProcess<Q>::zeros(sp)};
  auto r = picard_coupled(sp, s);
  EXPECT_TRUE(r.trace.converged);
  EXPECT_EQ(r.trace.iterations, 1);
  EXPECT_TRUE(all_zero(r.J));
  EXPECT_TRUE(all_zero(r.Jbar));

  ShiftedBarriers<Q> flat{LadlagProcess<Q>::zeros(sp), LadlagProcess<Q>::zeros(sp), LadlagProcess<Q>::zeros(sp)};
  auto f = picard_coupled(sp, flat);
  EXPECT_TRUE(all_zero(f.J));
  EXPECT_TRUE(all_zero(f.Jbar));
}

TEST(Picard, RandomPairsReachFixedPointAndVerify) {
  auto sp = two_step_marked();
  std::mt19937_64 rng(79);
  for (int t = 0; t < 20; ++t) {
    auto b = random_barriers(sp, rng);
    auto g = random_driver(sp, rng);
    auto run = solve_drbsde(sp, b, g);
    EXPECT_EQ(run.picard.trace.fixed_point_residual, 0.0);
    EXPECT_EQ(run.picard.trace.monotonicity_violations, 0);
    auto rep = verify_drbsde_solution(sp, g, b, run.solution);
    EXPECT_TRUE(rep.all_pass()) << rep.to_json().dump();
    EXPECT_TRUE(identical(run.solution.Y, hand_recursion(sp, b, g))) << t;

    PicardOptions gs;
    gs.gauss_seidel = true;
    auto again = solve_drbsde(sp, b, g, gs);
    EXPECT_TRUE(identical(again.solution.Y, run.solution.Y));
    EXPECT_LE(again.picard.trace.iterations, run.picard.trace.iterations);
  }
}

TEST(Picard, FloatModeAgreesWithRational) {
  auto sp = two_step_marked();
  std::mt19937_64 rng(83);
  for (int t = 0; t < 10; ++t) {
    auto b = random_barriers(sp, rng);
    auto g = random_driver(sp, rng);
    auto q = solve_drbsde(sp, b, g);
    BarrierPair<double> bd{convert<double>(b.lower), convert<double>(b.upper)};
    auto d = solve_drbsde(sp, bd, convert<double>(g));
    EXPECT_LE(sup_distance(convert<double>(q.solution.Y), d.solution.Y), 1e-12);
    EXPECT_TRUE(verify_drbsde_solution(sp, convert<double>(g), bd, d.solution, 1e-10).all_pass());
  }
}

TEST(Picard, IterationCapRaisesDivergence) {
  auto sp = two_step_marked();
  std::mt19937_64 rng(89);
  auto b = random_barriers(sp, rng);
  auto g = random_driver(sp, rng);
  PicardOptions opts;
  opts.max_iter = 1;
  bool threw = false;
  try {
    solve_drbsde(sp, b, g, opts);
  } catch (const Divergence&) {
    threw = true;
  }
  auto full = solve_drbsde(sp, b, g);
  EXPECT_EQ(threw, full.picard.trace.iterations > 1);
  EXPECT_EQ(mokobodzki_certificate(sp, b, g, opts).has_value(), !threw);
}

TEST(Assemble, PinnedConstant) {
  auto sp = two_step_marked();
  auto c = LadlagProcess<Q>::constant(sp, Q(3, 2));
  auto zero = IntegrandProcess<Q>::zeros(sp);
  BarrierPair<Q> b{c, c};
  auto run = solve_drbsde(sp, b, zero);
  const auto& s = run.solution;
  EXPECT_TRUE(identical(s.Y, c));
  for (const auto* x : {&s.M, &s.A, &s.B, &s.A2, &s.B2}) EXPECT_TRUE(all_zero(*x));
  EXPECT_TRUE(identical(s.Z, zero));
}

TEST(Assemble, UnconstrainedIsConditionalTail) {
  auto sp = two_step_marked();
  std::mt19937_64 rng(97);
  auto g = random_driver(sp, rng);
  BarrierPair<Q> b{LadlagProcess<Q>::constant(sp, Q(-100)), LadlagProcess<Q>::constant(sp, Q(100))};
  RandomVariable<Q> term(sp.n_paths);
  for (const auto& atom : sp.sigma_minus[sp.N].atoms) {
    Q v(static_cast<long>(rng() % 9), 4);
    for (int p : atom) term[p] = v;
  }
  b.lower.mid[sp.N] = b.upper.mid[sp.N] = term;
  auto run = solve_drbsde(sp, b, g);
  const auto& s = run.solution;
  EXPECT_TRUE(identical(s.Y, conditional_tail(sp, term, g)));
  for (const auto* x : {&s.A, &s.B, &s.A2, &s.B2}) EXPECT_TRUE(all_zero(*x));

  auto cert = mokobodzki_certificate(sp, b, g);
  ASSERT_TRUE(cert);
  EXPECT_TRUE(check_certificate(sp, b, *cert).all_pass());
}

// Hand-solved one-step doubly reflected problem with g = 1.
TEST(Assemble, HandSolvedOneStep) {
  auto sp = one_step();
  ASSERT_EQ(sp.dw_sign[0], (std::vector<int>{1, -1}));
  BarrierPair<Q> b{LadlagProcess<Q>::zeros(sp, Kind::Predictable), LadlagProcess<Q>::zeros(sp, Kind::Predictable)};
  b.lower.minus[0] = b.lower.mid[0] = {Q(0), Q(0)};
  b.upper.minus[0] = b.upper.mid[0] = {Q(2), Q(2)};
  b.lower.plus[0] = {Q(1, 2), Q(1, 2)};
  b.upper.plus[0] = {Q(1), Q(1)};
  b.lower.minus[1] = {Q(2), Q(-1)};
  b.upper.minus[1] = {Q(3), Q(0)};
  b.lower.mid[1] = b.upper.mid[1] = {Q(1), Q(-1)};
  auto g = IntegrandProcess<Q>::constant(sp, Q(1));
  auto run = solve_drbsde(sp, b, g);
  const auto& s = run.solution;
  EXPECT_EQ(s.Y.mid[0], (RandomVariable<Q>{Q(3, 4), Q(3, 4)}));
  EXPECT_EQ(s.Y.plus[0], (RandomVariable<Q>{Q(3, 4), Q(3, 4)}));
  EXPECT_EQ(s.Y.minus[1], (RandomVariable<Q>{Q(2), Q(-1)}));
  EXPECT_EQ(s.Y.mid[1], (RandomVariable<Q>{Q(1), Q(-1)}));
  EXPECT_EQ(s.Z.z[0], (RandomVariable<Q>{Q(3), Q(3)}));
  EXPECT_EQ(s.A.minus[1], (RandomVariable<Q>{Q(0), Q(0)}));
  EXPECT_EQ(s.A.mid[1], (RandomVariable<Q>{Q(1), Q(0)}));
  for (const auto* x : {&s.M, &s.B, &s.A2, &s.B2}) EXPECT_TRUE(all_zero(*x));
  EXPECT_TRUE(verify_drbsde_solution(sp, g, b, s).all_pass());
}

TEST(VerifyDrbsde, SwappedReflectorsAreFlagged) {
  auto sp = two_step_marked();
  std::mt19937_64 rng(101);
  int flagged = 0;
  for (int t = 0; t < 20; ++t) {
    auto b = random_barriers(sp, rng);
    auto g = random_driver(sp, rng);
    auto s = solve_drbsde(sp, b, g).solution;
    if (identical(s.A, s.A2)) continue;
    std::swap(s.A, s.A2);
    auto rep = verify_drbsde_solution(sp, g, b, s);
    EXPECT_FALSE(rep.all_pass());
    bool skorokhod = false, jump = false;
    for (const auto& f : rep.failures()) {
      skorokhod = skorokhod || f.rfind("skorokhod", 0) == 0;
      jump = jump || f.rfind("jump", 0) == 0 || f.rfind("equation", 0) == 0;
    }
    EXPECT_TRUE(skorokhod);
    ++flagged;
  }
  EXPECT_GT(flagged, 0);
}

TEST(MutuallySingular, Examples) {
  auto sp = two_step_marked();
  auto P = LadlagProcess<Q>::zeros(sp, Kind::FiniteVariation);
  auto R = P;
  for (int p = 0; p < sp.n_paths; ++p) {
    P.mid[2][p] = 1;
    P.minus[2][p] = 0;
    R.minus[1][p] = R.mid[1][p] = R.plus[1][p] = R.minus[2][p] = R.mid[2][p] = 1;
  }
  // P jumps at instant 2 only, R jumps at instant 1 only
  EXPECT_TRUE(mutually_singular(P, R).singular);
  auto R2 = R;
  for (int p = 0; p < sp.n_paths; ++p) R2.mid[2][p] = 3;
  auto s = mutually_singular(P, R2);
  EXPECT_FALSE(s.singular);
  EXPECT_GT(s.overlap, 0.0);
}

TEST(Certificate, ZeroProblem) {
  auto sp = two_step_marked();
  auto z = LadlagProcess<Q>::zeros(sp, Kind::Predictable);
  auto c = mokobodzki_certificate(sp, BarrierPair<Q>{z, z}, IntegrandProcess<Q>::zeros(sp));
  ASSERT_TRUE(c);
  EXPECT_TRUE(all_zero(c->H));
  EXPECT_TRUE(all_zero(c->Hbar));
}

TEST(Certificate, RandomScenariosPassAndAreMinimal) {
  auto sp = two_step_marked();
  std::mt19937_64 rng(103);
  for (int t = 0; t < 10; ++t) {
    auto b = random_barriers(sp, rng);
    auto g = random_driver(sp, rng);
    auto run = solve_drbsde(sp, b, g);
    auto cert = certificate_from_solution(sp, g, b, run.solution);
    auto rep = check_certificate(sp, b, cert);
    EXPECT_TRUE(rep.all_pass()) << rep.to_json().dump();
    EXPECT_TRUE(identical(cert.H - cert.Hbar, run.solution.Y));

    auto base = reflector_pair(sp, run.solution);
    EXPECT_TRUE(identical(base.H - base.Hbar, run.picard.J - run.picard.Jbar));
    auto self = minimality_check(sp, run.picard.J, run.picard.Jbar,
                                 CertificatePair<Q>{run.picard.J, run.picard.Jbar}, run.shifted);
    EXPECT_TRUE(self.pass) << self.message;
    auto one = LadlagProcess<Q>::constant(sp, Q(1));
    auto up = minimality_check(sp, run.picard.J, run.picard.Jbar,
                               CertificatePair<Q>{run.picard.J + one, run.picard.Jbar + one}, run.shifted);
    EXPECT_TRUE(up.pass) << up.message;
    for (int r = 0; r < 5; ++r) {
      auto m = minimality_check(sp, run.picard.J, run.picard.Jbar, random_dominating_pair(sp, base, rng), run.shifted);
      EXPECT_TRUE(m.pass) << m.message;
    }
  }
}

TEST(Certificate, MinimalityRejectsInvalidPair) {
  auto sp = two_step_marked();
  std::mt19937_64 rng(107);
  auto b = random_barriers(sp, rng);
  auto g = random_driver(sp, rng);
  auto run = solve_drbsde(sp, b, g);
  auto z = LadlagProcess<Q>::zeros(sp, Kind::Predictable);
  auto m = minimality_check(sp, run.picard.J, run.picard.Jbar, CertificatePair<Q>{z, z}, run.shifted);
  if (!all_zero(run.picard.J) || !all_zero(run.picard.Jbar)) EXPECT_FALSE(m.pass);
}

}  // namespace

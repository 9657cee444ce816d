#include "pdrbsde/calculus_checks.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace {

using namespace pdrbsde;
using pdrbsde::testing::all_zero;
using pdrbsde::testing::identical;
using Q = Rational;

FilteredSpace two_step_marked() {
  SpaceSpec s;
  s.N = 2;
  s.T = Rational(1, 2);
  s.marks = {{1, {"a", "b", "c"}, {{Rational(1, 4), Rational(1, 4), Rational(1, 2)}}}};
  return build_space(s);
}

Polynomial poly(int n, std::vector<Polynomial::Term> terms) {
  Polynomial f;
  f.n = n;
  f.terms = std::move(terms);
  return f;
}

TEST(Polynomial, EvalDerivativeDegree) {
  auto f = poly(2, {{Q(3), {2, 1}}, {Q(-1, 2), {0, 3}}, {Q(5), {0, 0}}});
  EXPECT_EQ(f.degree(), 3);
  EXPECT_EQ(f.eval(std::vector<Q>{Q(2), Q(-1)}), Q(3 * 4 * -1) + Q(1, 2) + 5);
  auto dx = f.derivative(0);
  EXPECT_EQ(dx.eval(std::vector<Q>{Q(2), Q(-1)}), Q(-12));
  auto dy = f.derivative(1);
  EXPECT_EQ(dy.eval(std::vector<Q>{Q(2), Q(-1)}), Q(12) - Q(3, 2));
  EXPECT_FALSE(f.to_string().empty());
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) EXPECT_LE(Polynomial::random(3, 4, rng).degree(), 4);
}

TEST(OptionalSemimartingale, RoundTripAndWellFormed) {
  auto sp = two_step_marked();
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    auto x = OptionalSemimartingale<Q>::random(sp, rng);
    EXPECT_TRUE(x.well_formed(sp));
    auto proc = x.to_process(sp);
    auto back = OptionalSemimartingale<Q>::from_process(sp, proc);
    EXPECT_TRUE(back.well_formed(sp));
    EXPECT_TRUE(identical(back.to_process(sp), proc));
  }
}

TEST(GalchoukLenglart, LinearFunctionTelescopes) {
  auto sp = two_step_marked();
  std::mt19937_64 rng(5);
  auto f = poly(2, {{Q(2), {1, 0}}, {Q(-3), {0, 1}}, {Q(7), {0, 0}}});
  std::vector<OptionalSemimartingale<Q>> X{OptionalSemimartingale<Q>::random(sp, rng),
                                           OptionalSemimartingale<Q>::random(sp, rng)};
  auto r = galchouk_lenglart_check(sp, X, f);
  EXPECT_EQ(r.max_deviation, 0.0);
  EXPECT_TRUE(all_zero(r.left_jumps));
  EXPECT_TRUE(all_zero(r.right_jumps));
  EXPECT_TRUE(all_zero(r.bracket));
}

TEST(GalchoukLenglart, ConstantProcess) {
  auto sp = two_step_marked();
  auto x = OptionalSemimartingale<Q>::zeros(sp);
  for (auto& v : x.X0) v = Q(4);
  auto r = galchouk_lenglart_check(sp, std::vector{x}, poly(1, {{Q(1), {4}}}));
  EXPECT_TRUE(all_zero(r.lhs));
  EXPECT_TRUE(all_zero(r.rhs));
}

TEST(GalchoukLenglart, RandomPolynomialsExact) {
  auto sp = two_step_marked();
  std::mt19937_64 rng(7);
  for (int t = 0; t < 40; ++t) {
    int n = 1 + static_cast<int>(rng() % 3);
    std::vector<OptionalSemimartingale<Q>> X;
    for (int i = 0; i < n; ++i) X.push_back(OptionalSemimartingale<Q>::random(sp, rng));
    auto f = Polynomial::random(n, 4, rng);
    auto r = galchouk_lenglart_check(sp, X, f);
    EXPECT_EQ(r.max_deviation, 0.0) << f.to_string();
    EXPECT_TRUE(identical(r.lhs, r.rhs));
  }
}

TEST(GalchoukLenglart, DimensionMismatch) {
  auto sp = two_step_marked();
  EXPECT_THROW(galchouk_lenglart_check(sp, std::vector{OptionalSemimartingale<Q>::zeros(sp)}, poly(2, {{Q(1), {1, 1}}})),
               std::invalid_argument);
}

TEST(GalchoukLenglart, WeightedSquareMatchesCorollary) {
  auto sp = two_step_marked();
  std::mt19937_64 rng(11);
  auto y = OptionalSemimartingale<Q>::random(sp, rng);
  auto f = poly(2, {{Q(1), {1, 2}}});
  auto r = galchouk_lenglart_check(sp, std::vector{OptionalSemimartingale<Q>::exponential_weight(sp, 5.0), y}, f);
  EXPECT_EQ(r.max_deviation, 0.0);
  auto c = corollary_expansion(sp, y, 5.0);
  EXPECT_EQ(c.max_deviation, 0.0);
  EXPECT_TRUE(identical(c.lhs, r.lhs));
  EXPECT_TRUE(identical(c.drift, r.a_integral[0]));
}

TEST(Corollary, ZeroProcess) {
  auto sp = two_step_marked();
  auto c = corollary_expansion(sp, OptionalSemimartingale<Q>::zeros(sp), 5.0);
  for (const auto* x : {&c.lhs, &c.drift, &c.a_integral, &c.bracket, &c.bm_integral, &c.left_jump_sum,
                        &c.right_jump_sum})
    EXPECT_TRUE(all_zero(*x));
}

TEST(Corollary, ConstantProcessOnlyDrift) {
  auto sp = two_step_marked();
  auto y = OptionalSemimartingale<Q>::zeros(sp);
  for (auto& v : y.X0) v = Q(3, 2);
  auto c = corollary_expansion(sp, y, 5.0);
  EXPECT_TRUE(identical(c.lhs, c.drift));
  for (const auto* x : {&c.a_integral, &c.bm_integral, &c.left_jump_sum, &c.right_jump_sum})
    EXPECT_TRUE(all_zero(*x));
  for (int k = 0; k <= sp.N; ++k)
    EXPECT_NEAR(to_double(c.lhs.mid[k][0]), 2.25 * (std::exp(5.0 * 0.25 * k) - 1), 1e-12);
  EXPECT_EQ(c.summary()["max_deviation"], 0.0);
}

TEST(Corollary, SolutionDifferenceInFloat) {
  auto sp = two_step_marked();
  std::mt19937_64 rng(13);
  BarrierPair<double> b;
  b.lower = convert<double>(random_predictable<Q>(sp, rng, -8, 8, 4));
  b.upper = b.lower + convert<double>(random_predictable<Q>(sp, rng, 0, 6, 4));
  b.upper.mid[sp.N] = b.lower.mid[sp.N];
  auto g = IntegrandProcess<double>::constant(sp, 0.5);
  auto gbar = IntegrandProcess<double>::constant(sp, -0.75);
  auto s = solve_drbsde(sp, b, g).solution;
  auto sbar = solve_drbsde(sp, b, gbar).solution;
  auto y = OptionalSemimartingale<double>::from_process(sp, s.Y - sbar.Y);
  EXPECT_LE(corollary_expansion(sp, y, 5.0).max_deviation, 1e-10);
}

TEST(Apriori, EqualDriversGiveZeroDifferences) {
  auto sp = two_step_marked();
  std::mt19937_64 rng(17);
  BarrierPair<Q> b;
  b.lower = random_predictable<Q>(sp, rng, -8, 8, 4);
  b.upper = b.lower + random_predictable<Q>(sp, rng, 0, 6, 4);
  b.upper.mid[sp.N] = b.lower.mid[sp.N];
  auto g = IntegrandProcess<Q>::constant(sp, Q(1, 3));
  auto s = solve_drbsde(sp, b, g).solution;
  PicardOptions gs;
  gs.gauss_seidel = true;
  auto sbar = solve_drbsde(sp, b, g, gs).solution;
  auto r = apriori_estimate_check(sp, s, sbar, g, g, ContractionParams{});
  EXPECT_TRUE(r.identical);
  EXPECT_EQ(r.lhs_l1, 0.0);
  EXPECT_EQ(r.rhs_l1, 0.0);
  EXPECT_TRUE(r.l1_holds);
  EXPECT_EQ(r.y_norm, 0.0);
}

TEST(Apriori, ConstantShiftUnconstrainedHoldsStrictly) {
  auto sp = two_step_marked();
  BarrierPair<Q> b{LadlagProcess<Q>::constant(sp, Q(-100)), LadlagProcess<Q>::constant(sp, Q(100))};
  b.lower.mid[sp.N].assign(sp.n_paths, Q(1));
  b.upper.mid[sp.N] = b.lower.mid[sp.N];
  auto g = IntegrandProcess<Q>::constant(sp, Q(1));
  auto gbar = IntegrandProcess<Q>::constant(sp, Q(5, 4));
  auto s = solve_drbsde(sp, b, g).solution;
  auto sbar = solve_drbsde(sp, b, gbar).solution;
  auto r = apriori_estimate_check(sp, s, sbar, g, gbar, ContractionParams{});
  EXPECT_TRUE(r.l1_holds);
  EXPECT_GT(r.margin_l1, 0.0);
  // ||g - gbar||^2 = (1/16) (1 + e^{5/4}) / 4
  EXPECT_NEAR(r.rhs_l1, 0.25 * (1.0 / 16) * 0.25 * (1 + std::exp(1.25)), 1e-12);
  EXPECT_GT(r.y_norm, 0.0);
  EXPECT_GE(r.empirical_c, 0.0);
  EXPECT_EQ(r.to_json()["holds"], true);
}

TEST(Apriori, RejectsSmallBeta) {
  auto sp = two_step_marked();
  SolutionSeptuple<Q> s{LadlagProcess<Q>::zeros(sp), IntegrandProcess<Q>::zeros(sp), LadlagProcess<Q>::zeros(sp),
                        LadlagProcess<Q>::zeros(sp), LadlagProcess<Q>::zeros(sp), LadlagProcess<Q>::zeros(sp),
                        LadlagProcess<Q>::zeros(sp)};
  ContractionParams p;
  p.beta = 4.0;
  EXPECT_THROW(apriori_estimate_check(sp, s, s, IntegrandProcess<Q>::zeros(sp), IntegrandProcess<Q>::zeros(sp), p),
               std::invalid_argument);
}

}  // namespace

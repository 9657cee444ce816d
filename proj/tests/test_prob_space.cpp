#include "pdrbsde/prob_space.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

namespace {

using namespace pdrbsde;

SpaceSpec coin(int N, Rational T = Rational(1, 4)) {
  SpaceSpec s;
  s.N = N;
  s.T = T;
  s.quasi_left_continuous = true;
  return s;
}

MarkSpec fair_mark(int instant) {
  return {instant, {"a", "b"}, {{Rational(1, 2), Rational(1, 2)}}};
}

TEST(BuildSpace, SingleStepBinaryTree) {
  auto sp = build_space(coin(1));
  EXPECT_EQ(sp.n_paths, 2);
  EXPECT_EQ(sp.sigma_mid[0].size(), 1u);
  EXPECT_EQ(sp.sigma_minus[1].size(), 2u);
  EXPECT_EQ(sp.sqrt_dt, Rational(1, 2));
  EXPECT_TRUE(sp.non_qlc_instants().empty());
}

TEST(BuildSpace, MarkAtTerminalInstant) {
  auto spec = coin(1);
  spec.quasi_left_continuous = false;
  spec.marks = {fair_mark(1)};
  auto sp = build_space(spec);
  EXPECT_EQ(sp.n_paths, 4);
  EXPECT_EQ(sp.sigma_minus[1].size(), 2u);
  EXPECT_EQ(sp.sigma_mid[1].size(), 4u);
  EXPECT_EQ(sp.non_qlc_instants(), std::vector<int>{1});
}

TEST(BuildSpace, MarksAtEveryInstantRefineInOrder) {
  auto spec = coin(2, Rational(1, 2));
  spec.quasi_left_continuous = false;
  spec.marks = {fair_mark(1), fair_mark(2)};
  auto sp = build_space(spec);
  EXPECT_EQ(sp.n_paths, 16);
  std::vector<const Partition*> chain;
  for (int k = 0; k <= sp.N; ++k) {
    chain.push_back(&sp.sigma_minus[k]);
    chain.push_back(&sp.sigma_mid[k]);
  }
  for (std::size_t i = 1; i < chain.size(); ++i) EXPECT_TRUE(chain[i]->refines(*chain[i - 1])) << i;
  EXPECT_EQ(sp.sigma_minus[0].size(), 1u);
  EXPECT_EQ(sp.sigma_mid[2].size(), 16u);
}

TEST(BuildSpace, IncrementsAreCenteredWithVarianceDt) {
  auto spec = coin(3, Rational(3, 4));
  spec.quasi_left_continuous = false;
  spec.marks = {{1, {"u", "m", "d"}, {{Rational(1, 6), Rational(1, 3), Rational(1, 2)}}}};
  auto sp = build_space(spec);
  for (int k = 0; k < sp.N; ++k)
    for (const auto& atom : sp.sigma_mid[k].atoms) {
      Rational mass = 0, first = 0, second = 0;
      std::set<int> signs;
      for (int p : atom) {
        Rational w = sp.weight_q[p], d = sp.dW<Rational>(k, p);
        mass += w;
        first += w * d;
        second += w * d * d;
        signs.insert(sp.dw_sign[k][p]);
      }
      EXPECT_EQ(first, 0);
      EXPECT_EQ(second / mass, sp.dt);
      EXPECT_EQ(signs.size(), 2u);
    }
}

TEST(BuildSpace, PerAtomMarkProbabilities) {
  auto spec = coin(1);
  spec.quasi_left_continuous = false;
  spec.marks = {{1, {"a", "b"}, {{Rational(1, 3), Rational(2, 3)}, {Rational(3, 4), Rational(1, 4)}}}};
  auto sp = build_space(spec);
  Rational total = 0;
  for (const auto& w : sp.weight_q) total += w;
  EXPECT_EQ(total, 1);
  EXPECT_EQ(sp.weight_q[0], Rational(1, 6));
  EXPECT_EQ(sp.weight_q[3], Rational(1, 8));
}

TEST(BuildSpace, RejectsInvalidSpecs) {
  EXPECT_THROW(build_space(coin(0)), SpaceError);
  auto spec = coin(1);
  spec.quasi_left_continuous = false;
  EXPECT_THROW(build_space(spec), SpaceError);
  spec.marks = {{1, {"a", "b"}, {{Rational(1, 2), Rational(1, 3)}}}};
  EXPECT_THROW(build_space(spec), SpaceError);
  spec.marks = {{1, {"a", "a"}, {{Rational(1, 2), Rational(1, 2)}}}};
  EXPECT_THROW(build_space(spec), SpaceError);
  spec.marks = {{1, {"a", "b"}, {{Rational(1), Rational(0)}}}};
  EXPECT_THROW(build_space(spec), SpaceError);
  spec = coin(1);
  spec.marks = {fair_mark(1)};
  EXPECT_THROW(build_space(spec), SpaceError);
}

TEST(BuildSpace, IrrationalRootOfStep) {
  auto sp = build_space(coin(2, Rational(1, 4)));
  EXPECT_FALSE(sp.has_exact_sqrt);
  EXPECT_THROW(sp.sqrt_step<Rational>(), SpaceError);
  EXPECT_NEAR(sp.sqrt_step<double>(), std::sqrt(0.125), 1e-15);
}

TEST(CondExpect, ConstantIsFixed) {
  auto sp = build_space(coin(2, Rational(1, 2)));
  RandomVariable<Rational> x(sp.n_paths, Rational(7, 3));
  for (const auto& P : sp.sigma_minus) EXPECT_EQ(cond_expect(sp, x, P), x);
}

TEST(CondExpect, PlainAverage) {
  auto sp = build_space(coin(1));
  EXPECT_EQ(cond_expect(sp, RandomVariable<Rational>{2, 4}, sp.sigma_minus[0]), (RandomVariable<Rational>{3, 3}));
}

TEST(CondExpect, WeightedAveragePerAtom) {
  std::vector<Rational> w{Rational(1, 2), Rational(1, 4), Rational(1, 4)};
  auto P = Partition::from_atoms({{0}, {1, 2}}, 3);
  auto out = cond_expect(RandomVariable<Rational>{1, 2, 3}, P, w);
  EXPECT_EQ(out, (RandomVariable<Rational>{1, Rational(5, 2), Rational(5, 2)}));
}

TEST(CondExpect, TowerProperty) {
  auto spec = coin(2, Rational(1, 2));
  spec.quasi_left_continuous = false;
  spec.marks = {{1, {"a", "b"}, {{Rational(1, 3), Rational(2, 3)}}}};
  auto sp = build_space(spec);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    RandomVariable<Rational> x(sp.n_paths);
    for (auto& v : x) v = Rational(static_cast<long>(rng() % 41) - 20, 7);
    auto fine = cond_expect(sp, x, sp.sigma_mid[1]);
    auto coarse = cond_expect(sp, x, sp.sigma_minus[1]);
    EXPECT_EQ(cond_expect(sp, fine, sp.sigma_minus[1]), coarse);
    EXPECT_EQ(expectation(sp, coarse), expectation(sp, x));
    EXPECT_TRUE(is_measurable(coarse, sp.sigma_minus[1]));
  }
}

TEST(IsMeasurable, Basics) {
  auto spec = coin(1);
  spec.quasi_left_continuous = false;
  spec.marks = {fair_mark(1)};
  auto sp = build_space(spec);
  EXPECT_TRUE(is_measurable(RandomVariable<Rational>(sp.n_paths, 5), sp.sigma_minus[0]));
  RandomVariable<Rational> dw(sp.n_paths), eta(sp.n_paths);
  for (int p = 0; p < sp.n_paths; ++p) {
    dw[p] = sp.dW<Rational>(0, p);
    eta[p] = sp.mark[1][p];
  }
  EXPECT_FALSE(is_measurable(dw, sp.sigma_mid[0]));
  EXPECT_EQ(first_non_measurable_atom(dw, sp.sigma_mid[0]), 0);
  EXPECT_TRUE(is_measurable(eta, sp.sigma_mid[1]));
  EXPECT_FALSE(is_measurable(eta, sp.sigma_minus[1]));
}

TEST(IsMeasurable, ToleranceInFloatMode) {
  auto P = Partition::trivial(2);
  EXPECT_FALSE(is_measurable(RandomVariable<double>{1.0, 1.0 + 1e-9}, P));
  EXPECT_TRUE(is_measurable(RandomVariable<double>{1.0, 1.0 + 1e-12}, P, 1e-10));
}

}  // namespace

#include "pdrbsde/driver_solver.hpp"
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
  s.marks = {{1, {"a", "b"}, {{Rational(1, 3), Rational(2, 3)}}}};
  return build_space(s);
}

IntegrandProcess<Q> random_integrand(const FilteredSpace& sp, std::mt19937_64& rng) {
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
  auto gap = random_predictable<Q>(sp, rng, 0, 6, 4);
  b.upper = b.lower + gap;
  b.upper.mid[sp.N] = b.lower.mid[sp.N];
  return b;
}

TEST(Drivers, LipschitzProbe) {
  auto sp = two_step_marked();
  std::mt19937_64 rng(5);
  auto c = random_integrand(sp, rng);
  auto lin = linear_driver<Q>(Q(1, 2), Q(-1, 4), c);
  EXPECT_EQ(lin.K, 0.5);
  auto probe = check_lipschitz(sp, lin, rng);
  EXPECT_TRUE(probe.pass);
  EXPECT_LE(probe.worst_ratio, 0.5);
  EXPECT_GT(probe.probes, 0);
  lin.K = 0.1;
  EXPECT_FALSE(check_lipschitz(sp, lin, rng).pass);
  EXPECT_EQ(zero_driver<Q>().eval(0, 0, Q(3), Q(4)), 0);
  EXPECT_EQ(process_driver<Q>(c).eval(1, 2, Q(3), Q(4)), c.z[1][2]);
}

TEST(Contraction, Modulus) {
  ContractionParams p;
  EXPECT_DOUBLE_EQ(contraction_modulus(p, 0.01, 1.0), 2 * 0.01 * 2 * 0.25 * 67);
  EXPECT_FALSE(contraction_violation(p, 0.01, 1.0));
  EXPECT_TRUE(contraction_violation(p, 0.1, 1.0));
  p.beta = 4;
  EXPECT_TRUE(contraction_violation(p, 0.0, 1.0));
}

TEST(Norms, H2) {
  auto sp = two_step_marked();
  EXPECT_DOUBLE_EQ(beta_norm_h2(sp, IntegrandProcess<Q>::constant(sp, Q(3)), 0.0), 9 * 0.5);
  EXPECT_EQ(beta_norm_h2(sp, IntegrandProcess<Q>::zeros(sp), 5.0), 0.0);
  std::mt19937_64 rng(7);
  auto phi = random_integrand(sp, rng);
  double want = 0;
  for (int p = 0; p < sp.n_paths; ++p)
    for (int k = 0; k < sp.N; ++k) {
      double v = to_double(phi.z[k][p]);
      want += to_double(sp.weight_q[p]) * std::exp(5.0 * 0.25 * k) * 0.25 * v * v;
    }
  EXPECT_NEAR(beta_norm_h2(sp, phi, 5.0), want, 1e-12);
}

TEST(Norms, S2pConstantAndDeterministic) {
  auto sp = two_step_marked();
  EXPECT_NEAR(beta_norm_s2p(sp, LadlagProcess<Q>::constant(sp, Q(2)), 5.0), 4 * std::exp(2.5), 1e-12);
  auto x = LadlagProcess<Q>::zeros(sp, Kind::Predictable);
  x.mid[0].assign(sp.n_paths, Q(1));
  x.mid[1].assign(sp.n_paths, Q(-3));
  x.mid[2].assign(sp.n_paths, Q(2));
  EXPECT_DOUBLE_EQ(beta_norm_s2p(sp, x, 0.0), 9.0);
}

// Per path the norm takes the largest weighted square over every slot; the oracle
// enumerates every random choice of (instant, slot) per path.
TEST(Norms, S2pMatchesEnumeratedRandomTimes) {
  SpaceSpec s;
  s.N = 2;
  s.T = Rational(1, 2);
  s.quasi_left_continuous = true;
  auto sp = build_space(s);
  std::mt19937_64 rng(9);
  const double beta = 5.0;
  for (int t = 0; t < 5; ++t) {
    auto x = random_predictable<Q>(sp, rng, -8, 8, 4);
    double best = -1;
    std::vector<std::pair<int, Slot>> cells;
    x.for_each_slot([&](int k, Slot sl) { cells.emplace_back(k, sl); });
    const int m = static_cast<int>(cells.size());
    int choices = 1;
    for (int p = 0; p < sp.n_paths; ++p) choices *= m;
    for (int code = 0; code < choices; ++code) {
      double v = 0;
      int c = code;
      for (int p = 0; p < sp.n_paths; ++p) {
        auto [k, sl] = cells[c % m];
        c /= m;
        double y = to_double(x.at(k, sl)[p]);
        v += to_double(sp.weight_q[p]) * std::exp(beta * 0.25 * k) * y * y;
      }
      best = std::max(best, v);
    }
    EXPECT_NEAR(beta_norm_s2p(sp, x, beta), best, 1e-9);
  }
}

TEST(Norms, M2) {
  auto sp = two_step_marked();
  EXPECT_EQ(beta_norm_m2(sp, LadlagProcess<Q>::zeros(sp), 5.0), 0.0);
  EXPECT_DOUBLE_EQ(beta_norm_m2(sp, brownian<Q>(sp), 0.0), 0.5);
  std::mt19937_64 rng(13);
  auto m = ito_integral(sp, random_integrand(sp, rng));
  RandomVariable<Q> raw(sp.n_paths);
  for (int p = 0; p < sp.n_paths; ++p) raw[p] = Q(sp.mark[1][p] * 3);
  auto mean = cond_expect(sp, raw, sp.sigma_minus[1]);
  for (int k = 1; k <= sp.N; ++k)
    for (int p = 0; p < sp.n_paths; ++p) {
      Q j = raw[p] - mean[p];
      if (k > 1) m.minus[k][p] += j;
      m.mid[k][p] += j;
      if (k < sp.N) m.plus[k][p] += j;
    }
  ASSERT_TRUE(is_martingale(sp, m));
  auto br = bracket(m, m);
  double want = 0;
  for (int p = 0; p < sp.n_paths; ++p) {
    double acc = 0, prev = 0;
    for (int k = 0; k <= sp.N; ++k) {
      double after_jump = to_double(br.mid[k][p]);
      acc += std::exp(5.0 * 0.25 * k) * (after_jump - prev);
      if (k < sp.N) {
        double after_interval = to_double(br.minus[k + 1][p]);
        acc += std::exp(5.0 * 0.25 * (k + 1)) * (after_interval - after_jump);
        prev = after_interval;
      }
    }
    want += to_double(sp.weight_q[p]) * acc;
  }
  EXPECT_NEAR(beta_norm_m2(sp, m, 5.0), want, 1e-12);
}

TEST(SolveGeneral, SolutionIndependentDriverNeedsOneStep) {
  auto sp = two_step_marked();
  std::mt19937_64 rng(17);
  auto b = random_barriers(sp, rng);
  auto c = random_integrand(sp, rng);
  auto gs = solve_general(sp, process_driver<Q>(c), b, ContractionParams{}, 1e-12, 10);
  ASSERT_TRUE(gs.trace.converged);
  ASSERT_EQ(gs.trace.steps.size(), 2u);
  EXPECT_EQ(gs.trace.steps[1].combined, 0.0);
  auto direct = solve_drbsde(sp, b, c);
  EXPECT_TRUE(identical(gs.run.solution.Y, direct.solution.Y));
  EXPECT_TRUE(identical(gs.g, c));
}

TEST(SolveGeneral, PinnedLinearDecay) {
  auto sp = two_step_marked();
  const Q lambda(1, 64), c(2);
  auto pinned = LadlagProcess<Q>::constant(sp, c);
  BarrierPair<Q> b{pinned, pinned};
  auto driver = linear_driver<Q>(-lambda, Q(0), IntegrandProcess<Q>::zeros(sp));
  auto gs = solve_general(sp, driver, b, ContractionParams{}, 1e-12, 10);
  ASSERT_TRUE(gs.trace.converged);
  const auto& s = gs.run.solution;
  EXPECT_TRUE(identical(s.Y, pinned));
  for (int k = 0; k < sp.N; ++k)
    for (int p = 0; p < sp.n_paths; ++p) {
      EXPECT_EQ(s.A.minus[k + 1][p] - s.A.plus[k][p], lambda * c * sp.dt);
      EXPECT_EQ(gs.g.z[k][p], -lambda * c);
    }
  EXPECT_TRUE(all_zero(s.A2));
  EXPECT_TRUE(verify_drbsde_solution(sp, gs.g, b, s).all_pass());
}

TEST(SolveGeneral, RandomLinearDriverFixedPoint) {
  auto sp = two_step_marked();
  std::mt19937_64 rng(19);
  for (int t = 0; t < 5; ++t) {
    auto b = random_barriers(sp, rng);
    auto driver = linear_driver<double>(1.0 / 64, -1.0 / 128, convert<double>(random_integrand(sp, rng)));
    BarrierPair<double> bd{convert<double>(b.lower), convert<double>(b.upper)};
    auto gs = solve_general(sp, driver, bd, ContractionParams{}, 1e-12, 60);
    ASSERT_TRUE(gs.trace.converged);
    for (std::size_t i = 1; i < gs.trace.steps.size(); ++i) EXPECT_LT(gs.trace.steps[i].ratio, 1.0);
    auto rep = verify_drbsde_solution(sp, gs.g, bd, gs.run.solution, 1e-10);
    EXPECT_TRUE(rep.all_pass()) << rep.to_json().dump();
  }
}

TEST(SolveGeneral, Errors) {
  auto sp = two_step_marked();
  std::mt19937_64 rng(23);
  auto b = random_barriers(sp, rng);
  auto steep = linear_driver<Q>(Q(1), Q(0), IntegrandProcess<Q>::zeros(sp));
  EXPECT_THROW(solve_general(sp, steep, b, ContractionParams{}, 1e-12, 10), std::invalid_argument);
  auto mild = linear_driver<Q>(Q(1, 64), Q(1, 64), random_integrand(sp, rng));
  EXPECT_THROW(solve_general(sp, mild, b, ContractionParams{}, 1e-12, 1), NonContraction);
}

}  // namespace

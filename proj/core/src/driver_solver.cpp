#include "pdrbsde/driver_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pdrbsde {

template <class S>
LipschitzDriver<S> zero_driver() {
  return {[](int, int, const S&, const S&) { return S(0); }, 0.0, "zero"};
}

template <class S>
LipschitzDriver<S> process_driver(IntegrandProcess<S> c) {
  return {[c = std::move(c)](int k, int p, const S&, const S&) { return c.z[k][p]; }, 0.0, "process"};
}

template <class S>
LipschitzDriver<S> linear_driver(const S& a, const S& b, IntegrandProcess<S> c, std::optional<double> K) {
  double k = K ? *K : std::max(to_double(abs_of(a)), to_double(abs_of(b)));
  return {[a, b, c = std::move(c)](int j, int p, const S& y, const S& z) { return S(a * y + b * z + c.z[j][p]); },
          k, "linear"};
}

template <class S>
LipschitzProbe check_lipschitz(const FilteredSpace& space, const LipschitzDriver<S>& driver, std::mt19937_64& rng,
                               int probes_per_instant) {
  LipschitzProbe out;
  auto draw = [&]() { return from_rational<S>(Rational(static_cast<long>(rng() % 4001) - 2000, 100)); };
  for (int k = 0; k < space.N; ++k)
    for (int i = 0; i < probes_per_instant; ++i) {
      int p = static_cast<int>(rng() % static_cast<unsigned long>(space.n_paths));
      S y1 = draw(), z1 = draw(), y2 = draw(), z2 = draw();
      double dist = to_double(abs_of(S(y1 - y2)) + abs_of(S(z1 - z2)));
      ++out.probes;
      if (dist == 0) continue;
      double ratio = abs_diff(driver.eval(k, p, y1, z1), driver.eval(k, p, y2, z2)) / dist;
      out.worst_ratio = std::max(out.worst_ratio, ratio);
    }
  out.pass = out.worst_ratio <= driver.K * (1 + 1e-12) + 1e-15;
  return out;
}

double contraction_modulus(const ContractionParams& p, double K, double T) {
  return 2.0 * K * (1.0 + T) * p.epsilon * p.epsilon * (3.0 + 16.0 * p.c * p.c);
}

std::optional<std::string> contraction_violation(const ContractionParams& p, double K, double T) {
  if (p.epsilon <= 0 || p.c <= 0) return "epsilon and c must be positive";
  if (!(p.beta > 1.0 / (p.epsilon * p.epsilon))) return "beta must exceed 1/epsilon^2";
  double m = contraction_modulus(p, K, T);
  if (!(m < 1.0)) {
    std::ostringstream os;
    os << "2K(1+T)eps^2(3+16c^2) = " << m << " is not below 1";
    return os.str();
  }
  return std::nullopt;
}

template <class S>
double beta_norm_h2(const FilteredSpace& space, const IntegrandProcess<S>& phi, double beta) {
  double total = 0;
  for (int k = 0; k < space.N; ++k) {
    double w = std::exp(beta * space.time_d(k)) * space.dt_d;
    for (int p = 0; p < space.n_paths; ++p) {
      double v = to_double(phi.z[k][p]);
      total += space.weight_d[p] * w * v * v;
    }
  }
  return total;
}

template <class S>
double beta_norm_s2p(const FilteredSpace& space, const LadlagProcess<S>& x, double beta) {
  double total = 0;
  for (int p = 0; p < space.n_paths; ++p) {
    double best = 0;
    for (int k = 0; k <= space.N; ++k) {
      double w = std::exp(beta * space.time_d(k));
      for (const auto* slot : {&x.minus, &x.mid, &x.plus}) {
        if (k == space.N && slot == &x.plus) continue;
        double v = to_double((*slot)[k][p]);
        best = std::max(best, w * v * v);
      }
    }
    total += space.weight_d[p] * best;
  }
  return total;
}

template <class S>
double beta_norm_m2(const FilteredSpace& space, const LadlagProcess<S>& m, double beta) {
  double total = 0;
  for (int p = 0; p < space.n_paths; ++p) {
    double acc = 0;
    for (int k = 0; k <= space.N; ++k) {
      double wk = std::exp(beta * space.time_d(k));
      double j = to_double(m.mid[k][p] - m.minus[k][p]);
      acc += wk * j * j;
      if (k < space.N) {
        double r = to_double(m.plus[k][p] - m.mid[k][p]);
        double i = to_double(m.minus[k + 1][p] - m.plus[k][p]);
        acc += wk * r * r + std::exp(beta * space.time_d(k + 1)) * i * i;
      }
    }
    total += space.weight_d[p] * acc;
  }
  return total;
}

template <class S>
IntegrandProcess<S> freeze_driver(const FilteredSpace& space, const LipschitzDriver<S>& driver,
                                  const LadlagProcess<S>& U, const IntegrandProcess<S>& V) {
  auto g = IntegrandProcess<S>::zeros(space);
  for (int k = 0; k < space.N; ++k)
    for (int p = 0; p < space.n_paths; ++p) g.z[k][p] = driver.eval(k, p, U.plus[k][p], V.z[k][p]);
  return g;
}

template <class S>
GeneralSolution<S> solve_general(const FilteredSpace& space, const LipschitzDriver<S>& driver,
                                 const BarrierPair<S>& b, const ContractionParams& params, double tol,
                                 int max_outer, const PicardOptions& inner) {
  if (auto why = contraction_violation(params, driver.K, to_double(space.T)))
    throw std::invalid_argument("contraction parameters: " + *why);
  GeneralSolution<S> out;
  auto U = LadlagProcess<S>::zeros(space, Kind::Predictable);
  auto V = IntegrandProcess<S>::zeros(space);
  double previous = 0;
  for (int m = 0; m < max_outer; ++m) {
    auto g = freeze_driver(space, driver, U, V);
    out.run = solve_drbsde(space, b, g, inner);
    out.g_inner = g;
    const auto& s = out.run.solution;
    OuterStep step;
    step.index = m;
    step.dU = beta_norm_s2p(space, s.Y - U, params.beta);
    step.dV = beta_norm_h2(space, s.Z - V, params.beta);
    step.combined = step.dU + step.dV;
    step.inner_iterations = out.run.picard.trace.iterations;
    if (m > 0) {
      step.ratio = previous > 0 ? std::sqrt(step.combined / previous) : 0.0;
      out.trace.max_ratio = std::max(out.trace.max_ratio, step.ratio);
    }
    previous = step.combined;
    out.trace.steps.push_back(step);
    U = s.Y;
    V = s.Z;
    if (step.combined <= tol * tol) {
      out.trace.converged = true;
      break;
    }
  }
  out.g = freeze_driver(space, driver, out.run.solution.Y, out.run.solution.Z);
  if (!out.trace.converged) {
    std::ostringstream os;
    os << "outer iteration did not reach tolerance after " << max_outer << " steps (max ratio "
       << out.trace.max_ratio << ")";
    throw NonContraction(os.str());
  }
  return out;
}

#define PDRBSDE_INSTANTIATE(S)                                                                                   \
  template LipschitzDriver<S> zero_driver();                                                                    \
  template LipschitzDriver<S> process_driver(IntegrandProcess<S>);                                              \
  template LipschitzDriver<S> linear_driver(const S&, const S&, IntegrandProcess<S>, std::optional<double>);    \
  template LipschitzProbe check_lipschitz(const FilteredSpace&, const LipschitzDriver<S>&, std::mt19937_64&, int); \
  template double beta_norm_h2(const FilteredSpace&, const IntegrandProcess<S>&, double);                       \
  template double beta_norm_s2p(const FilteredSpace&, const LadlagProcess<S>&, double);                         \
  template double beta_norm_m2(const FilteredSpace&, const LadlagProcess<S>&, double);                          \
  template IntegrandProcess<S> freeze_driver(const FilteredSpace&, const LipschitzDriver<S>&,                   \
                                             const LadlagProcess<S>&, const IntegrandProcess<S>&);              \
  template GeneralSolution<S> solve_general(const FilteredSpace&, const LipschitzDriver<S>&,                    \
                                            const BarrierPair<S>&, const ContractionParams&, double, int,       \
                                            const PicardOptions&);

PDRBSDE_INSTANTIATE(double)
PDRBSDE_INSTANTIATE(Rational)

}  // namespace pdrbsde

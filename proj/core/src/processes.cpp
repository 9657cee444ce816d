#include "pdrbsde/processes.hpp"

#include "pdrbsde/enumeration.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pdrbsde {

const char* slot_name(Slot s) {
  switch (s) {
    case Slot::Minus: return "minus";
    case Slot::Mid: return "mid";
    case Slot::Plus: return "plus";
  }
  return "?";
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Optional: return "optional";
    case Kind::Predictable: return "predictable";
    case Kind::FiniteVariation: return "finite-variation-predictable";
    case Kind::PurelyDiscontinuous: return "purely-discontinuous-predictable";
    case Kind::CadlagMartingale: return "cadlag-martingale";
  }
  return "?";
}

template <class S>
LadlagProcess<S> LadlagProcess<S>::zeros(const FilteredSpace& space, Kind kind) {
  return constant(space, S(0), kind);
}

template <class S>
LadlagProcess<S> LadlagProcess<S>::constant(const FilteredSpace& space, const S& c, Kind kind) {
  LadlagProcess<S> x;
  x.N = space.N;
  x.kind = kind;
  RandomVariable<S> v(space.n_paths, c);
  x.minus.assign(space.N + 1, v);
  x.mid.assign(space.N + 1, v);
  x.plus.assign(space.N, v);
  return x;
}

template <class S>
const RandomVariable<S>& LadlagProcess<S>::at(int k, Slot s) const {
  switch (s) {
    case Slot::Minus: return minus.at(k);
    case Slot::Mid: return mid.at(k);
    default: return plus.at(k);
  }
}

template <class S>
RandomVariable<S>& LadlagProcess<S>::at(int k, Slot s) {
  switch (s) {
    case Slot::Minus: return minus.at(k);
    case Slot::Mid: return mid.at(k);
    default: return plus.at(k);
  }
}

template <class S>
void LadlagProcess<S>::for_each_slot(const std::function<void(int, Slot)>& f) const {
  for (int k = 0; k <= N; ++k) {
    if (k > 0) f(k, Slot::Minus);
    f(k, Slot::Mid);
    if (k < N) f(k, Slot::Plus);
  }
}

template <class S>
IntegrandProcess<S> IntegrandProcess<S>::zeros(const FilteredSpace& space) {
  return constant(space, S(0));
}

template <class S>
IntegrandProcess<S> IntegrandProcess<S>::constant(const FilteredSpace& space, const S& c) {
  IntegrandProcess<S> z;
  z.z.assign(space.N, RandomVariable<S>(space.n_paths, c));
  return z;
}

namespace {

template <class S, class F>
LadlagProcess<S> zip(const LadlagProcess<S>& a, const LadlagProcess<S>& b, F f) {
  if (a.N != b.N || a.n_paths() != b.n_paths()) throw std::invalid_argument("process shape mismatch");
  LadlagProcess<S> out = a;
  out.kind = Kind::Optional;
  auto apply = [&](std::vector<RandomVariable<S>>& o, const std::vector<RandomVariable<S>>& x,
                   const std::vector<RandomVariable<S>>& y) {
    for (std::size_t k = 0; k < o.size(); ++k)
      for (std::size_t p = 0; p < o[k].size(); ++p) o[k][p] = f(x[k][p], y[k][p]);
  };
  apply(out.minus, a.minus, b.minus);
  apply(out.mid, a.mid, b.mid);
  apply(out.plus, a.plus, b.plus);
  return out;
}

template <class S, class F>
IntegrandProcess<S> zip(const IntegrandProcess<S>& a, const IntegrandProcess<S>& b, F f) {
  if (a.z.size() != b.z.size()) throw std::invalid_argument("integrand shape mismatch");
  IntegrandProcess<S> out = a;
  for (std::size_t k = 0; k < out.z.size(); ++k)
    for (std::size_t p = 0; p < out.z[k].size(); ++p) out.z[k][p] = f(a.z[k][p], b.z[k][p]);
  return out;
}

std::string cell(int k, Slot s, int atom) {
  std::ostringstream os;
  os << "instant " << k << " slot " << slot_name(s) << " atom " << atom;
  return os.str();
}

}  // namespace

template <class S>
LadlagProcess<S> operator+(const LadlagProcess<S>& a, const LadlagProcess<S>& b) {
  return zip(a, b, [](const S& x, const S& y) { return S(x + y); });
}

template <class S>
LadlagProcess<S> operator-(const LadlagProcess<S>& a, const LadlagProcess<S>& b) {
  return zip(a, b, [](const S& x, const S& y) { return S(x - y); });
}

template <class S>
LadlagProcess<S> operator-(const LadlagProcess<S>& a) {
  return zip(a, a, [](const S& x, const S&) { return S(-x); });
}

template <class S>
IntegrandProcess<S> operator+(const IntegrandProcess<S>& a, const IntegrandProcess<S>& b) {
  return zip(a, b, [](const S& x, const S& y) { return S(x + y); });
}

template <class S>
IntegrandProcess<S> operator-(const IntegrandProcess<S>& a, const IntegrandProcess<S>& b) {
  return zip(a, b, [](const S& x, const S& y) { return S(x - y); });
}

template <class T, class S>
LadlagProcess<T> convert(const LadlagProcess<S>& x) {
  LadlagProcess<T> out;
  out.N = x.N;
  out.kind = x.kind;
  auto conv = [](const std::vector<RandomVariable<S>>& v) {
    std::vector<RandomVariable<T>> o(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
      o[k].resize(v[k].size());
      for (std::size_t p = 0; p < v[k].size(); ++p) {
        if constexpr (std::is_same_v<T, S>) o[k][p] = v[k][p];
        else if constexpr (is_exact_v<T>) o[k][p] = rational_from_double(to_double(v[k][p]));
        else o[k][p] = to_double(v[k][p]);
      }
    }
    return o;
  };
  out.minus = conv(x.minus);
  out.mid = conv(x.mid);
  out.plus = conv(x.plus);
  return out;
}

template <class T, class S>
IntegrandProcess<T> convert(const IntegrandProcess<S>& x) {
  IntegrandProcess<T> out;
  out.z.resize(x.z.size());
  for (std::size_t k = 0; k < x.z.size(); ++k) {
    out.z[k].resize(x.z[k].size());
    for (std::size_t p = 0; p < x.z[k].size(); ++p) {
      if constexpr (std::is_same_v<T, S>) out.z[k][p] = x.z[k][p];
      else if constexpr (is_exact_v<T>) out.z[k][p] = rational_from_double(to_double(x.z[k][p]));
      else out.z[k][p] = to_double(x.z[k][p]);
    }
  }
  return out;
}

template <class S>
double sup_distance(const LadlagProcess<S>& a, const LadlagProcess<S>& b) {
  double d = 0;
  auto scan = [&](const std::vector<RandomVariable<S>>& x, const std::vector<RandomVariable<S>>& y) {
    for (std::size_t k = 0; k < x.size(); ++k)
      for (std::size_t p = 0; p < x[k].size(); ++p) d = std::max(d, abs_diff(x[k][p], y[k][p]));
  };
  scan(a.minus, b.minus);
  scan(a.mid, b.mid);
  scan(a.plus, b.plus);
  return d;
}

template <class S>
double sup_distance(const IntegrandProcess<S>& a, const IntegrandProcess<S>& b) {
  double d = 0;
  for (std::size_t k = 0; k < a.z.size(); ++k)
    for (std::size_t p = 0; p < a.z[k].size(); ++p) d = std::max(d, abs_diff(a.z[k][p], b.z[k][p]));
  return d;
}

template <class S>
double sup_norm(const LadlagProcess<S>& a) {
  double d = 0;
  auto scan = [&](const std::vector<RandomVariable<S>>& x) {
    for (const auto& v : x)
      for (const auto& e : v) d = std::max(d, to_double(abs_of(e)));
  };
  scan(a.minus);
  scan(a.mid);
  scan(a.plus);
  return d;
}

template <class S>
std::optional<std::string> class_violation(const FilteredSpace& space, const LadlagProcess<S>& x,
                                           double tol) {
  const int N = space.N;
  if (x.N != N || static_cast<int>(x.minus.size()) != N + 1 ||
      static_cast<int>(x.mid.size()) != N + 1 || static_cast<int>(x.plus.size()) != N)
    return "slot counts do not match the grid";
  for (int k = 0; k <= N; ++k) {
    if (static_cast<int>(x.minus[k].size()) != space.n_paths ||
        static_cast<int>(x.mid[k].size()) != space.n_paths ||
        (k < N && static_cast<int>(x.plus[k].size()) != space.n_paths))
      return "slot sizes do not match the path count";
  }
  const bool predictable = x.kind != Kind::Optional && x.kind != Kind::CadlagMartingale;
  for (int k = 0; k <= N; ++k) {
    int a = first_non_measurable_atom(x.minus[k], space.sigma_minus[k], tol);
    if (a >= 0) return "minus slot not sigma_minus-measurable at " + cell(k, Slot::Minus, a);
    const Partition& mid_info = predictable ? space.sigma_minus[k] : space.sigma_mid[k];
    a = first_non_measurable_atom(x.mid[k], mid_info, tol);
    if (a >= 0) return "mid slot measurability violated at " + cell(k, Slot::Mid, a);
    if (k < N) {
      a = first_non_measurable_atom(x.plus[k], space.sigma_mid[k], tol);
      if (a >= 0) return "plus slot not sigma_mid-measurable at " + cell(k, Slot::Plus, a);
    }
  }
  if (x.kind == Kind::CadlagMartingale || x.kind == Kind::FiniteVariation ||
      x.kind == Kind::PurelyDiscontinuous) {
    for (int k = 0; k < N; ++k)
      for (int p = 0; p < space.n_paths; ++p)
        if (!near(x.plus[k][p], x.mid[k][p], tol))
          return "not cadlag at instant " + std::to_string(k) + " path " + std::to_string(p);
  }
  if (x.kind == Kind::FiniteVariation || x.kind == Kind::PurelyDiscontinuous) {
    for (int p = 0; p < space.n_paths; ++p) {
      if (!near(x.minus[0][p], S(0), tol)) return "nonzero left limit at 0 on path " + std::to_string(p);
      if (x.kind == Kind::FiniteVariation && !near(x.mid[0][p], S(0), tol))
        return "nonzero value at 0 on path " + std::to_string(p);
    }
    for (int k = 0; k <= N; ++k) {
      for (int p = 0; p < space.n_paths; ++p) {
        if (to_double(x.mid[k][p] - x.minus[k][p]) < -tol)
          return "negative instant jump at instant " + std::to_string(k) + " path " + std::to_string(p);
        if (k < N) {
          S inc = x.minus[k + 1][p] - x.plus[k][p];
          if (x.kind == Kind::PurelyDiscontinuous && !near(inc, S(0), tol))
            return "interval variation at interval " + std::to_string(k) + " path " + std::to_string(p);
          if (to_double(inc) < -tol)
            return "negative interval increment at interval " + std::to_string(k) + " path " +
                   std::to_string(p);
        }
      }
    }
  }
  return std::nullopt;
}

template <class S>
std::optional<std::string> class_violation(const FilteredSpace& space, const IntegrandProcess<S>& z,
                                           double tol) {
  if (static_cast<int>(z.z.size()) != space.N) return "integrand needs one entry per interval";
  for (int k = 0; k < space.N; ++k) {
    if (static_cast<int>(z.z[k].size()) != space.n_paths) return "integrand size mismatch";
    int a = first_non_measurable_atom(z.z[k], space.sigma_mid[k], tol);
    if (a >= 0)
      return "integrand not sigma_mid-measurable at interval " + std::to_string(k) + " atom " +
             std::to_string(a);
  }
  return std::nullopt;
}

template <class S>
Projection<S> predictable_projection(const FilteredSpace& space, const LadlagProcess<S>& x) {
  Projection<S> out;
  out.process = x;
  out.process.kind = Kind::Predictable;
  for (int k = 0; k <= space.N; ++k) {
    out.process.mid[k] = cond_expect(space, x.mid[k], space.sigma_minus[k]);
    if (k < space.N) out.plus.push_back(cond_expect(space, x.plus[k], space.sigma_minus[k]));
  }
  return out;
}

template <class S>
Jumps<S> jumps(const LadlagProcess<S>& x) {
  Jumps<S> j;
  for (int k = 0; k <= x.N; ++k) {
    RandomVariable<S> l(x.mid[k].size());
    for (std::size_t p = 0; p < l.size(); ++p) l[p] = x.mid[k][p] - x.minus[k][p];
    j.left.push_back(std::move(l));
    if (k < x.N) {
      RandomVariable<S> r(x.mid[k].size());
      for (std::size_t p = 0; p < r.size(); ++p) r[p] = x.plus[k][p] - x.mid[k][p];
      j.right.push_back(std::move(r));
    }
  }
  return j;
}

namespace {

template <class S>
bool zero_conditional_mean(const FilteredSpace& space, const RandomVariable<S>& inc, const Partition& P,
                           double tol) {
  auto e = cond_expect(space, inc, P);
  for (const auto& v : e)
    if (!near(v, S(0), tol)) return false;
  return true;
}

}  // namespace

template <class S>
bool is_martingale(const FilteredSpace& space, const LadlagProcess<S>& m, double tol) {
  LadlagProcess<S> probe = m;
  probe.kind = Kind::CadlagMartingale;
  if (class_violation(space, probe, tol)) return false;
  const int n = space.n_paths;
  for (int k = 0; k <= space.N; ++k) {
    RandomVariable<S> jump(n);
    for (int p = 0; p < n; ++p) jump[p] = m.mid[k][p] - m.minus[k][p];
    if (!zero_conditional_mean(space, jump, space.sigma_minus[k], tol)) return false;
    if (k < space.N) {
      RandomVariable<S> inc(n);
      for (int p = 0; p < n; ++p) inc[p] = m.minus[k + 1][p] - m.plus[k][p];
      if (!zero_conditional_mean(space, inc, space.sigma_mid[k], tol)) return false;
    }
  }
  return true;
}

template <class S>
bool supermartingale_fast_path(const FilteredSpace& space, const LadlagProcess<S>& y, double tol) {
  for (int k = 0; k < space.N; ++k) {
    auto e = cond_expect(space, y.mid[k + 1], space.sigma_minus[k]);
    for (int p = 0; p < space.n_paths; ++p)
      if (to_double(y.mid[k][p] - e[p]) < -tol) return false;
  }
  return true;
}

template <class S>
std::optional<bool> supermartingale_by_enumeration(const FilteredSpace& space, const LadlagProcess<S>& y,
                                                   double tol) {
  if (space.n_paths > kEnumerationMaxPaths) return std::nullopt;
  std::vector<StoppingStage<S>> stages;
  for (int k = 0; k <= space.N; ++k) stages.push_back({&space.sigma_minus[k], &y.mid[k]});
  std::vector<RandomVariable<S>> best;
  try {
    best = enumerate_stopping_values(stages, space.weights<S>());
  } catch (const EnumerationTooLarge&) {
    return std::nullopt;
  }
  for (int k = 0; k <= space.N; ++k)
    for (int p = 0; p < space.n_paths; ++p)
      if (to_double(best[k][p] - y.mid[k][p]) > tol) return false;
  return true;
}

template <class S>
bool is_predictable_strong_supermartingale(const FilteredSpace& space, const LadlagProcess<S>& y,
                                           double tol) {
  bool fast = supermartingale_fast_path(space, y, tol);
  if (auto enumerated = supermartingale_by_enumeration(space, y, tol)) {
    if (*enumerated != fast)
      throw std::logic_error("supermartingale fast path disagrees with stopping-time enumeration");
  }
  return fast;
}

template <class S>
bool is_slot_supermartingale(const FilteredSpace& space, const LadlagProcess<S>& y, double tol) {
  for (int k = 0; k <= space.N; ++k) {
    for (int p = 0; p < space.n_paths; ++p)
      if (k > 0 && to_double(y.minus[k][p] - y.mid[k][p]) < -tol) return false;
    if (k == space.N) break;
    auto ep = cond_expect(space, y.plus[k], space.sigma_minus[k]);
    auto em = cond_expect(space, y.minus[k + 1], space.sigma_mid[k]);
    for (int p = 0; p < space.n_paths; ++p) {
      if (to_double(y.mid[k][p] - ep[p]) < -tol) return false;
      if (to_double(y.plus[k][p] - em[p]) < -tol) return false;
    }
  }
  return true;
}

template <class S>
LadlagProcess<S> ito_integral(const FilteredSpace& space, const IntegrandProcess<S>& z) {
  auto out = LadlagProcess<S>::zeros(space, Kind::CadlagMartingale);
  for (int k = 0; k < space.N; ++k) {
    for (int p = 0; p < space.n_paths; ++p) {
      out.plus[k][p] = out.mid[k][p];
      out.minus[k + 1][p] = out.plus[k][p] + z.z[k][p] * space.dW<S>(k, p);
      out.mid[k + 1][p] = out.minus[k + 1][p];
    }
  }
  return out;
}

template <class S>
LadlagProcess<S> brownian(const FilteredSpace& space) {
  return ito_integral(space, IntegrandProcess<S>::constant(space, S(1)));
}

template <class S>
OrthogonalParts<S> orthogonal_decompose(const FilteredSpace& space, const LadlagProcess<S>& m, double tol) {
  if (!is_martingale(space, m, tol)) throw NotMartingale("orthogonal_decompose needs a martingale");
  for (int p = 0; p < space.n_paths; ++p)
    if (!near(m.minus[0][p], S(0), tol)) throw NotMartingale("orthogonal_decompose needs M_{0-} = 0");
  OrthogonalParts<S> out;
  out.Z = IntegrandProcess<S>::zeros(space);
  out.N = LadlagProcess<S>::zeros(space, Kind::CadlagMartingale);
  const S dt = space.step<S>();
  const int n = space.n_paths;
  for (int k = 0; k <= space.N; ++k) {
    for (int p = 0; p < n; ++p) out.N.mid[k][p] = out.N.minus[k][p] + (m.mid[k][p] - m.minus[k][p]);
    if (k == space.N) break;
    RandomVariable<S> inc(n), cross(n);
    for (int p = 0; p < n; ++p) {
      out.N.plus[k][p] = out.N.mid[k][p];
      inc[p] = m.minus[k + 1][p] - m.plus[k][p];
      cross[p] = inc[p] * space.dW<S>(k, p);
    }
    auto e = cond_expect(space, cross, space.sigma_mid[k]);
    for (int p = 0; p < n; ++p) {
      out.Z.z[k][p] = e[p] / dt;
      out.N.minus[k + 1][p] = out.N.plus[k][p] + (inc[p] - out.Z.z[k][p] * space.dW<S>(k, p));
    }
  }
  return out;
}

template <class S>
double brownian_covariation(const FilteredSpace& space, const LadlagProcess<S>& m) {
  double worst = 0;
  for (int k = 0; k < space.N; ++k) {
    RandomVariable<S> cross(space.n_paths);
    for (int p = 0; p < space.n_paths; ++p)
      cross[p] = (m.minus[k + 1][p] - m.plus[k][p]) * space.dW<S>(k, p);
    for (const auto& v : cond_expect(space, cross, space.sigma_mid[k])) worst = std::max(worst, to_double(abs_of(v)));
  }
  return worst;
}

template <class S>
LadlagProcess<S> bracket(const LadlagProcess<S>& m, const LadlagProcess<S>& n) {
  LadlagProcess<S> out = m;
  out.kind = Kind::Optional;
  const std::size_t np = m.mid[0].size();
  for (int k = 0; k <= m.N; ++k) {
    for (std::size_t p = 0; p < np; ++p) {
      S base = k == 0 ? S(0) : out.minus[k][p];
      out.minus[k][p] = base;
      out.mid[k][p] = base + (m.mid[k][p] - m.minus[k][p]) * (n.mid[k][p] - n.minus[k][p]);
      if (k < m.N) {
        out.plus[k][p] = out.mid[k][p] + (m.plus[k][p] - m.mid[k][p]) * (n.plus[k][p] - n.mid[k][p]);
        out.minus[k + 1][p] =
            out.plus[k][p] + (m.minus[k + 1][p] - m.plus[k][p]) * (n.minus[k + 1][p] - n.plus[k][p]);
      }
    }
  }
  return out;
}

template <class S>
LadlagProcess<S> random_predictable(const FilteredSpace& space, std::mt19937_64& rng, long lo, long hi,
                                    long denom) {
  auto draw = [&]() {
    long u = static_cast<long>(rng() % static_cast<unsigned long>(hi - lo + 1));
    return from_rational<S>(Rational(lo + u, denom));
  };
  auto fill = [&](RandomVariable<S>& v, const Partition& P) {
    for (const auto& atom : P.atoms) {
      S x = draw();
      for (int p : atom) v[p] = x;
    }
  };
  auto out = LadlagProcess<S>::zeros(space, Kind::Predictable);
  for (int k = 0; k <= space.N; ++k) {
    fill(out.mid[k], space.sigma_minus[k]);
    if (k > 0) fill(out.minus[k], space.sigma_minus[k]);
    if (k < space.N) fill(out.plus[k], space.sigma_mid[k]);
  }
  out.minus[0] = out.mid[0];
  return out;
}

namespace {

template <class S>
std::string value_text(const S& v) {
  return to_string(v);
}

}  // namespace

template <class S>
void write_csv(std::ostream& os, const LadlagProcess<S>& x) {
  os << "instant,slot,path,value\n";
  x.for_each_slot([&](int k, Slot s) {
    const auto& v = x.at(k, s);
    for (std::size_t p = 0; p < v.size(); ++p)
      os << k << ',' << slot_name(s) << ',' << p << ',' << value_text(v[p]) << '\n';
  });
}

template <class S>
void write_csv(std::ostream& os, const IntegrandProcess<S>& z) {
  os << "instant,slot,path,value\n";
  for (std::size_t k = 0; k < z.z.size(); ++k)
    for (std::size_t p = 0; p < z.z[k].size(); ++p)
      os << k << ",interval," << p << ',' << value_text(z.z[k][p]) << '\n';
}

namespace {

struct CsvRow {
  int instant;
  std::string slot;
  int path;
  Rational value;
};

std::vector<CsvRow> read_rows(std::istream& is) {
  std::vector<CsvRow> rows;
  std::string line;
  if (!std::getline(is, line) || line != "instant,slot,path,value")
    throw std::invalid_argument("csv: expected header 'instant,slot,path,value'");
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string f[4];
    for (auto& field : f)
      if (!std::getline(ls, field, ',')) throw std::invalid_argument("csv line " + std::to_string(lineno) + ": expected 4 fields");
    try {
      rows.push_back({std::stoi(f[0]), f[1], std::stoi(f[2]), parse_rational(f[3])});
    } catch (const std::exception& e) {
      throw std::invalid_argument("csv line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace

template <class S>
LadlagProcess<S> read_csv(std::istream& is, const FilteredSpace& space, Kind kind) {
  auto x = LadlagProcess<S>::zeros(space, kind);
  std::vector<std::vector<char>> seen;
  std::vector<std::pair<int, Slot>> order;
  x.for_each_slot([&](int k, Slot s) { order.emplace_back(k, s); });
  auto index = [&](int k, const std::string& name) -> int {
    for (std::size_t i = 0; i < order.size(); ++i)
      if (order[i].first == k && name == slot_name(order[i].second)) return static_cast<int>(i);
    return -1;
  };
  seen.assign(order.size(), std::vector<char>(space.n_paths, 0));
  for (const auto& r : read_rows(is)) {
    int i = index(r.instant, r.slot);
    if (i < 0 || r.path < 0 || r.path >= space.n_paths)
      throw std::invalid_argument("csv: unknown cell instant " + std::to_string(r.instant) + " slot " + r.slot +
                                  " path " + std::to_string(r.path));
    if (seen[i][r.path]++) throw std::invalid_argument("csv: duplicate cell instant " + std::to_string(r.instant));
    x.at(order[i].first, order[i].second)[r.path] = from_rational<S>(r.value);
  }
  for (std::size_t i = 0; i < order.size(); ++i)
    for (int p = 0; p < space.n_paths; ++p)
      if (!seen[i][p])
        throw std::invalid_argument("csv: missing cell instant " + std::to_string(order[i].first) + " slot " +
                                    slot_name(order[i].second) + " path " + std::to_string(p));
  x.minus[0] = x.mid[0];
  return x;
}

template <class S>
IntegrandProcess<S> read_integrand_csv(std::istream& is, const FilteredSpace& space) {
  auto z = IntegrandProcess<S>::zeros(space);
  std::vector<std::vector<char>> seen(space.N, std::vector<char>(space.n_paths, 0));
  for (const auto& r : read_rows(is)) {
    if (r.slot != "interval" || r.instant < 0 || r.instant >= space.N || r.path < 0 || r.path >= space.n_paths)
      throw std::invalid_argument("csv: unknown integrand cell instant " + std::to_string(r.instant));
    if (seen[r.instant][r.path]++) throw std::invalid_argument("csv: duplicate integrand cell");
    z.z[r.instant][r.path] = from_rational<S>(r.value);
  }
  for (int k = 0; k < space.N; ++k)
    for (int p = 0; p < space.n_paths; ++p)
      if (!seen[k][p]) throw std::invalid_argument("csv: missing integrand cell instant " + std::to_string(k));
  return z;
}

#define PDRBSDE_INSTANTIATE(S)                                                                      \
  template struct LadlagProcess<S>;                                                                 \
  template struct IntegrandProcess<S>;                                                              \
  template LadlagProcess<S> operator+(const LadlagProcess<S>&, const LadlagProcess<S>&);            \
  template LadlagProcess<S> operator-(const LadlagProcess<S>&, const LadlagProcess<S>&);            \
  template LadlagProcess<S> operator-(const LadlagProcess<S>&);                                     \
  template IntegrandProcess<S> operator+(const IntegrandProcess<S>&, const IntegrandProcess<S>&);   \
  template IntegrandProcess<S> operator-(const IntegrandProcess<S>&, const IntegrandProcess<S>&);   \
  template double sup_distance(const LadlagProcess<S>&, const LadlagProcess<S>&);                   \
  template double sup_distance(const IntegrandProcess<S>&, const IntegrandProcess<S>&);             \
  template double sup_norm(const LadlagProcess<S>&);                                                \
  template std::optional<std::string> class_violation(const FilteredSpace&, const LadlagProcess<S>&, \
                                                      double);                                      \
  template std::optional<std::string> class_violation(const FilteredSpace&,                          \
                                                      const IntegrandProcess<S>&, double);          \
  template Projection<S> predictable_projection(const FilteredSpace&, const LadlagProcess<S>&);     \
  template Jumps<S> jumps(const LadlagProcess<S>&);                                                 \
  template bool is_martingale(const FilteredSpace&, const LadlagProcess<S>&, double);               \
  template bool supermartingale_fast_path(const FilteredSpace&, const LadlagProcess<S>&, double);   \
  template std::optional<bool> supermartingale_by_enumeration(const FilteredSpace&,                 \
                                                              const LadlagProcess<S>&, double);     \
  template bool is_predictable_strong_supermartingale(const FilteredSpace&, const LadlagProcess<S>&, \
                                                      double);                                      \
  template bool is_slot_supermartingale(const FilteredSpace&, const LadlagProcess<S>&, double);     \
  template LadlagProcess<S> ito_integral(const FilteredSpace&, const IntegrandProcess<S>&);         \
  template LadlagProcess<S> brownian(const FilteredSpace&);                                         \
  template OrthogonalParts<S> orthogonal_decompose(const FilteredSpace&, const LadlagProcess<S>&,   \
                                                   double);                                         \
  template double brownian_covariation(const FilteredSpace&, const LadlagProcess<S>&);              \
  template LadlagProcess<S> bracket(const LadlagProcess<S>&, const LadlagProcess<S>&);              \
  template LadlagProcess<S> random_predictable(const FilteredSpace&, std::mt19937_64&, long, long, long); \
  template void write_csv(std::ostream&, const LadlagProcess<S>&);                                  \
  template void write_csv(std::ostream&, const IntegrandProcess<S>&);                               \
  template LadlagProcess<S> read_csv(std::istream&, const FilteredSpace&, Kind);                    \
  template IntegrandProcess<S> read_integrand_csv(std::istream&, const FilteredSpace&);

PDRBSDE_INSTANTIATE(double)
PDRBSDE_INSTANTIATE(Rational)

template LadlagProcess<double> convert(const LadlagProcess<Rational>&);
template LadlagProcess<Rational> convert(const LadlagProcess<double>&);
template LadlagProcess<double> convert(const LadlagProcess<double>&);
template LadlagProcess<Rational> convert(const LadlagProcess<Rational>&);
template IntegrandProcess<double> convert(const IntegrandProcess<Rational>&);
template IntegrandProcess<Rational> convert(const IntegrandProcess<double>&);
template IntegrandProcess<double> convert(const IntegrandProcess<double>&);
template IntegrandProcess<Rational> convert(const IntegrandProcess<Rational>&);

}  // namespace pdrbsde

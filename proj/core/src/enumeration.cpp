#include "pdrbsde/enumeration.hpp"

#include <algorithm>

namespace pdrbsde {

namespace {

// children[s][a] = atoms of stage s+1 inside atom a of stage s
std::vector<std::vector<std::vector<int>>> child_atoms(const std::vector<const Partition*>& info) {
  std::vector<std::vector<std::vector<int>>> out(info.size());
  for (std::size_t s = 0; s < info.size(); ++s) {
    out[s].assign(info[s]->size(), {});
    if (s + 1 == info.size()) continue;
    if (!info[s + 1]->refines(*info[s]))
      throw std::invalid_argument("stage information must refine along the sequence");
    for (std::size_t b = 0; b < info[s + 1]->size(); ++b) {
      int parent = info[s]->atom_of[info[s + 1]->atoms[b].front()];
      out[s][parent].push_back(static_cast<int>(b));
    }
  }
  return out;
}

}  // namespace

double count_stopping_rules(const std::vector<const Partition*>& info) {
  auto children = child_atoms(info);
  std::vector<double> next;
  double worst = 0;
  for (std::size_t s = info.size(); s-- > 0;) {
    std::vector<double> cur(info[s]->size(), 1.0);
    if (s + 1 < info.size()) {
      for (std::size_t a = 0; a < cur.size(); ++a) {
        double prod = 1.0;
        for (int b : children[s][a]) prod *= next[b];
        cur[a] = 1.0 + prod;
      }
    }
    for (double c : cur) worst = std::max(worst, c);
    next = std::move(cur);
  }
  return worst;
}

template <class S>
std::vector<RandomVariable<S>> enumerate_stopping_values(const std::vector<StoppingStage<S>>& stages,
                                                         const std::vector<S>& weights) {
  std::vector<const Partition*> info;
  for (const auto& st : stages) info.push_back(st.info);
  if (weights.size() > static_cast<std::size_t>(kEnumerationMaxPaths))
    throw EnumerationTooLarge("stopping-time enumeration is limited to 64 paths");
  if (count_stopping_rules(info) > kEnumerationMaxRules)
    throw EnumerationTooLarge("too many stopping rules to enumerate");
  auto children = child_atoms(info);
  const std::size_t n = weights.size();

  std::vector<RandomVariable<S>> out(stages.size(), RandomVariable<S>(n));
  // sums[a] lists sum_{w in atom} P(w) reward_tau(w) for every rule tau on atom a
  std::vector<std::vector<S>> next;
  for (std::size_t s = stages.size(); s-- > 0;) {
    const Partition& P = *stages[s].info;
    const auto& reward = *stages[s].reward;
    std::vector<std::vector<S>> cur(P.size());
    for (std::size_t a = 0; a < P.size(); ++a) {
      S stop = 0;
      S mass = 0;
      for (int p : P.atoms[a]) {
        stop += weights[p] * reward[p];
        mass += weights[p];
      }
      std::vector<S> sums{stop};
      if (s + 1 < stages.size()) {
        std::vector<S> acc{S(0)};
        for (int b : children[s][a]) {
          std::vector<S> merged;
          merged.reserve(acc.size() * next[b].size());
          for (const auto& x : acc)
            for (const auto& y : next[b]) merged.push_back(x + y);
          acc = std::move(merged);
        }
        sums.insert(sums.end(), acc.begin(), acc.end());
      }
      S best = *std::max_element(sums.begin(), sums.end());
      for (int p : P.atoms[a]) out[s][p] = best / mass;
      cur[a] = std::move(sums);
    }
    next = std::move(cur);
  }
  return out;
}

template std::vector<RandomVariable<double>> enumerate_stopping_values(
    const std::vector<StoppingStage<double>>&, const std::vector<double>&);
template std::vector<RandomVariable<Rational>> enumerate_stopping_values(
    const std::vector<StoppingStage<Rational>>&, const std::vector<Rational>&);

}  // namespace pdrbsde

#pragma once

#include "pdrbsde/prob_space.hpp"

#include <stdexcept>
#include <vector>

namespace pdrbsde {

// Brute-force optimal stopping over an explicit sequence of decision stages.
// Stage s carries an information partition (refining along the sequence) and a reward.
// A stopping rule stops or continues on each atom; every rule is enumerated.

inline constexpr int kEnumerationMaxPaths = 64;
inline constexpr double kEnumerationMaxRules = 4194304.0;

class EnumerationTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

template <class S>
struct StoppingStage {
  const Partition* info = nullptr;
  const RandomVariable<S>* reward = nullptr;
};

// Number of stopping rules rooted at each atom of the first stage, maximised over atoms.
double count_stopping_rules(const std::vector<const Partition*>& info);

// out[s][p] = max over rules tau >= s of E[reward_tau | info_s](p).
template <class S>
std::vector<RandomVariable<S>> enumerate_stopping_values(const std::vector<StoppingStage<S>>& stages,
                                                         const std::vector<S>& weights);

}  // namespace pdrbsde

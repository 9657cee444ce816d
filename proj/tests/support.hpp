#pragma once

#include "pdrbsde/processes.hpp"

namespace pdrbsde::testing {

template <class S>
bool identical(const LadlagProcess<S>& a, const LadlagProcess<S>& b) {
  return a.minus == b.minus && a.mid == b.mid && a.plus == b.plus;
}

template <class S>
bool identical(const IntegrandProcess<S>& a, const IntegrandProcess<S>& b) {
  return a.z == b.z;
}

template <class S>
bool all_zero(const LadlagProcess<S>& x) {
  for (const auto* slots : {&x.minus, &x.mid, &x.plus})
    for (const auto& rv : *slots)
      for (const auto& v : rv)
        if (v != 0) return false;
  return true;
}

}  // namespace pdrbsde::testing

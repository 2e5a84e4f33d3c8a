#pragma once

#include <cmath>
#include <vector>

#include "fbrsim/reactor.hpp"
#include "fbrsim/thermo.hpp"

namespace fbrsim::test {

inline const std::vector<double>& nominal_x() {
  static const std::vector<double> x = {0.215, 0.645, 0.10, 0.04};
  return x;
}

// Concentrations of the nominal feed at (T, P), i.e. V(T, P, c) = 1.
inline std::vector<double> nominal_c(const FluidModel& fluid, double T, double P) {
  const auto& x = nominal_x();
  const double Vm = fluid.volume(T, P, std::span<const double>(x));
  std::vector<double> c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = x[i] / Vm;
  return c;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace fbrsim::test

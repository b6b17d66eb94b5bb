#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "stmc/measures.hpp"

namespace stmc::testkit {

struct FuzzOutcome {
  std::uint64_t trials = 0;
  std::uint64_t violations = 0;
  std::string first;
};

// Checks bound, antisymmetry, integer scale invariance, l scaling and the sign
// convention on random integer counts in [0, 1e6].
inline FuzzOutcome fuzz_measures(std::uint64_t trials, std::uint64_t seed) {
  using measures::loc_norm_diff;
  using measures::motif_percent_diff;
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::int64_t> count(0, 1000000), scale(1, 1000),
      loc(1, 100000);
  FuzzOutcome out;
  auto fail = [&](const std::string& what, double am, double m) {
    if (out.violations++ == 0)
      out.first = what + " at AM=" + std::to_string(am) + " M=" + std::to_string(m);
  };
  for (std::uint64_t i = 0; i < trials; ++i, ++out.trials) {
    const double am = static_cast<double>(count(gen));
    const double m = static_cast<double>(count(gen));
    const double k = static_cast<double>(scale(gen));
    const double a = static_cast<double>(loc(gen));
    const double r = motif_percent_diff(am, m);
    if (!(r >= -2 && r <= 2)) fail("bound", am, m);
    if (am + m > 0 && r != -motif_percent_diff(m, am)) fail("antisymmetry", am, m);
    if (motif_percent_diff(k * am, k * m) != r) fail("scale", am, m);
    const double l = *loc_norm_diff(am, m, a);
    if (l != -*loc_norm_diff(m, am, a)) fail("l antisymmetry", am, m);
    if (*loc_norm_diff(am, m, 2 * a) != l / 2) fail("l scaling", am, m);
    if (m > am && !(r < 0 && l < 0)) fail("sign", am, m);
    if (am > m && !(r > 0 && l > 0)) fail("sign", am, m);
    if ((r == 0) != (am == m)) fail("zero", am, m);
  }
  return out;
}

}  // namespace stmc::testkit

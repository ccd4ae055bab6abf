#pragma once

#include "gpdc/random.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <string>

namespace gpdc::testing {

/// Runs `body(rng, case_index)` for `cases` independently seeded cases. A failure reports the
/// seed so the case can be replayed alone.
template <typename Body>
void for_all(int cases, std::uint64_t seed, Body&& body) {
  for (int i = 0; i < cases; ++i) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(i));
    SCOPED_TRACE("property case " + std::to_string(i) + " seed " + std::to_string(seed));
    body(rng, i);
    if (::testing::Test::HasFatalFailure()) return;
  }
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

inline double gaussian(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

}  // namespace gpdc::testing

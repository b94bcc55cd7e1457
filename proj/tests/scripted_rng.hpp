#pragma once

#include <cstddef>
#include <deque>
#include <stdexcept>
#include <string>

#include "pimpgp/rng.hpp"

namespace pimpgp::testing {

// Random source answering from predetermined queues, one per draw kind.
// Exhausted or out-of-range scripts throw so a drifted draw order fails the
// test loudly instead of silently reinterpreting the script.
struct ScriptedRng {
  std::deque<std::size_t> indices;
  std::deque<int> ints;
  std::deque<double> reals;
  std::deque<bool> coins;

  std::size_t uniform_index(std::size_t n) {
    if (indices.empty()) throw std::runtime_error("scripted uniform_index exhausted");
    const std::size_t v = indices.front();
    indices.pop_front();
    if (v >= n)
      throw std::runtime_error("scripted index " + std::to_string(v) + " out of range for n=" +
                               std::to_string(n));
    return v;
  }

  int uniform_int(int lo, int hi) {
    if (ints.empty()) throw std::runtime_error("scripted uniform_int exhausted");
    const int v = ints.front();
    ints.pop_front();
    if (v < lo || v > hi) throw std::runtime_error("scripted int out of range");
    return v;
  }

  double uniform_real() {
    if (reals.empty()) throw std::runtime_error("scripted uniform_real exhausted");
    const double v = reals.front();
    reals.pop_front();
    return v;
  }

  bool bernoulli(double) {
    if (coins.empty()) throw std::runtime_error("scripted bernoulli exhausted");
    const bool v = coins.front();
    coins.pop_front();
    return v;
  }

  bool exhausted() const {
    return indices.empty() && ints.empty() && reals.empty() && coins.empty();
  }
};

static_assert(RandomSource<ScriptedRng>);

}  // namespace pimpgp::testing

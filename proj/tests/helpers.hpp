#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "spim/gates.hpp"
#include "spim/model.hpp"

namespace spim::test {

inline std::string data_path(const std::string& name) { return std::string(SPIM_TEST_DATA) + "/" + name; }

/// Parses "0101" (first char = lowest-numbered free node) into a state index.
inline size_t idx(const std::string& bits) {
  size_t v = 0;
  for (char ch : bits) v = (v << 1) | (ch == '1' ? 1u : 0u);
  return v;
}

inline std::set<size_t> ground_index_set(const IsingModel& model) {
  std::set<size_t> out;
  const auto free = model.free_nodes();
  for (const SpinState& s : ground_states(model)) out.insert(state_index(s, free));
  return out;
}

/// Three-sigma half-width for a binomial proportion estimated from n draws.
inline double sigma3(double p, double n) { return 3.0 * std::sqrt(p * (1.0 - p) / n); }

}  // namespace spim::test

#pragma once

// Universal probabilistic gate set. Each gate is a small bipolar Ising model
// whose degenerate energy minima are exactly the rows of its truth table, so
// circuits composed from them can be run forward or in reverse (with outputs
// clamped) as invertible logic.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "spim/model.hpp"

namespace spim {

enum class GateKind : uint8_t { kCopy, kNot, kAnd, kOr, kFullAdder };

inline const char* gate_name(GateKind k) {
  switch (k) {
    case GateKind::kCopy: return "COPY";
    case GateKind::kNot: return "NOT";
    case GateKind::kAnd: return "AND";
    case GateKind::kOr: return "OR";
    case GateKind::kFullAdder: return "FULL_ADDER";
  }
  throw std::invalid_argument("bad gate kind");
}

inline GateKind gate_from_name(const std::string& s) {
  if (s == "COPY") return GateKind::kCopy;
  if (s == "NOT") return GateKind::kNot;
  if (s == "AND") return GateKind::kAnd;
  if (s == "OR") return GateKind::kOr;
  if (s == "FULL_ADDER") return GateKind::kFullAdder;
  throw std::invalid_argument("unknown gate kind: " + s);
}

/// Pin count: COPY/NOT 2, AND/OR 3 (in1,in2,out), FULL_ADDER 5 (a,b,cin,s,cout).
inline int gate_size(GateKind k) {
  switch (k) {
    case GateKind::kCopy:
    case GateKind::kNot: return 2;
    case GateKind::kAnd:
    case GateKind::kOr: return 3;
    case GateKind::kFullAdder: return 5;
  }
  throw std::invalid_argument("bad gate kind");
}

inline int gate_num_inputs(GateKind k) {
  switch (k) {
    case GateKind::kCopy:
    case GateKind::kNot: return 1;
    case GateKind::kAnd:
    case GateKind::kOr: return 2;
    case GateKind::kFullAdder: return 3;
  }
  throw std::invalid_argument("bad gate kind");
}

/// Ground-state energy in integer weight units (all couplings satisfied).
inline int64_t gate_ground_energy(GateKind k) {
  switch (k) {
    case GateKind::kCopy:
    case GateKind::kNot: return -1;
    case GateKind::kAnd:
    case GateKind::kOr: return -3;
    case GateKind::kFullAdder: return -4;
  }
  throw std::invalid_argument("bad gate kind");
}

/// Bipolar J and h for a gate. The full-adder matrix is
///   [ 0 -1 -1 +1 +2 ]
///   [-1  0 -1 +1 +2 ]
///   [-1 -1  0 +1 +2 ]          h = 0
///   [+1 +1 +1  0 -2 ]
///   [+2 +2 +2 -2  0 ]
/// over pins (a, b, cin, s, cout). COPY/NOT are ferro/antiferro pairs.
inline IsingModel gate_model(GateKind k) {
  switch (k) {
    case GateKind::kCopy: {
      IsingModel m(2, Rep::bipolar);
      m.add_edge(0, 1, 1);
      m.finalize();
      return m;
    }
    case GateKind::kNot: {
      IsingModel m(2, Rep::bipolar);
      m.add_edge(0, 1, -1);
      m.finalize();
      return m;
    }
    case GateKind::kAnd:
    case GateKind::kOr: {
      IsingModel m(3, Rep::bipolar);
      m.add_edge(0, 1, -1);
      m.add_edge(0, 2, 2);
      m.add_edge(1, 2, 2);
      const weight_t sign = (k == GateKind::kAnd) ? 1 : -1;
      m.h = {sign, sign, static_cast<weight_t>(-2 * sign)};
      m.finalize();
      return m;
    }
    case GateKind::kFullAdder: {
      static constexpr int kFa[5][5] = {{0, -1, -1, 1, 2},
                                        {-1, 0, -1, 1, 2},
                                        {-1, -1, 0, 1, 2},
                                        {1, 1, 1, 0, -2},
                                        {2, 2, 2, -2, 0}};
      IsingModel m(5, Rep::bipolar);
      for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j) m.add_edge(i, j, kFa[i][j]);
      m.finalize();
      return m;
    }
  }
  throw std::invalid_argument("bad gate kind");
}

/// All states attaining the minimum energy, ties exact in integer arithmetic.
inline std::vector<SpinState> ground_states(const IsingModel& model) {
  int64_t best = 0;
  bool first = true;
  std::vector<SpinState> out;
  for_each_free_state(model, [&](size_t, const SpinState& s) {
    const int64_t e = model.energy_int(s);
    if (first || e < best) {
      best = e;
      out.clear();
      first = false;
    }
    if (e == best) out.push_back(s);
  });
  return out;
}

inline int64_t ground_energy_int(const IsingModel& model) {
  int64_t best = 0;
  bool first = true;
  for_each_free_state(model, [&](size_t, const SpinState& s) {
    const int64_t e = model.energy_int(s);
    if (first || e < best) {
      best = e;
      first = false;
    }
  });
  return best;
}

/// Complements one variable of a gate: flips the sign of every coupling
/// incident to the pin and of its bias, so E'(..., m_pin, ...) = E(..., -m_pin, ...).
inline IsingModel negate_pin(const IsingModel& model, int pin) {
  if (model.rep != Rep::bipolar) throw std::invalid_argument("negate_pin expects a bipolar model");
  model.check_node(pin);
  IsingModel out = model;
  for (auto& [j, w] : out.adj[static_cast<size_t>(pin)]) {
    w = -w;
    for (auto& [k, bw] : out.adj[static_cast<size_t>(j)])
      if (k == pin) bw = -bw;
  }
  out.h[static_cast<size_t>(pin)] = -out.h[static_cast<size_t>(pin)];
  auto it = out.clamps.find(pin);
  if (it != out.clamps.end()) it->second = static_cast<spin_t>(-it->second);
  return out;
}

}  // namespace spim

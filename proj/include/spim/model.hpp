#pragma once

// Ising model substrate: sparse symmetric couplings J, biases h, clamped
// nodes, spin states in bipolar (+1/-1) or binary (1/0) representation,
// energy and local fields, the p-bit update rule, and an exact Boltzmann
// enumeration oracle for small instances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"

namespace spim {

enum class Rep : uint8_t { bipolar, binary };

inline const char* rep_name(Rep r) { return r == Rep::bipolar ? "bipolar" : "binary"; }

inline Rep rep_from_name(const std::string& s) {
  if (s == "bipolar") return Rep::bipolar;
  if (s == "binary") return Rep::binary;
  throw std::invalid_argument("unknown representation: " + s);
}

using spin_t = int8_t;
using weight_t = int32_t;

inline constexpr spin_t up_value(Rep) { return 1; }
inline constexpr spin_t down_value(Rep r) { return r == Rep::bipolar ? spin_t{-1} : spin_t{0}; }
inline constexpr bool is_up(spin_t v) { return v > 0; }
inline constexpr bool valid_spin(Rep r, spin_t v) { return v == up_value(r) || v == down_value(r); }

/// Vector of p-bit values tagged with its representation.
struct SpinState {
  Rep rep = Rep::bipolar;
  std::vector<spin_t> v;

  SpinState() = default;
  SpinState(Rep r, int n, spin_t fill) : rep(r), v(static_cast<size_t>(n), fill) {}

  int size() const { return static_cast<int>(v.size()); }
  spin_t operator[](int i) const { return v[static_cast<size_t>(i)]; }
  spin_t& operator[](int i) { return v[static_cast<size_t>(i)]; }
  bool operator==(const SpinState& o) const { return rep == o.rep && v == o.v; }
};

struct Edge {
  int i, j;
  weight_t w;
};

/// Sparse symmetric Ising model (Eq. form E = -(sum_{i<j} J_ij m_i m_j + sum_i h_i m_i)).
/// Weights are integers times a fixed-point scale (all gate libraries here use
/// integers in {+-1, +-2} with scale 1). Immutable once built; share freely.
struct IsingModel {
  int n = 0;
  Rep rep = Rep::bipolar;
  double weight_scale = 1.0;
  int64_t energy_offset = 0;  // constant energy from terms dropped at fusion
  std::vector<std::vector<std::pair<int, weight_t>>> adj;  // both directions
  std::vector<weight_t> h;
  std::map<int, spin_t> clamps;

  IsingModel() = default;
  explicit IsingModel(int nodes, Rep r = Rep::bipolar)
      : n(nodes), adj(static_cast<size_t>(nodes)), h(static_cast<size_t>(nodes), 0) {
    rep = r;
  }

  void check_node(int i) const {
    if (i < 0 || i >= n) throw std::out_of_range("node index out of range");
  }

  /// Accumulates w onto the (i,j) coupling; keeps J symmetric by storing both
  /// directions. Self-edges are rejected (the diagonal is zero by contract).
  void add_edge(int i, int j, weight_t w) {
    check_node(i);
    check_node(j);
    if (i == j) throw std::invalid_argument("self-edge rejected (diagonal must stay zero)");
    accumulate(i, j, w);
    accumulate(j, i, w);
  }

  void add_bias(int i, weight_t w) {
    check_node(i);
    h[static_cast<size_t>(i)] += w;
  }

  weight_t weight(int i, int j) const {
    check_node(i);
    check_node(j);
    for (const auto& [k, w] : adj[static_cast<size_t>(i)])
      if (k == j) return w;
    return 0;
  }

  void clamp(int i, spin_t val) {
    check_node(i);
    if (!valid_spin(rep, val)) throw std::invalid_argument("clamp value invalid for representation");
    clamps[i] = val;
  }

  bool is_clamped(int i) const { return clamps.count(i) != 0; }

  /// Sorts adjacency and drops couplings that cancelled to zero.
  void finalize() {
    for (auto& row : adj) {
      std::erase_if(row, [](const auto& e) { return e.second == 0; });
      std::sort(row.begin(), row.end());
    }
  }

  int degree(int i) const {
    check_node(i);
    return static_cast<int>(adj[static_cast<size_t>(i)].size());
  }

  int max_degree() const {
    int d = 0;
    for (const auto& row : adj) d = std::max(d, static_cast<int>(row.size()));
    return d;
  }

  int64_t edge_count() const {
    int64_t twice = 0;
    for (const auto& row : adj)
      for (const auto& [j, w] : row)
        if (w != 0) ++twice;
    return twice / 2;
  }

  /// Canonical edge list: each edge once, i<j, sorted by (i,j).
  std::vector<Edge> edges() const {
    std::vector<Edge> es;
    for (int i = 0; i < n; ++i)
      for (const auto& [j, w] : adj[static_cast<size_t>(i)])
        if (j > i && w != 0) es.push_back({i, j, w});
    std::sort(es.begin(), es.end(), [](const Edge& a, const Edge& b) {
      return std::tie(a.i, a.j) < std::tie(b.i, b.j);
    });
    return es;
  }

  std::vector<int> free_nodes() const {
    std::vector<int> f;
    f.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      if (!is_clamped(i)) f.push_back(i);
    return f;
  }

  int n_free() const { return n - static_cast<int>(clamps.size()); }

  void check_state(const SpinState& s) const {
    if (s.size() != n) throw std::invalid_argument("state size does not match model");
    if (s.rep != rep) throw std::invalid_argument("state representation does not match model");
  }

  void apply_clamps(SpinState& s) const {
    for (const auto& [i, val] : clamps) s[i] = val;
  }

  SpinState make_state(spin_t fill) const {
    SpinState s(rep, n, fill);
    apply_clamps(s);
    return s;
  }

  /// Synapse input I_i = sum_j J_ij m_j + h_i in integer weight units.
  int64_t local_field_int(const SpinState& s, int i) const {
    check_node(i);
    int64_t f = h[static_cast<size_t>(i)];
    for (const auto& [j, w] : adj[static_cast<size_t>(i)]) f += int64_t{w} * s.v[static_cast<size_t>(j)];
    return f;
  }

  double local_field(const SpinState& s, int i) const {
    check_state(s);
    return weight_scale * static_cast<double>(local_field_int(s, i));
  }

  /// Energy in integer weight units, each edge counted once, offset included.
  int64_t energy_int(const SpinState& s) const {
    int64_t e = 0;
    for (int i = 0; i < n; ++i) {
      const int64_t mi = s.v[static_cast<size_t>(i)];
      for (const auto& [j, w] : adj[static_cast<size_t>(i)])
        if (j > i) e -= int64_t{w} * mi * s.v[static_cast<size_t>(j)];
      e -= int64_t{h[static_cast<size_t>(i)]} * mi;
    }
    return e + energy_offset;
  }

  double energy(const SpinState& s) const {
    check_state(s);
    return weight_scale * static_cast<double>(energy_int(s));
  }

  /// Replaces frozen clamps with large bias terms (the h-clamping variant):
  /// bias magnitude 2*(max_i |row sum of |J|| + |h_i|) dominates any field.
  IsingModel with_bias_clamps() const {
    IsingModel out = *this;
    int64_t worst = 0;
    for (int i = 0; i < n; ++i) {
      int64_t row = std::abs(int64_t{h[static_cast<size_t>(i)]});
      for (const auto& [j, w] : adj[static_cast<size_t>(i)]) row += std::abs(int64_t{w});
      worst = std::max(worst, row);
    }
    const auto bias = static_cast<weight_t>(2 * worst);
    for (const auto& [i, val] : clamps) {
      const int sign = is_up(val) ? 1 : -1;
      out.h[static_cast<size_t>(i)] += static_cast<weight_t>(sign * bias);
    }
    out.clamps.clear();
    return out;
  }

 private:
  void accumulate(int i, int j, weight_t w) {
    for (auto& [k, ew] : adj[static_cast<size_t>(i)]) {
      if (k == j) {
        ew += w;
        return;
      }
    }
    adj[static_cast<size_t>(i)].emplace_back(j, w);
  }
};

// ---------------------------------------------------------------------------
// p-bit update rule

/// m_i = sgn[tanh(beta*I_i) - u], u uniform on (-1,1). Pr[+1] = (1+tanh(beta*I_i))/2.
inline spin_t pbit_update(double field, double beta, double u) {
  return std::tanh(beta * field) - u >= 0.0 ? spin_t{1} : spin_t{-1};
}

// ---------------------------------------------------------------------------
// Exact enumeration

/// Probability vector over the free nodes of a model. States are indexed with
/// the lowest-numbered free node as the most significant bit and "up" = 1, so
/// the index of [m1 m2 m3] reads as the binary number m1m2m3.
struct Distribution {
  std::vector<int> nodes;  // free nodes, ascending
  std::vector<double> p;   // size 2^nodes.size()

  size_t size() const { return p.size(); }
};

inline size_t state_index(const SpinState& s, const std::vector<int>& nodes) {
  size_t idx = 0;
  for (int node : nodes) idx = (idx << 1) | (is_up(s[node]) ? 1u : 0u);
  return idx;
}

inline void assign_from_index(SpinState& s, size_t idx, const std::vector<int>& nodes) {
  const size_t f = nodes.size();
  for (size_t r = 0; r < f; ++r) {
    const bool up = (idx >> (f - 1 - r)) & 1u;
    s[nodes[r]] = up ? up_value(s.rep) : down_value(s.rep);
  }
}

inline SpinState state_from_index(const IsingModel& model, size_t idx) {
  SpinState s = model.make_state(down_value(model.rep));
  assign_from_index(s, idx, model.free_nodes());
  return s;
}

constexpr int kMaxEnumerationNodes = 24;

/// Calls fn(index, state) for every assignment of the free nodes.
template <typename Fn>
void for_each_free_state(const IsingModel& model, Fn&& fn) {
  const std::vector<int> free = model.free_nodes();
  if (free.size() > kMaxEnumerationNodes)
    throw std::invalid_argument("too many free nodes for exhaustive enumeration");
  const size_t total = size_t{1} << free.size();
  SpinState s = model.make_state(down_value(model.rep));
  for (size_t idx = 0; idx < total; ++idx) {
    assign_from_index(s, idx, free);
    fn(idx, s);
  }
}

/// Exact Boltzmann distribution p ~ exp(-beta*E) over the free nodes.
inline Distribution boltzmann_exact(const IsingModel& model, double beta) {
  if (beta < 0) throw std::invalid_argument("beta must be nonnegative");
  Distribution d;
  d.nodes = model.free_nodes();
  std::vector<double> energies(size_t{1} << d.nodes.size());
  for_each_free_state(model, [&](size_t idx, const SpinState& s) {
    energies[idx] = model.weight_scale * static_cast<double>(model.energy_int(s));
  });
  const double emin = *std::min_element(energies.begin(), energies.end());
  d.p.resize(energies.size());
  double z = 0.0;
  for (size_t k = 0; k < energies.size(); ++k) {
    d.p[k] = std::exp(-beta * (energies[k] - emin));
    z += d.p[k];
  }
  for (double& q : d.p) q /= z;
  return d;
}

// ---------------------------------------------------------------------------
// Binary <-> bipolar correspondence
//
// J_binary = 2*J_bipolar, h_binary = h_bipolar - J_bipolar*1; the Boltzmann
// distributions coincide under the relabeling m in {-1,+1} <-> {0,1} (energies
// differ by a state-independent constant, which is dropped here). With these
// halved binary weights the raw binary energy is E_bipolar/2 + const, and the
// machine's (1+tanh)/2 activation supplies the missing factor of two; here
// that factor lives in weight_scale so that energies, sampling and the exact
// distribution stay consistent across both forms.

inline spin_t convert_spin(Rep from, Rep to, spin_t v) {
  if (from == to) return v;
  return is_up(v) ? up_value(to) : down_value(to);
}

inline SpinState convert_state(const SpinState& s, Rep to) {
  SpinState out(to, s.size(), down_value(to));
  for (int i = 0; i < s.size(); ++i) out[i] = convert_spin(s.rep, to, s[i]);
  return out;
}

inline IsingModel to_binary(const IsingModel& m) {
  if (m.rep != Rep::bipolar) throw std::invalid_argument("to_binary expects a bipolar model");
  IsingModel out(m.n, Rep::binary);
  out.weight_scale = 2.0 * m.weight_scale;
  for (int i = 0; i < m.n; ++i) {
    int64_t row = 0;
    for (const auto& [j, w] : m.adj[static_cast<size_t>(i)]) {
      row += w;
      if (j > i) out.add_edge(i, j, 2 * w);
    }
    out.h[static_cast<size_t>(i)] = static_cast<weight_t>(m.h[static_cast<size_t>(i)] - row);
  }
  for (const auto& [i, val] : m.clamps) out.clamps[i] = convert_spin(Rep::bipolar, Rep::binary, val);
  out.finalize();
  return out;
}

inline IsingModel to_bipolar(const IsingModel& m) {
  if (m.rep != Rep::binary) throw std::invalid_argument("to_bipolar expects a binary model");
  IsingModel out(m.n, Rep::bipolar);
  out.weight_scale = 0.5 * m.weight_scale;
  for (int i = 0; i < m.n; ++i) {
    int64_t row = 0;
    for (const auto& [j, w] : m.adj[static_cast<size_t>(i)]) {
      if (w % 2 != 0) throw std::invalid_argument("binary weights must be even to invert the conversion");
      row += w / 2;
      if (j > i) out.add_edge(i, j, w / 2);
    }
    out.h[static_cast<size_t>(i)] = static_cast<weight_t>(m.h[static_cast<size_t>(i)] + row);
  }
  for (const auto& [i, val] : m.clamps) out.clamps[i] = convert_spin(Rep::binary, Rep::bipolar, val);
  out.finalize();
  return out;
}

// ---------------------------------------------------------------------------
// JSON model format:
// {n, representation, edges:[[i,j,w]...] with i<j sorted, h:[...], clamps:{"i":v}}

inline nlohmann::json model_to_json(const IsingModel& m) {
  nlohmann::json j;
  j["n"] = m.n;
  j["representation"] = rep_name(m.rep);
  auto es = nlohmann::json::array();
  for (const Edge& e : m.edges()) es.push_back({e.i, e.j, e.w});
  j["edges"] = std::move(es);
  j["h"] = m.h;
  nlohmann::json cl = nlohmann::json::object();
  for (const auto& [i, val] : m.clamps) cl[std::to_string(i)] = static_cast<int>(val);
  j["clamps"] = std::move(cl);
  if (m.weight_scale != 1.0) j["scale"] = m.weight_scale;
  if (m.energy_offset != 0) j["energy_offset"] = m.energy_offset;
  return j;
}

inline IsingModel model_from_json(const nlohmann::json& j) {
  IsingModel m(j.at("n").get<int>(), rep_from_name(j.at("representation").get<std::string>()));
  for (const auto& e : j.at("edges")) {
    const int i = e.at(0).get<int>();
    const int k = e.at(1).get<int>();
    if (i >= k) throw std::invalid_argument("model JSON edges must satisfy i<j");
    m.add_edge(i, k, e.at(2).get<weight_t>());
  }
  m.h = j.at("h").get<std::vector<weight_t>>();
  if (static_cast<int>(m.h.size()) != m.n) throw std::invalid_argument("h length must equal n");
  for (const auto& [key, val] : j.at("clamps").items())
    m.clamp(std::stoi(key), static_cast<spin_t>(val.get<int>()));
  if (j.contains("scale")) m.weight_scale = j["scale"].get<double>();
  if (j.contains("energy_offset")) m.energy_offset = j["energy_offset"].get<int64_t>();
  m.finalize();
  return m;
}

inline void save_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

inline nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

/// Packs a state into hex, node 0 as the most significant bit of the first nibble.
inline std::string state_to_hex(const SpinState& s) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  int nibble = 0, bits = 0;
  for (int i = 0; i < s.size(); ++i) {
    nibble = (nibble << 1) | (is_up(s[i]) ? 1 : 0);
    if (++bits == 4) {
      out.push_back(digits[nibble]);
      nibble = 0;
      bits = 0;
    }
  }
  if (bits > 0) out.push_back(digits[nibble << (4 - bits)]);
  return out;
}

}  // namespace spim

#pragma once

// Degree-bounded sparsification. High-fan-out nodes are split into replicas
// tied by ferromagnetic copy couplings (J_T > 0); at the end of an annealing
// schedule the replicas agree and the projected ground states coincide with
// the original model's. Problem circuits use the two dedicated schemes
// (input copy trees for the factorizer, occurrence chains for 3SAT); generic
// models are split into replica chains.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "spim/circuit.hpp"
#include "spim/model.hpp"

namespace spim {

/// Copy-gate p-bits added when fanning one signal out to m consumers through
/// a (k-1)-ary tree: f(m,k) = sum of a_i, a_0 = m, a_i = ceil(a_{i-1}/(k-1)).
inline int copy_tree_size(int m, int k) {
  if (k < 3) throw std::invalid_argument("copy tree needs k >= 3");
  int a = m, sum = 0;
  while (a > 1) {
    a = (a + k - 2) / (k - 1);
    sum += a;
  }
  return sum;
}

/// Sparse p-bit count for an m-bit-per-factor factorizer at degree bound k.
inline int predict_sparse_count_factorizer(int m, int k) {
  if (m < 2) throw std::invalid_argument("factorizer needs m >= 2");
  if (k < 5) throw std::invalid_argument("factorizer sparsification needs k >= 5");
  return 8 * m * m - 5 * m + 2 * m * copy_tree_size(m, k);
}

/// Sparse p-bit count for a c-clause 3SAT circuit (k = 4 scheme): ceil(9c/2).
inline int predict_sparse_count_3sat(int c) {
  if (c < 1) throw std::invalid_argument("3SAT needs at least one clause");
  return (9 * c + 1) / 2;
}

/// Replica-majority projection of a sparse state back onto the fused nodes.
/// Ties take the value of the lowest-indexed replica. The flag reports
/// whether every replica group agreed internally.
inline std::pair<SpinState, bool> project(const SpinState& sparse_state, const SparsifyPlan& plan) {
  if (sparse_state.size() != plan.sparse_n) throw std::invalid_argument("state does not match plan");
  SpinState fused(sparse_state.rep, plan.fused_n, down_value(sparse_state.rep));
  bool agree = true;
  for (int fn = 0; fn < plan.fused_n; ++fn) {
    const auto& grp = plan.groups[static_cast<size_t>(fn)];
    if (grp.empty()) throw std::invalid_argument("plan has an empty replica group");
    int ups = 0, lowest = grp.front();
    for (int node : grp) {
      if (is_up(sparse_state[node])) ++ups;
      lowest = std::min(lowest, node);
    }
    const int downs = static_cast<int>(grp.size()) - ups;
    if (ups != 0 && downs != 0) agree = false;
    spin_t val;
    if (ups > downs)
      val = up_value(sparse_state.rep);
    else if (ups < downs)
      val = down_value(sparse_state.rep);
    else
      val = sparse_state[lowest];
    fused[fn] = val;
  }
  return {fused, agree};
}

// ---------------------------------------------------------------------------
// Generic model-level sparsification: every node of degree > k is replaced by
// a chain of replicas, each holding at most k couplings (payload + copy).
// A chain with r replicas carries 2(k-1) + (r-2)(k-2) payload edges. Clamped
// nodes split without copy edges (all replicas are clamped alike), k payload
// edges per replica. The node bias stays on the first replica, which is exact
// for bias-free splits; biased nodes built from gates should be split at the
// circuit level (sparsify_circuit), where each gate keeps its own bias.

struct SparsifyResult {
  IsingModel model;
  SparsifyPlan plan;
};

inline SparsifyResult sparsify(const IsingModel& input, int k, weight_t j_t = 1) {
  if (k < 3) throw std::invalid_argument("sparsify needs k >= 3");
  if (j_t <= 0) throw std::invalid_argument("copy coupling J_T must be positive");

  SparsifyPlan plan;
  plan.k = k;
  plan.j_t = j_t;
  plan.fused_n = input.n;
  plan.groups.assign(static_cast<size_t>(input.n), {});

  // replica count and payload capacity per replica slot
  auto replicas_needed = [&](int degree, bool clamped) {
    if (degree <= k) return 1;
    if (clamped) return (degree + k - 1) / k;
    const int extra = degree - 2 * (k - 1);
    return 2 + (extra > 0 ? (extra + k - 3) / (k - 2) : 0);
  };

  int next = 0;
  for (int i = 0; i < input.n; ++i) {
    const int r = replicas_needed(input.degree(i), input.is_clamped(i));
    for (int q = 0; q < r; ++q) plan.groups[static_cast<size_t>(i)].push_back(next++);
  }
  plan.sparse_n = next;

  IsingModel out(next, input.rep);
  out.weight_scale = input.weight_scale;
  out.energy_offset = input.energy_offset;

  // payload slots: fill replicas in order, each leaving room for its copies
  std::vector<size_t> cursor(static_cast<size_t>(input.n), 0);  // replica being filled
  std::vector<int> used(static_cast<size_t>(next), 0);
  auto capacity = [&](int node, size_t idx) {
    const auto& grp = plan.groups[static_cast<size_t>(node)];
    if (grp.size() == 1) return k;
    if (input.is_clamped(node)) return k;
    const bool endpoint = idx == 0 || idx + 1 == grp.size();
    return endpoint ? k - 1 : k - 2;
  };
  auto place = [&](int node) {
    const auto& grp = plan.groups[static_cast<size_t>(node)];
    size_t& at = cursor[static_cast<size_t>(node)];
    while (used[static_cast<size_t>(grp[at])] >= capacity(node, at)) {
      ++at;
      if (at >= grp.size()) throw std::logic_error("replica capacity exhausted");
    }
    ++used[static_cast<size_t>(grp[at])];
    return grp[at];
  };

  // payload edges, neighbor order (canonical): ascending (i, j)
  for (const Edge& e : input.edges()) {
    out.add_edge(place(e.i), place(e.j), e.w);
  }
  // bias goes to the first replica
  for (int i = 0; i < input.n; ++i)
    out.h[static_cast<size_t>(plan.groups[static_cast<size_t>(i)].front())] = input.h[static_cast<size_t>(i)];

  // copy chains
  for (int i = 0; i < input.n; ++i) {
    const auto& grp = plan.groups[static_cast<size_t>(i)];
    if (grp.size() < 2 || input.is_clamped(i)) continue;
    for (size_t q = 1; q < grp.size(); ++q) {
      out.add_edge(grp[q - 1], grp[q], j_t);
      plan.copy_edges.emplace_back(grp[q - 1], grp[q]);
    }
  }

  // clamps replicate
  for (const auto& [i, val] : input.clamps)
    for (int node : plan.groups[static_cast<size_t>(i)]) out.clamp(node, val);

  out.finalize();
  if (out.max_degree() > k) throw std::logic_error("sparsify failed to meet the degree bound");
  return {std::move(out), std::move(plan)};
}

// ---------------------------------------------------------------------------
// Circuit-level sparsification (paper schemes, exact node counts)

struct SparsifyCircuitResult {
  Circuit circuit;  // carries the plan
  SparsifyPlan plan;
};

namespace detail {

/// Gate-aware chain split for arbitrary circuits: each replica of a node
/// serves whole gate pins (so every gate keeps its own couplings and bias on
/// one replica) plus its copy ties, within the degree bound.
inline SparsifyCircuitResult sparsify_circuit_generic(const Circuit& c, int k, weight_t j_t) {
  if (k < 3) throw std::invalid_argument("sparsify needs k >= 3");
  if (j_t <= 0) throw std::invalid_argument("copy coupling J_T must be positive");

  struct Incidence {
    size_t gate;
    int pin;
    int cost;  // other pins of the gate = neighbor budget it consumes
  };
  std::vector<std::vector<Incidence>> inc(static_cast<size_t>(c.n));
  for (size_t gi = 0; gi < c.gates.size(); ++gi) {
    const auto& g = c.gates[gi];
    for (int p = 0; p < static_cast<int>(g.pins.size()); ++p)
      inc[static_cast<size_t>(g.pins[static_cast<size_t>(p)])].push_back(
          {gi, p, static_cast<int>(g.pins.size()) - 1});
  }

  SparsifyPlan plan;
  plan.k = k;
  plan.j_t = j_t;
  plan.fused_n = c.n;
  plan.groups.assign(static_cast<size_t>(c.n), {});

  // pack whole gate pins into leaf bins; two bins form a chain, more get a
  // copy tree of payload-free hubs (always feasible within the bound)
  std::vector<std::vector<int>> replica_of_incidence(static_cast<size_t>(c.n));
  std::vector<std::vector<std::pair<int, int>>> node_copies(static_cast<size_t>(c.n));
  int next = 0;
  for (int v = 0; v < c.n; ++v) {
    const bool clamped = c.clamps.count(v) != 0;
    int total = 0, worst = 0;
    for (const Incidence& in : inc[static_cast<size_t>(v)]) {
      total += in.cost;
      worst = std::max(worst, in.cost);
    }
    const int leaf_cap = (total <= k) ? k : (clamped ? k : k - 1);
    if (worst > leaf_cap) throw std::invalid_argument("k too small for a gate's mandatory pin structure");
    std::vector<int> fill;  // used budget per bin, first fit
    for (const Incidence& in : inc[static_cast<size_t>(v)]) {
      size_t b = 0;
      while (b < fill.size() && fill[b] + in.cost > leaf_cap) ++b;
      if (b == fill.size()) fill.push_back(0);
      fill[b] += in.cost;
      replica_of_incidence[static_cast<size_t>(v)].push_back(static_cast<int>(b));
    }
    if (fill.empty()) fill.push_back(0);  // isolated node keeps one replica

    auto& grp = plan.groups[static_cast<size_t>(v)];
    for (size_t b = 0; b < fill.size(); ++b) grp.push_back(next++);
    if (!clamped && fill.size() == 2) {
      node_copies[static_cast<size_t>(v)].emplace_back(grp[0], grp[1]);
    } else if (!clamped && fill.size() > 2) {
      std::vector<std::pair<int, int>> copies;
      std::vector<int> level(grp.begin(), grp.end());
      while (level.size() > 1) {
        std::vector<int> up;
        for (size_t at = 0; at < level.size(); at += static_cast<size_t>(k - 1)) {
          const int hub = next++;
          grp.push_back(hub);
          for (size_t q = at; q < std::min(level.size(), at + static_cast<size_t>(k - 1)); ++q)
            copies.emplace_back(hub, level[q]);
          up.push_back(hub);
        }
        level = std::move(up);
      }
      // root first so replica values flow downward in forward evaluation
      node_copies[static_cast<size_t>(v)].assign(copies.rbegin(), copies.rend());
    }
  }
  plan.sparse_n = next;

  Circuit out;
  out.n = next;
  out.kind = c.kind;
  for (int v = 0; v < c.n; ++v)
    for (const auto& [a, b] : node_copies[static_cast<size_t>(v)]) {
      out.gates.push_back({GateKind::kCopy, {a, b}, 0, j_t});
      plan.copy_edges.emplace_back(a, b);
    }
  // original gates with pins remapped to their replicas
  std::vector<GateInstance> remapped = c.gates;
  for (int v = 0; v < c.n; ++v) {
    for (size_t q = 0; q < inc[static_cast<size_t>(v)].size(); ++q) {
      const Incidence& in = inc[static_cast<size_t>(v)][q];
      const int replica = plan.groups[static_cast<size_t>(v)][static_cast<size_t>(
          replica_of_incidence[static_cast<size_t>(v)][q])];
      remapped[in.gate].pins[static_cast<size_t>(in.pin)] = replica;
    }
  }
  for (auto& g : remapped) out.gates.push_back(std::move(g));

  for (const auto& [v, val] : c.clamps)
    for (int node : plan.groups[static_cast<size_t>(v)]) out.clamps[node] = val;
  if (c.planted) {
    std::vector<spin_t> planted(static_cast<size_t>(next));
    for (int v = 0; v < c.n; ++v)
      for (int node : plan.groups[static_cast<size_t>(v)])
        planted[static_cast<size_t>(node)] = (*c.planted)[static_cast<size_t>(v)];
    out.planted = std::move(planted);
  }
  out.plan = plan;
  return {std::move(out), std::move(plan)};
}

}  // namespace detail

/// Sparsifies a problem circuit with its dedicated scheme. Clamps and planted
/// data are carried over (clamp set is re-derived from the problem meta).
inline SparsifyCircuitResult sparsify_circuit(const Circuit& c, int k, weight_t j_t = 1) {
  if (c.kind == ProblemKind::factorizer) {
    auto built = detail::build_factorizer_graphs(c.m, k, j_t);
    Circuit sp = std::move(built.sparse);
    if (c.product != 0) clamp_product(sp, c.product);
    if (c.factor_a != 0) set_planted_factors(sp, c.factor_a, c.factor_b);
    return {std::move(sp), std::move(built.plan)};
  }
  if (c.kind == ProblemKind::sat) {
    auto built = detail::build_sat_graphs(c.cnf, k, j_t);
    Circuit sp = std::move(built.sparse);
    bool output_clamped = false;
    for (int node : c.output_nodes)
      if (c.clamps.count(node)) output_clamped = true;
    if (output_clamped) clamp_output_true(sp);
    if (c.planted) {
      // re-derive from the variable assignment of the fused planted state
      std::vector<uint8_t> assign(static_cast<size_t>(c.cnf.v));
      for (int x = 0; x < c.cnf.v; ++x)
        assign[static_cast<size_t>(x)] = is_up((*c.planted)[static_cast<size_t>(c.var_nodes[static_cast<size_t>(x)].front())]) ? 1 : 0;
      set_planted_assignment(sp, assign);
    }
    return {std::move(sp), std::move(built.plan)};
  }
  return detail::sparsify_circuit_generic(c, k, j_t);
}

}  // namespace spim

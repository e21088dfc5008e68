#pragma once

// Gate netlists and problem compilers. A Circuit is a list of gate instances
// over global node ids (fusion = shared ids); compose() sums the gate J/h
// blocks into one IsingModel. Builders produce the array-multiplier
// factorizer and the CNF/3SAT solver circuits in both their fused and
// degree-bounded sparse forms from a single wiring description, so the
// replica plan between the two is correct by construction.

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spim/gates.hpp"
#include "spim/model.hpp"

namespace spim {

// ---------------------------------------------------------------------------
// CNF

struct CnfFormula {
  int v = 0;
  std::vector<std::array<int, 3>> clauses;  // signed literals, |lit| in [1, v]

  int c() const { return static_cast<int>(clauses.size()); }

  void check() const {
    if (v <= 0) throw std::invalid_argument("CNF must have at least one variable");
    for (const auto& cl : clauses)
      for (int lit : cl)
        if (lit == 0 || std::abs(lit) > v) throw std::invalid_argument("CNF literal out of range");
  }
};

/// Standard DIMACS reader ("p cnf v c", clauses terminated by 0, 'c' comments,
/// SATLIB '%' trailer tolerated). Clauses must have exactly three literals.
inline CnfFormula parse_dimacs(std::istream& in) {
  CnfFormula cnf;
  int expected_clauses = -1;
  std::string line;
  std::vector<int> lits;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == 'c') continue;
    if (line[0] == '%') break;
    std::istringstream ls(line);
    if (line[0] == 'p') {
      std::string p, fmt;
      if (!(ls >> p >> fmt >> cnf.v >> expected_clauses) || fmt != "cnf")
        throw std::invalid_argument("malformed DIMACS header");
      continue;
    }
    if (expected_clauses < 0) throw std::invalid_argument("DIMACS clause before header");
    int lit;
    while (ls >> lit) {
      if (lit == 0) {
        if (lits.size() != 3) throw std::invalid_argument("only 3SAT clauses are supported");
        cnf.clauses.push_back({lits[0], lits[1], lits[2]});
        lits.clear();
      } else {
        lits.push_back(lit);
      }
    }
    if (static_cast<int>(cnf.clauses.size()) == expected_clauses) break;
  }
  if (!lits.empty()) throw std::invalid_argument("unterminated DIMACS clause");
  if (expected_clauses >= 0 && cnf.c() != expected_clauses)
    throw std::invalid_argument("DIMACS clause count mismatch");
  cnf.check();
  return cnf;
}

inline CnfFormula read_cnf(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CNF: " + path);
  return parse_dimacs(in);
}

inline void write_dimacs(const CnfFormula& cnf, std::ostream& out) {
  out << "p cnf " << cnf.v << ' ' << cnf.c() << '\n';
  for (const auto& cl : cnf.clauses) out << cl[0] << ' ' << cl[1] << ' ' << cl[2] << " 0\n";
}

inline void write_cnf(const CnfFormula& cnf, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_dimacs(cnf, out);
}

/// Number of clauses with at least one true literal. assignment[i] is the
/// value of variable i+1.
inline int satisfied_clauses(const CnfFormula& cnf, const std::vector<uint8_t>& assignment) {
  if (static_cast<int>(assignment.size()) != cnf.v)
    throw std::invalid_argument("assignment size must equal variable count");
  int sat = 0;
  for (const auto& cl : cnf.clauses) {
    for (int lit : cl) {
      const bool val = assignment[static_cast<size_t>(std::abs(lit) - 1)] != 0;
      if ((lit > 0) == val) {
        ++sat;
        break;
      }
    }
  }
  return sat;
}

// ---------------------------------------------------------------------------
// Circuits

struct GateInstance {
  GateKind kind;
  std::vector<int> pins;  // pin role index -> global node
  uint8_t neg = 0;        // bit p set = pin p negated (literal complement)
  weight_t weight = 1;    // coupling multiplier (copy-gate strength J_T)
};

/// Replica bookkeeping between a fused graph and its sparsified counterpart.
struct SparsifyPlan {
  int k = 0;
  weight_t j_t = 1;
  int fused_n = 0;
  int sparse_n = 0;
  std::vector<std::vector<int>> groups;  // fused node -> sparse replica nodes
  std::vector<std::pair<int, int>> copy_edges;
};

enum class ProblemKind : uint8_t { custom, factorizer, sat };

inline const char* problem_name(ProblemKind k) {
  switch (k) {
    case ProblemKind::custom: return "custom";
    case ProblemKind::factorizer: return "factorizer";
    case ProblemKind::sat: return "sat";
  }
  throw std::invalid_argument("bad problem kind");
}

struct Circuit {
  int n = 0;
  std::vector<GateInstance> gates;  // in dataflow order (forward evaluation)
  std::map<int, spin_t> clamps;     // bipolar values
  ProblemKind kind = ProblemKind::custom;

  // factorizer meta
  int m = 0;
  uint64_t product = 0;
  uint64_t factor_a = 0, factor_b = 0;
  std::vector<std::vector<int>> a_nodes, b_nodes, p_nodes;  // per-bit replica groups, canonical first

  // sat meta
  CnfFormula cnf;
  std::vector<std::vector<int>> var_nodes;  // per-variable replica groups
  std::vector<int> output_nodes;

  std::optional<std::vector<spin_t>> planted;  // full bipolar state
  std::optional<SparsifyPlan> plan;            // set on sparsified circuits
};

/// Sums gate J/h blocks over the fused node ids. A gate edge whose two pins
/// land on one node contributes a constant (m^2 = 1) and is dropped into the
/// model's energy offset.
inline IsingModel compose(const Circuit& c) {
  IsingModel model(c.n, Rep::bipolar);
  for (const auto& g : c.gates) {
    IsingModel gm = gate_model(g.kind);
    for (int p = 0; p < gm.n; ++p)
      if (g.neg & (1u << p)) gm = negate_pin(gm, p);
    if (static_cast<int>(g.pins.size()) != gm.n) throw std::invalid_argument("gate pin count mismatch");
    for (int p = 0; p < gm.n; ++p) {
      const int np = g.pins[static_cast<size_t>(p)];
      model.check_node(np);
      model.add_bias(np, g.weight * gm.h[static_cast<size_t>(p)]);
      for (const auto& [q, w] : gm.adj[static_cast<size_t>(p)]) {
        if (q < p) continue;  // each gate edge once
        const int nq = g.pins[static_cast<size_t>(q)];
        if (np == nq)
          model.energy_offset -= g.weight * w;  // -J m^2, bipolar
        else
          model.add_edge(np, nq, g.weight * w);
      }
    }
  }
  for (const auto& [i, val] : c.clamps) model.clamp(i, val);
  model.finalize();
  return model;
}

// ---------------------------------------------------------------------------
// Forward evaluation (planted solutions)

namespace detail {

inline spin_t bool_to_spin(bool b) { return b ? spin_t{1} : spin_t{-1}; }

/// Evaluates the Boolean function of each gate over a partially assigned
/// state, writing outputs. Conflicting writes mean the seed assignment is
/// inconsistent with the circuit.
inline void eval_gates(const Circuit& c, std::vector<spin_t>& vals) {
  auto read = [&](const GateInstance& g, int p) -> bool {
    const spin_t v = vals[static_cast<size_t>(g.pins[static_cast<size_t>(p)])];
    if (v == 0) throw std::logic_error("forward evaluation read an unset node");
    const bool b = v > 0;
    return (g.neg & (1u << p)) ? !b : b;
  };
  auto write = [&](const GateInstance& g, int p, bool b) {
    if (g.neg & (1u << p)) b = !b;
    spin_t& slot = vals[static_cast<size_t>(g.pins[static_cast<size_t>(p)])];
    const spin_t v = bool_to_spin(b);
    if (slot != 0 && slot != v) throw std::invalid_argument("planted assignment is inconsistent");
    slot = v;
  };
  for (const auto& g : c.gates) {
    switch (g.kind) {
      case GateKind::kCopy: write(g, 1, read(g, 0)); break;
      case GateKind::kNot: write(g, 1, !read(g, 0)); break;
      case GateKind::kAnd: write(g, 2, read(g, 0) && read(g, 1)); break;
      case GateKind::kOr: write(g, 2, read(g, 0) || read(g, 1)); break;
      case GateKind::kFullAdder: {
        const bool a = read(g, 0), b = read(g, 1), ci = read(g, 2);
        write(g, 3, a ^ b ^ ci);
        write(g, 4, (a && b) || (a && ci) || (b && ci));
        break;
      }
    }
  }
}

inline void check_planted_against_clamps(const Circuit& c, const std::vector<spin_t>& vals) {
  for (const auto& [node, want] : c.clamps) {
    const spin_t got = vals[static_cast<size_t>(node)];
    if (got == 0) throw std::logic_error("clamped node not reached by forward evaluation");
    if (got != want) throw std::invalid_argument("planted assignment violates a clamp");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Factorizer: m-bit x m-bit array multiplier run in reverse. m^2 AND gates
// form the partial products; m(m-1) full adders accumulate them row by row
// with rippled carries. Fused form has 3m^2 + m nodes; the sparse form keeps
// every gate pin separate (8m^2 - 5m pins), joins nets with copy gates, and
// fans each input out through a (k-1)-ary copy tree (2m f(m,k) extra nodes).

namespace detail {

struct FaPins {
  int in1 = -1, in2 = -1, cin = -1, s = -1, cout = -1;
};

struct FactorizerBuild {
  Circuit fused;
  Circuit sparse;
  SparsifyPlan plan;
};

inline FactorizerBuild build_factorizer_graphs(int m, int k, weight_t j_t) {
  if (m < 2) throw std::invalid_argument("factorizer needs m >= 2 bits per factor");
  if (k < 5) throw std::invalid_argument("factorizer sparsification needs k >= 5 (full-adder pins use 4 gate edges + 1 copy)");
  if (j_t <= 0) throw std::invalid_argument("copy coupling J_T must be positive");

  FactorizerBuild out;
  Circuit& fu = out.fused;
  Circuit& sp = out.sparse;
  SparsifyPlan& plan = out.plan;
  plan.k = k;
  plan.j_t = j_t;

  int fused_next = 0;
  int sparse_next = 0;
  auto alloc_fused = [&]() {
    plan.groups.emplace_back();
    return fused_next++;
  };
  auto alloc_sparse = [&](int fused_id) {
    plan.groups[static_cast<size_t>(fused_id)].push_back(sparse_next);
    return sparse_next++;
  };

  // Inputs (fused nodes only; sparse input pins live on the AND gates).
  std::vector<int> af(static_cast<size_t>(m)), bf(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) af[static_cast<size_t>(i)] = alloc_fused();
  for (int j = 0; j < m; ++j) bf[static_cast<size_t>(j)] = alloc_fused();
  const int s0_f = alloc_fused();

  // Full-adder scaffolding, rows 1..m-1 over product positions r..r+m-1.
  // in1 of row r>=2 is the previous row's output at the same position.
  std::vector<std::map<int, FaPins>> fa_f(static_cast<size_t>(m));  // row -> pos -> fused pins
  std::vector<int> const_zero_f;
  for (int r = 1; r <= m - 1; ++r) {
    for (int pos = r; pos <= r + m - 1; ++pos) {
      FaPins p;
      if (r == 1) {
        // both addends are partial-product bits; position m has only one
        p.in1 = alloc_fused();
        p.in2 = alloc_fused();
        if (pos == m) const_zero_f.push_back(p.in2);
      } else {
        p.in1 = (pos <= r + m - 2) ? fa_f[static_cast<size_t>(r - 1)].at(pos).s
                                   : fa_f[static_cast<size_t>(r - 1)].at(pos - 1).cout;
        p.in2 = alloc_fused();
      }
      if (pos == r) {
        p.cin = alloc_fused();
        const_zero_f.push_back(p.cin);
      } else {
        p.cin = fa_f[static_cast<size_t>(r)].at(pos - 1).cout;
      }
      p.s = alloc_fused();
      p.cout = alloc_fused();
      fa_f[static_cast<size_t>(r)][pos] = p;
    }
  }

  const int expected_fused = 3 * m * m + m;
  if (fused_next != expected_fused) throw std::logic_error("fused factorizer node count mismatch");

  // AND output destinations: (i,j) -> fused node.
  auto and_out_f = [&](int i, int j) -> int {
    if (i == 0 && j == 0) return s0_f;
    if (j == 0) return fa_f[1].at(i).in1;
    if (j == 1) return (i == m - 1) ? fa_f[1].at(m).in1 : fa_f[1].at(i + 1).in2;
    return fa_f[static_cast<size_t>(j)].at(i + j).in2;
  };

  // --- Sparse pins -------------------------------------------------------
  struct SpAnd {
    int a = -1, b = -1, o = -1;
  };
  std::vector<SpAnd> sp_and(static_cast<size_t>(m) * static_cast<size_t>(m));
  auto and_idx = [&](int i, int j) { return static_cast<size_t>(i) * static_cast<size_t>(m) + static_cast<size_t>(j); };
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      SpAnd& g = sp_and[and_idx(i, j)];
      g.a = alloc_sparse(af[static_cast<size_t>(i)]);
      g.b = alloc_sparse(bf[static_cast<size_t>(j)]);
      g.o = alloc_sparse(and_out_f(i, j));
    }

  std::vector<std::map<int, FaPins>> fa_s(static_cast<size_t>(m));
  for (int r = 1; r <= m - 1; ++r) {
    for (int pos = r; pos <= r + m - 1; ++pos) {
      const FaPins& f = fa_f[static_cast<size_t>(r)].at(pos);
      FaPins p;
      p.in1 = alloc_sparse(f.in1);
      p.in2 = alloc_sparse(f.in2);
      p.cin = alloc_sparse(f.cin);
      p.s = alloc_sparse(f.s);
      p.cout = alloc_sparse(f.cout);
      fa_s[static_cast<size_t>(r)][pos] = p;
    }
  }

  // Copy trees fanning each input out to its m AND-gate pins. Built leaf
  // level up, every k-1 nodes get one parent; the last node is the canonical
  // input bit. Gates are later emitted root-first for forward evaluation.
  std::vector<std::vector<std::pair<int, int>>> tree_gates;  // (parent, child)
  std::vector<int> a_root(static_cast<size_t>(m)), b_root(static_cast<size_t>(m));
  auto build_tree = [&](int fused_input, const std::vector<int>& leaves) {
    std::vector<std::pair<int, int>> copies;
    std::vector<int> level = leaves;
    while (level.size() > 1) {
      std::vector<int> next;
      for (size_t at = 0; at < level.size(); at += static_cast<size_t>(k - 1)) {
        const int parent = alloc_sparse(fused_input);
        for (size_t q = at; q < std::min(level.size(), at + static_cast<size_t>(k - 1)); ++q)
          copies.emplace_back(parent, level[q]);
        next.push_back(parent);
      }
      level = std::move(next);
    }
    tree_gates.push_back(std::move(copies));
    return level[0];
  };
  for (int i = 0; i < m; ++i) {
    std::vector<int> leaves;
    for (int j = 0; j < m; ++j) leaves.push_back(sp_and[and_idx(i, j)].a);
    a_root[static_cast<size_t>(i)] = build_tree(af[static_cast<size_t>(i)], leaves);
  }
  for (int j = 0; j < m; ++j) {
    std::vector<int> leaves;
    for (int i = 0; i < m; ++i) leaves.push_back(sp_and[and_idx(i, j)].b);
    b_root[static_cast<size_t>(j)] = build_tree(bf[static_cast<size_t>(j)], leaves);
  }

  auto f_of = [&](int mm, int kk) {
    int a = mm, sum = 0;
    while (a > 1) {
      a = (a + kk - 2) / (kk - 1);
      sum += a;
    }
    return sum;
  };
  const int expected_sparse = 8 * m * m - 5 * m + 2 * m * f_of(m, k);
  if (sparse_next != expected_sparse) throw std::logic_error("sparse factorizer node count mismatch");

  plan.fused_n = fused_next;
  plan.sparse_n = sparse_next;
  fu.n = fused_next;
  sp.n = sparse_next;

  // --- Gate emission (dataflow order) ------------------------------------
  auto add_copy = [&](Circuit& c, int from, int to) {
    c.gates.push_back({GateKind::kCopy, {from, to}, 0, j_t});
    if (&c == &sp) plan.copy_edges.emplace_back(from, to);
  };

  // Sparse: input trees root-down, then ANDs, then FA rows with their feeds.
  for (auto& copies : tree_gates)
    for (auto it = copies.rbegin(); it != copies.rend(); ++it) add_copy(sp, it->first, it->second);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const SpAnd& g = sp_and[and_idx(i, j)];
      sp.gates.push_back({GateKind::kAnd, {g.a, g.b, g.o}, 0, 1});
    }
  // Fused: ANDs straight onto the fused nodes.
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      fu.gates.push_back({GateKind::kAnd, {af[static_cast<size_t>(i)], bf[static_cast<size_t>(j)], and_out_f(i, j)}, 0, 1});

  auto sp_and_of_fused = [&](int i, int j) { return sp_and[and_idx(i, j)].o; };
  for (int r = 1; r <= m - 1; ++r) {
    for (int pos = r; pos <= r + m - 1; ++pos) {
      const FaPins& f = fa_f[static_cast<size_t>(r)].at(pos);
      const FaPins& s = fa_s[static_cast<size_t>(r)].at(pos);
      fu.gates.push_back({GateKind::kFullAdder, {f.in1, f.in2, f.cin, f.s, f.cout}, 0, 1});

      // Feeds into the sparse FA: AND outputs, previous-row outputs, carries.
      if (r == 1) {
        if (pos <= m - 1) {
          add_copy(sp, sp_and_of_fused(pos, 0), s.in1);
          add_copy(sp, sp_and_of_fused(pos - 1, 1), s.in2);
        } else {
          add_copy(sp, sp_and_of_fused(m - 1, 1), s.in1);
        }
      } else {
        if (pos <= r + m - 2)
          add_copy(sp, fa_s[static_cast<size_t>(r - 1)].at(pos).s, s.in1);
        else
          add_copy(sp, fa_s[static_cast<size_t>(r - 1)].at(pos - 1).cout, s.in1);
        add_copy(sp, sp_and_of_fused(pos - r, r), s.in2);
      }
      if (pos > r) add_copy(sp, fa_s[static_cast<size_t>(r)].at(pos - 1).cout, s.cin);
      sp.gates.push_back({GateKind::kFullAdder, {s.in1, s.in2, s.cin, s.s, s.cout}, 0, 1});
    }
  }

  // --- Meta ---------------------------------------------------------------
  auto fill_meta = [&](Circuit& c, bool is_sparse) {
    c.kind = ProblemKind::factorizer;
    c.m = m;
    c.a_nodes.resize(static_cast<size_t>(m));
    c.b_nodes.resize(static_cast<size_t>(m));
    c.p_nodes.resize(static_cast<size_t>(2 * m));
    for (int i = 0; i < m; ++i) {
      if (is_sparse) {
        // canonical (tree root) first, then the rest of the replica group
        c.a_nodes[static_cast<size_t>(i)].push_back(a_root[static_cast<size_t>(i)]);
        for (int node : plan.groups[static_cast<size_t>(af[static_cast<size_t>(i)])])
          if (node != a_root[static_cast<size_t>(i)]) c.a_nodes[static_cast<size_t>(i)].push_back(node);
        c.b_nodes[static_cast<size_t>(i)].push_back(b_root[static_cast<size_t>(i)]);
        for (int node : plan.groups[static_cast<size_t>(bf[static_cast<size_t>(i)])])
          if (node != b_root[static_cast<size_t>(i)]) c.b_nodes[static_cast<size_t>(i)].push_back(node);
      } else {
        c.a_nodes[static_cast<size_t>(i)] = {af[static_cast<size_t>(i)]};
        c.b_nodes[static_cast<size_t>(i)] = {bf[static_cast<size_t>(i)]};
      }
    }
    auto pick = [&](int fused_id) {
      if (!is_sparse) return fused_id;
      return plan.groups[static_cast<size_t>(fused_id)].front();
    };
    c.p_nodes[0] = {pick(s0_f)};
    for (int r = 1; r <= m - 2; ++r) c.p_nodes[static_cast<size_t>(r)] = {pick(fa_f[static_cast<size_t>(r)].at(r).s)};
    for (int pos = m - 1; pos <= 2 * m - 2; ++pos)
      c.p_nodes[static_cast<size_t>(pos)] = {pick(fa_f[static_cast<size_t>(m - 1)].at(pos).s)};
    c.p_nodes[static_cast<size_t>(2 * m - 1)] = {pick(fa_f[static_cast<size_t>(m - 1)].at(2 * m - 2).cout)};
    // ripple carry-in pins held at logic 0
    for (int z : const_zero_f) {
      if (is_sparse)
        for (int node : plan.groups[static_cast<size_t>(z)]) c.clamps[node] = -1;
      else
        c.clamps[z] = -1;
    }
  };
  fill_meta(fu, false);
  fill_meta(sp, true);
  sp.plan = plan;
  return out;
}

}  // namespace detail

/// Fused m-bit-per-factor multiplier circuit (3m^2 + m p-bits). Run in
/// reverse by clamping the product bits (clamp_product).
inline Circuit build_factorizer(int m) {
  return detail::build_factorizer_graphs(m, 5, 1).fused;
}

/// Clamps the 2m product nodes to the bits of P.
inline void clamp_product(Circuit& c, uint64_t product) {
  if (c.kind != ProblemKind::factorizer) throw std::invalid_argument("clamp_product needs a factorizer circuit");
  const int bits = 2 * c.m;
  if (bits < 64 && product >> bits) throw std::invalid_argument("product does not fit in 2m bits");
  c.product = product;
  for (int r = 0; r < bits; ++r) {
    const spin_t val = detail::bool_to_spin((product >> r) & 1u);
    for (int node : c.p_nodes[static_cast<size_t>(r)]) c.clamps[node] = val;
  }
}

/// Records the known factors and derives the planted ground state by running
/// the multiplier forward on (A, B).
inline void set_planted_factors(Circuit& c, uint64_t a, uint64_t b) {
  if (c.kind != ProblemKind::factorizer) throw std::invalid_argument("planted factors need a factorizer circuit");
  if (c.product == 0 || a * b != c.product) throw std::invalid_argument("planted factors must multiply to the clamped product");
  c.factor_a = a;
  c.factor_b = b;
  std::vector<spin_t> vals(static_cast<size_t>(c.n), 0);
  for (int i = 0; i < c.m; ++i) {
    vals[static_cast<size_t>(c.a_nodes[static_cast<size_t>(i)].front())] = detail::bool_to_spin((a >> i) & 1u);
    vals[static_cast<size_t>(c.b_nodes[static_cast<size_t>(i)].front())] = detail::bool_to_spin((b >> i) & 1u);
  }
  for (const auto& [node, val] : c.clamps) {
    // seed only the held-zero carry pins; product clamps are derived
    bool is_product = false;
    for (const auto& grp : c.p_nodes)
      for (int pn : grp)
        if (pn == node) is_product = true;
    if (!is_product) vals[static_cast<size_t>(node)] = val;
  }
  detail::eval_gates(c, vals);
  detail::check_planted_against_clamps(c, vals);
  c.planted = std::move(vals);
}

// ---------------------------------------------------------------------------
// 3SAT: two OR gates per clause with the middle node fused; every clause
// output meets in one node clamped true (fused form, c + v + 1 p-bits). The
// sparse form gives each literal occurrence its own p-bit joined by copy
// chains and fuses clause outputs in pairs (ceil(9c/2) p-bits, max degree 4).

namespace detail {

struct SatBuild {
  Circuit fused;
  Circuit sparse;
  SparsifyPlan plan;
};

inline SatBuild build_sat_graphs(const CnfFormula& cnf, int k, weight_t j_t) {
  cnf.check();
  if (k < 4) throw std::invalid_argument("3SAT sparsification needs k >= 4 (clause middle pins use 4 gate edges)");
  if (j_t <= 0) throw std::invalid_argument("copy coupling J_T must be positive");
  const int v = cnf.v;
  const int c = cnf.c();

  SatBuild out;
  Circuit& fu = out.fused;
  Circuit& sp = out.sparse;
  SparsifyPlan& plan = out.plan;
  plan.k = k;
  plan.j_t = j_t;
  plan.fused_n = v + c + 1;
  plan.sparse_n = 4 * c + (c + 1) / 2;
  plan.groups.resize(static_cast<size_t>(plan.fused_n));
  fu.n = plan.fused_n;
  sp.n = plan.sparse_n;
  const int out_f = v + c;

  // sparse ids: per clause [occ1 occ2 u occ3], then the paired output nodes
  auto occ_id = [&](int ci, int slot) { return 4 * ci + slot; };
  auto y_id = [&](int ci) { return 4 * c + ci / 2; };
  for (int ci = 0; ci < c; ++ci) {
    const auto& cl = cnf.clauses[static_cast<size_t>(ci)];
    plan.groups[static_cast<size_t>(std::abs(cl[0]) - 1)].push_back(occ_id(ci, 0));
    plan.groups[static_cast<size_t>(std::abs(cl[1]) - 1)].push_back(occ_id(ci, 1));
    plan.groups[static_cast<size_t>(v + ci)].push_back(occ_id(ci, 2));  // middle
    plan.groups[static_cast<size_t>(std::abs(cl[2]) - 1)].push_back(occ_id(ci, 3));
  }
  for (int t = 0; t < (c + 1) / 2; ++t) plan.groups[static_cast<size_t>(out_f)].push_back(4 * c + t);

  // copy chains over each variable's occurrences (in clause order)
  for (int x = 0; x < v; ++x) {
    const auto& grp = plan.groups[static_cast<size_t>(x)];
    for (size_t q = 1; q < grp.size(); ++q) {
      sp.gates.push_back({GateKind::kCopy, {grp[q - 1], grp[q]}, 0, j_t});
      plan.copy_edges.emplace_back(grp[q - 1], grp[q]);
    }
  }

  for (int ci = 0; ci < c; ++ci) {
    const auto& cl = cnf.clauses[static_cast<size_t>(ci)];
    const uint8_t neg1 = static_cast<uint8_t>((cl[0] < 0 ? 1 : 0) | (cl[1] < 0 ? 2 : 0));
    const uint8_t neg2 = static_cast<uint8_t>(cl[2] < 0 ? 2 : 0);
    fu.gates.push_back({GateKind::kOr, {std::abs(cl[0]) - 1, std::abs(cl[1]) - 1, v + ci}, neg1, 1});
    fu.gates.push_back({GateKind::kOr, {v + ci, std::abs(cl[2]) - 1, out_f}, neg2, 1});
    sp.gates.push_back({GateKind::kOr, {occ_id(ci, 0), occ_id(ci, 1), occ_id(ci, 2)}, neg1, 1});
    sp.gates.push_back({GateKind::kOr, {occ_id(ci, 2), occ_id(ci, 3), y_id(ci)}, neg2, 1});
  }

  auto fill_meta = [&](Circuit& cc, bool is_sparse) {
    cc.kind = ProblemKind::sat;
    cc.cnf = cnf;
    cc.var_nodes.resize(static_cast<size_t>(v));
    for (int x = 0; x < v; ++x)
      cc.var_nodes[static_cast<size_t>(x)] = is_sparse ? plan.groups[static_cast<size_t>(x)] : std::vector<int>{x};
    if (is_sparse)
      cc.output_nodes = plan.groups[static_cast<size_t>(out_f)];
    else
      cc.output_nodes = {out_f};
  };
  fill_meta(fu, false);
  fill_meta(sp, true);
  sp.plan = plan;
  return out;
}

}  // namespace detail

/// Fused 3SAT solver circuit (c + v + 1 p-bits).
inline Circuit build_sat(const CnfFormula& cnf) {
  return detail::build_sat_graphs(cnf, 4, 1).fused;
}

/// Clamps the clause-output node(s) true.
inline void clamp_output_true(Circuit& c) {
  if (c.kind != ProblemKind::sat) throw std::invalid_argument("clamp_output_true needs a SAT circuit");
  for (int node : c.output_nodes) c.clamps[node] = 1;
}

/// Records a satisfying assignment and derives the planted state.
inline void set_planted_assignment(Circuit& c, const std::vector<uint8_t>& assignment) {
  if (c.kind != ProblemKind::sat) throw std::invalid_argument("planted assignment needs a SAT circuit");
  if (static_cast<int>(assignment.size()) != c.cnf.v) throw std::invalid_argument("assignment size mismatch");
  std::vector<spin_t> vals(static_cast<size_t>(c.n), 0);
  for (int x = 0; x < c.cnf.v; ++x)
    vals[static_cast<size_t>(c.var_nodes[static_cast<size_t>(x)].front())] =
        detail::bool_to_spin(assignment[static_cast<size_t>(x)] != 0);
  detail::eval_gates(c, vals);
  detail::check_planted_against_clamps(c, vals);
  c.planted = std::move(vals);
}

/// Majority-projected truth value per variable (ties -> lowest replica id).
inline std::vector<uint8_t> assignment_from_state(const SpinState& s, const std::vector<std::vector<int>>& var_nodes) {
  std::vector<uint8_t> out(var_nodes.size(), 0);
  for (size_t x = 0; x < var_nodes.size(); ++x) {
    int ups = 0, lowest = var_nodes[x].front();
    for (int node : var_nodes[x]) {
      if (is_up(s[node])) ++ups;
      lowest = std::min(lowest, node);
    }
    const int downs = static_cast<int>(var_nodes[x].size()) - ups;
    if (ups > downs)
      out[x] = 1;
    else if (ups < downs)
      out[x] = 0;
    else
      out[x] = is_up(s[lowest]) ? 1 : 0;
  }
  return out;
}

/// Integer decoded from per-bit replica groups (bit r = majority of group r).
inline uint64_t decode_bits(const SpinState& s, const std::vector<std::vector<int>>& bit_groups) {
  const std::vector<uint8_t> bits = assignment_from_state(s, bit_groups);
  uint64_t val = 0;
  for (size_t r = 0; r < bits.size(); ++r) val |= static_cast<uint64_t>(bits[r]) << r;
  return val;
}

/// Ground-state energy of a circuit in integer units: the sum of per-gate
/// ground energies. compose() is a sum of gate energy blocks, so any state
/// meeting every gate's truth table attains this bound.
inline int64_t circuit_ground_energy(const Circuit& c) {
  int64_t e = 0;
  for (const auto& g : c.gates) e += g.weight * gate_ground_energy(g.kind);
  return e;
}

// ---------------------------------------------------------------------------
// Circuit JSON (includes the fusion map as pin->node lists, the replica plan,
// and the planted solution)

inline nlohmann::json circuit_to_json(const Circuit& c) {
  nlohmann::json j;
  j["kind"] = problem_name(c.kind);
  j["n"] = c.n;
  auto gs = nlohmann::json::array();
  for (const auto& g : c.gates) {
    nlohmann::json gj;
    gj["g"] = gate_name(g.kind);
    gj["pins"] = g.pins;
    if (g.neg) gj["neg"] = g.neg;
    if (g.weight != 1) gj["w"] = g.weight;
    gs.push_back(std::move(gj));
  }
  j["gates"] = std::move(gs);
  nlohmann::json cl = nlohmann::json::object();
  for (const auto& [i, val] : c.clamps) cl[std::to_string(i)] = static_cast<int>(val);
  j["clamps"] = std::move(cl);
  if (c.kind == ProblemKind::factorizer) {
    j["m"] = c.m;
    j["product"] = c.product;
    j["factor_a"] = c.factor_a;
    j["factor_b"] = c.factor_b;
    j["a_nodes"] = c.a_nodes;
    j["b_nodes"] = c.b_nodes;
    j["p_nodes"] = c.p_nodes;
  } else if (c.kind == ProblemKind::sat) {
    j["v"] = c.cnf.v;
    j["clauses"] = c.cnf.clauses;
    j["var_nodes"] = c.var_nodes;
    j["output_nodes"] = c.output_nodes;
  }
  if (c.planted) j["planted"] = *c.planted;
  if (c.plan) {
    nlohmann::json pj;
    pj["k"] = c.plan->k;
    pj["j_t"] = c.plan->j_t;
    pj["fused_n"] = c.plan->fused_n;
    pj["sparse_n"] = c.plan->sparse_n;
    pj["groups"] = c.plan->groups;
    pj["copy_edges"] = c.plan->copy_edges;
    j["plan"] = std::move(pj);
  }
  return j;
}

inline Circuit circuit_from_json(const nlohmann::json& j) {
  Circuit c;
  c.n = j.at("n").get<int>();
  const std::string kind = j.at("kind").get<std::string>();
  for (const auto& gj : j.at("gates")) {
    GateInstance g;
    g.kind = gate_from_name(gj.at("g").get<std::string>());
    g.pins = gj.at("pins").get<std::vector<int>>();
    g.neg = gj.contains("neg") ? gj["neg"].get<uint8_t>() : 0;
    g.weight = gj.contains("w") ? gj["w"].get<weight_t>() : 1;
    c.gates.push_back(std::move(g));
  }
  for (const auto& [key, val] : j.at("clamps").items())
    c.clamps[std::stoi(key)] = static_cast<spin_t>(val.get<int>());
  if (kind == "factorizer") {
    c.kind = ProblemKind::factorizer;
    c.m = j.at("m").get<int>();
    c.product = j.at("product").get<uint64_t>();
    c.factor_a = j.at("factor_a").get<uint64_t>();
    c.factor_b = j.at("factor_b").get<uint64_t>();
    c.a_nodes = j.at("a_nodes").get<std::vector<std::vector<int>>>();
    c.b_nodes = j.at("b_nodes").get<std::vector<std::vector<int>>>();
    c.p_nodes = j.at("p_nodes").get<std::vector<std::vector<int>>>();
  } else if (kind == "sat") {
    c.kind = ProblemKind::sat;
    c.cnf.v = j.at("v").get<int>();
    c.cnf.clauses = j.at("clauses").get<std::vector<std::array<int, 3>>>();
    c.var_nodes = j.at("var_nodes").get<std::vector<std::vector<int>>>();
    c.output_nodes = j.at("output_nodes").get<std::vector<int>>();
  }
  if (j.contains("planted")) c.planted = j["planted"].get<std::vector<spin_t>>();
  if (j.contains("plan")) {
    SparsifyPlan p;
    const auto& pj = j["plan"];
    p.k = pj.at("k").get<int>();
    p.j_t = pj.at("j_t").get<weight_t>();
    p.fused_n = pj.at("fused_n").get<int>();
    p.sparse_n = pj.at("sparse_n").get<int>();
    p.groups = pj.at("groups").get<std::vector<std::vector<int>>>();
    p.copy_edges = pj.at("copy_edges").get<std::vector<std::pair<int, int>>>();
    c.plan = std::move(p);
  }
  return c;
}

}  // namespace spim

#include <catch2/catch.hpp>

#include <set>

#include "helpers.hpp"
#include "spim/circuit.hpp"
#include "spim/gates.hpp"

using namespace spim;
using spim::test::ground_index_set;
using spim::test::idx;

TEST_CASE("full adder couplings match the reference matrix", "[gates]") {
  const IsingModel fa = gate_model(GateKind::kFullAdder);
  const int ref[5][5] = {{0, -1, -1, 1, 2},
                         {-1, 0, -1, 1, 2},
                         {-1, -1, 0, 1, 2},
                         {1, 1, 1, 0, -2},
                         {2, 2, 2, -2, 0}};
  for (int i = 0; i < 5; ++i) {
    CHECK(fa.h[size_t(i)] == 0);
    for (int j = 0; j < 5; ++j) CHECK(fa.weight(i, j) == ref[i][j]);
  }
}

TEST_CASE("every gate's minima are its truth table", "[gates]") {
  CHECK(ground_index_set(gate_model(GateKind::kCopy)) == std::set<size_t>{idx("00"), idx("11")});
  CHECK(ground_index_set(gate_model(GateKind::kNot)) == std::set<size_t>{idx("01"), idx("10")});
  CHECK(ground_index_set(gate_model(GateKind::kAnd)) ==
        std::set<size_t>{idx("000"), idx("010"), idx("100"), idx("111")});
  CHECK(ground_index_set(gate_model(GateKind::kOr)) ==
        std::set<size_t>{idx("000"), idx("011"), idx("101"), idx("111")});
  std::set<size_t> fa_truth;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int ci = 0; ci < 2; ++ci)
        fa_truth.insert(size_t((a << 4) | (b << 3) | (ci << 2) | ((a ^ b ^ ci) << 1) | ((a + b + ci) >= 2)));
  CHECK(ground_index_set(gate_model(GateKind::kFullAdder)) == fa_truth);
}

TEST_CASE("gate ground-state counts and energy gaps", "[gates]") {
  const std::pair<GateKind, size_t> expect[] = {{GateKind::kCopy, 2},
                                                {GateKind::kNot, 2},
                                                {GateKind::kAnd, 4},
                                                {GateKind::kOr, 4},
                                                {GateKind::kFullAdder, 8}};
  for (const auto& [kind, count] : expect) {
    const IsingModel g = gate_model(kind);
    CHECK(ground_states(g).size() == count);
    const int64_t ground = ground_energy_int(g);
    CHECK(ground == gate_ground_energy(kind));
    int64_t first_excited = INT64_MAX;
    for_each_free_state(g, [&](size_t, const SpinState& s) {
      const int64_t e = g.energy_int(s);
      if (e > ground) first_excited = std::min(first_excited, e);
    });
    CHECK(first_excited - ground >= 1);
  }
}

TEST_CASE("negate_pin complements one variable", "[gates]") {
  SECTION("OR with its first input negated") {
    const IsingModel neg = negate_pin(gate_model(GateKind::kOr), 0);
    CHECK(ground_index_set(neg) == std::set<size_t>{idx("100"), idx("111"), idx("001"), idx("011")});
  }
  SECTION("double negation is the identity") {
    const IsingModel orig = gate_model(GateKind::kFullAdder);
    const IsingModel twice = negate_pin(negate_pin(orig, 2), 2);
    for (int i = 0; i < 5; ++i) {
      CHECK(twice.h[size_t(i)] == orig.h[size_t(i)]);
      for (int j = 0; j < 5; ++j) CHECK(twice.weight(i, j) == orig.weight(i, j));
    }
  }
  SECTION("AND with negated output is NAND") {
    const IsingModel nand = negate_pin(gate_model(GateKind::kAnd), 2);
    CHECK(ground_index_set(nand) == std::set<size_t>{idx("001"), idx("011"), idx("101"), idx("110")});
  }
  SECTION("energies are conjugate under the pin flip") {
    const IsingModel orig = gate_model(GateKind::kOr);
    const IsingModel neg = negate_pin(orig, 1);
    for_each_free_state(orig, [&](size_t, const SpinState& s) {
      SpinState flipped = s;
      flipped[1] = spin_t(-flipped[1]);
      CHECK(neg.energy_int(s) == orig.energy_int(flipped));
    });
  }
  SECTION("invalid pin") { CHECK_THROWS_AS(negate_pin(gate_model(GateKind::kAnd), 3), std::out_of_range); }
}

TEST_CASE("composite AND-OR circuit reproduces the reference ground set", "[gates]") {
  // AND(m1,m2 -> m3), OR(m3,m4 -> m5), m5 clamped true
  Circuit c;
  c.n = 5;
  c.gates.push_back({GateKind::kAnd, {0, 1, 2}, 0, 1});
  c.gates.push_back({GateKind::kOr, {2, 3, 4}, 0, 1});
  c.clamps[4] = 1;
  const IsingModel m = compose(c);
  // block sums of the two 3x3 gate matrices
  CHECK(m.weight(0, 1) == -1);
  CHECK(m.weight(0, 2) == 2);
  CHECK(m.weight(1, 2) == 2);
  CHECK(m.weight(2, 3) == -1);
  CHECK(m.weight(2, 4) == 2);
  CHECK(m.weight(3, 4) == 2);
  CHECK(m.h == std::vector<weight_t>{1, 1, -3, -1, 2});
  CHECK(ground_index_set(m) ==
        std::set<size_t>{idx("0001"), idx("0101"), idx("1001"), idx("1110"), idx("1111")});
}

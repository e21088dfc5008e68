#include <catch2/catch.hpp>

#include <cmath>
#include <fstream>

#include "helpers.hpp"
#include "spim/error_model.hpp"
#include "spim/gates.hpp"
#include "spim/sampler.hpp"

using namespace spim;
using spim::test::sigma3;

TEST_CASE("an all-pass single mask reproduces the exact field", "[error-model]") {
  const IsingModel fa = gate_model(GateKind::kFullAdder);
  const ErrorMask mask = all_pass_mask(fa, MaskKind::single);
  CHECK(mask.total_entries() == 20);  // 5*4 directed connections
  uint64_t s = 3;
  for (int trial = 0; trial < 20; ++trial) {
    SpinState st(Rep::bipolar, 5, 1);
    for (int i = 0; i < 5; ++i) {
      s = splitmix64(s);
      st[i] = (s & 1) ? 1 : -1;
    }
    for (int i = 0; i < 5; ++i) CHECK(field_single_mask(fa, st, mask, i) == fa.local_field(st, i));
  }
}

TEST_CASE("one failing entry shifts the field by exactly twice the coupling", "[error-model]") {
  const IsingModel fa = gate_model(GateKind::kFullAdder);
  ErrorMask mask = all_pass_mask(fa, MaskKind::single);
  const int i = 2, slot = 1;
  const auto [j, w] = fa.adj[size_t(i)][size_t(slot)];
  mask.fail[size_t(i)][size_t(slot)] = 1;
  CHECK(mask.failing_entries() == 1);
  CHECK(mask.error_fraction() == Approx(1.0 / 20.0));
  SpinState st(Rep::bipolar, 5, 1);
  st[0] = -1;
  st[4] = -1;
  CHECK(field_single_mask(fa, st, mask, i) == fa.local_field(st, i) - 2.0 * double(w) * double(st[j]));
}

TEST_CASE("mask kind mismatches are rejected", "[error-model]") {
  const IsingModel fa = gate_model(GateKind::kFullAdder);
  const ErrorMask single = all_pass_mask(fa, MaskKind::single);
  const ErrorMask dbl = all_pass_mask(fa, MaskKind::double_);
  SpinState st(Rep::bipolar, 5, 1);
  CHECK_THROWS_AS(field_double_mask(fa, st, st, single, 0), std::invalid_argument);
  CHECK_THROWS_AS(field_single_mask(fa, st, dbl, 0), std::invalid_argument);
}

TEST_CASE("a fully failing single mask turns COPY into NOT", "[error-model]") {
  const IsingModel copy = gate_model(GateKind::kCopy);
  ErrorMask mask = all_pass_mask(copy, MaskKind::single);
  for (auto& row : mask.fail) std::fill(row.begin(), row.end(), 1);
  const Distribution not_ref = boltzmann_exact(gate_model(GateKind::kNot), 1.5);

  NodeRngs rngs(RngKind::counter, 71, 2);
  SpinState st(Rep::bipolar, 2, 1);
  SpinState snap = st;
  const int64_t sweeps = 300'000;
  std::vector<double> hist(4, 0.0);
  for (int64_t t = 0; t < sweeps; ++t) {
    sweep_masked(copy, st, snap, mask, 1.5, rngs);
    hist[state_index(st, {0, 1})] += 1.0;
  }
  for (double& h : hist) h /= double(sweeps);
  CHECK(kl_divergence(hist, not_ref.p, 1.0 / (10.0 * double(sweeps))) < 0.01);
}

TEST_CASE("a zero-error double mask reproduces the exact chain bit for bit", "[error-model]") {
  const IsingModel fa = gate_model(GateKind::kFullAdder);
  const ErrorMask mask = all_pass_mask(fa, MaskKind::double_);
  NodeRngs r1(RngKind::counter, 99, 5), r2(RngKind::counter, 99, 5);
  SpinState a(Rep::bipolar, 5, 1), b(Rep::bipolar, 5, 1);
  SpinState snap = a;
  for (int t = 0; t < 500; ++t) {
    sweep_masked(fa, a, snap, mask, 1.0, r1);
    sweep_sequential(fa, b, 1.0, r2);
    REQUIRE(a.v == b.v);
  }
}

TEST_CASE("a fully failing double mask is the fully parallel update", "[error-model]") {
  const IsingModel fa = gate_model(GateKind::kFullAdder);
  ErrorMask mask = all_pass_mask(fa, MaskKind::double_);
  for (auto& row : mask.fail) std::fill(row.begin(), row.end(), 1);

  SECTION("trajectory identity") {
    NodeRngs r1(RngKind::counter, 7, 5), r2(RngKind::counter, 7, 5);
    SpinState a(Rep::bipolar, 5, -1), b(Rep::bipolar, 5, -1);
    SpinState snap = a;
    for (int t = 0; t < 500; ++t) {
      sweep_masked(fa, a, snap, mask, 1.0, r1);
      sweep_parallel(fa, b, 1.0, r2);
      REQUIRE(a.v == b.v);
    }
  }
  SECTION("stationary distribution matches the cosh-product form") {
    const Distribution ref = parallel_analytical(fa, 1.0);
    NodeRngs rngs(RngKind::counter, 13, 5);
    SpinState st(Rep::bipolar, 5, 1);
    SpinState snap = st;
    const int64_t sweeps = 1'000'000;
    std::vector<double> hist(32, 0.0);
    for (int64_t t = 0; t < sweeps; ++t) {
      sweep_masked(fa, st, snap, mask, 1.0, rngs);
      hist[state_index(st, ref.nodes)] += 1.0;
    }
    for (double& h : hist) h /= double(sweeps);
    CHECK(kl_divergence(hist, ref.p, 1.0 / (10.0 * double(sweeps))) < 0.02);
  }
}

TEST_CASE("a mixed double mask blends live and stale neighbor values", "[error-model]") {
  const IsingModel fa = gate_model(GateKind::kFullAdder);
  ErrorMask mask = all_pass_mask(fa, MaskKind::double_);
  // fail the connections into node 0 from its first two neighbors
  mask.fail[0][0] = 1;
  mask.fail[0][1] = 1;
  SpinState fresh(Rep::bipolar, 5, 1);
  SpinState stale(Rep::bipolar, 5, -1);
  // expected: stale values for slots 0,1 and fresh for the rest
  int64_t expect = 0;
  const auto& row = fa.adj[0];
  for (size_t a = 0; a < row.size(); ++a)
    expect += int64_t{row[a].second} * (a < 2 ? stale[row[a].first] : fresh[row[a].first]);
  CHECK(field_double_mask_int(fa, fresh, stale, mask, 0) == expect);
}

TEST_CASE("random masks hit the requested error fraction exactly", "[error-model]") {
  const IsingModel fa = gate_model(GateKind::kFullAdder);
  for (int failing : {0, 5, 10, 20}) {
    const ErrorMask m = random_mask(fa, MaskKind::single, failing, 31 + uint64_t(failing));
    CHECK(m.failing_entries() == failing);
  }
  CHECK_THROWS_AS(random_mask(fa, MaskKind::single, 21, 1), std::invalid_argument);
  // different seeds give different masks
  const ErrorMask a = random_mask(fa, MaskKind::single, 10, 1);
  const ErrorMask b = random_mask(fa, MaskKind::single, 10, 2);
  CHECK(a.fail != b.fail);
}

TEST_CASE("KL divergence basics", "[error-model]") {
  SECTION("identical distributions diverge by zero") {
    const std::vector<double> p = {0.25, 0.25, 0.5};
    CHECK(kl_divergence(p, p) == 0.0);
  }
  SECTION("closed form for a two-state pair") {
    const std::vector<double> p = {0.5, 0.5};
    const std::vector<double> q = {0.75, 0.25};
    const double expect = std::log(2.0) - 0.5 * std::log(3.0);  // ~0.143841
    CHECK(kl_divergence(p, q) == Approx(expect).epsilon(1e-12));
  }
  SECTION("nonnegative on random pairs") {
    uint64_t s = 77;
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> p(8), q(8);
      double zp = 0, zq = 0;
      for (int i = 0; i < 8; ++i) {
        s = splitmix64(s);
        p[size_t(i)] = 1 + double(s % 1000);
        zp += p[size_t(i)];
        s = splitmix64(s);
        q[size_t(i)] = 1 + double(s % 1000);
        zq += q[size_t(i)];
      }
      for (int i = 0; i < 8; ++i) {
        p[size_t(i)] /= zp;
        q[size_t(i)] /= zq;
      }
      CHECK(kl_divergence(p, q) >= 0.0);
    }
  }
  SECTION("vanishing q without smoothing is an error; smoothing repairs it") {
    const std::vector<double> p = {0.5, 0.5};
    const std::vector<double> q = {1.0, 0.0};
    CHECK_THROWS_AS(kl_divergence(p, q), std::invalid_argument);
    CHECK(kl_divergence(p, q, 1e-6) > 0.0);
    CHECK_THROWS_AS(kl_divergence(p, {0.5, 0.25, 0.25}), std::invalid_argument);
  }
}

TEST_CASE("parallel-update closed form reduces correctly", "[error-model]") {
  SECTION("an edgeless model gives the independent-sigmoid product") {
    IsingModel m(2, Rep::bipolar);
    m.h = {2, -1};
    const Distribution boltz = boltzmann_exact(m, 1.2);
    const Distribution par = parallel_analytical(m, 1.2);
    for (size_t s = 0; s < 4; ++s) CHECK(par.p[s] == Approx(boltz.p[s]).margin(1e-12));
  }
  SECTION("a single biased node matches the Boltzmann law") {
    IsingModel m(1, Rep::bipolar);
    m.h = {3};
    const Distribution boltz = boltzmann_exact(m, 0.7);
    const Distribution par = parallel_analytical(m, 0.7);
    CHECK(par.p[0] == Approx(boltz.p[0]).margin(1e-12));
    CHECK(par.p[1] == Approx(boltz.p[1]).margin(1e-12));
  }
  SECTION("the NOT pair oscillates but its state frequencies obey the form") {
    const IsingModel notg = gate_model(GateKind::kNot);
    const Distribution ref = parallel_analytical(notg, 3.0);
    SamplerConfig cfg;
    cfg.mode = SweepMode::parallel;
    cfg.seed = 3;
    Chain chain(notg, nullptr, cfg);
    chain.init_random();
    chain.set_beta(3.0);
    const int64_t sweeps = 200'000;
    std::vector<double> hist(4, 0.0);
    for (int64_t t = 0; t < sweeps; ++t) {
      chain.sweep();
      hist[state_index(chain.state(), ref.nodes)] += 1.0;
    }
    for (double& h : hist) h /= double(sweeps);
    CHECK(kl_divergence(hist, ref.p, 1.0 / (10.0 * double(sweeps))) < 0.02);
  }
}

TEST_CASE("the exact-sampler noise floor sits well under the tolerances", "[error-model]") {
  const IsingModel fa = gate_model(GateKind::kFullAdder);
  const Distribution exact = boltzmann_exact(fa, 1.0);
  SamplerConfig cfg;
  cfg.mode = SweepMode::sequential;
  cfg.seed = 1001;
  Chain chain(fa, nullptr, cfg);
  chain.init_random();
  chain.set_beta(1.0);
  const int64_t sweeps = 1'000'000;
  std::vector<double> hist(32, 0.0);
  for (int64_t t = 0; t < sweeps; ++t) {
    chain.sweep();
    hist[state_index(chain.state(), exact.nodes)] += 1.0;
  }
  for (double& h : hist) h /= double(sweeps);
  CHECK(kl_divergence(hist, exact.p, 1.0 / (10.0 * double(sweeps))) < 0.005);
}

TEST_CASE("a scaled-down mask experiment shows the plateau-then-rise shape", "[error-model]") {
  const IsingModel fa = gate_model(GateKind::kFullAdder);
  MaskExperimentConfig cfg;
  cfg.kind = MaskKind::double_;
  cfg.masks_per_er = 40;
  cfg.samples_per_mask = 4000;
  cfg.seed = 5;
  cfg.threads = 2;
  const auto curve = mask_experiment(fa, cfg, {0, 2, 4, 6, 14, 16, 18, 20});
  REQUIRE(curve.size() == 8);
  double low = 0, high = 0;
  for (int i = 0; i < 4; ++i) {
    low += curve[size_t(i)].mean_kl;
    high += curve[size_t(i + 4)].mean_kl;
  }
  CHECK(low / 4.0 < 0.5 * (high / 4.0));
  CHECK(curve.front().mean_kl < 0.01);  // exact chain at zero error
  for (const auto& pt : curve) {
    CHECK(pt.mean_kl >= 0.0);
    CHECK(pt.n_masks == 40);
  }
  // CSV artifact
  const std::string path = "kl_test_tmp.csv";
  write_kl_csv(curve, cfg.kind, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "Er,kind,mean_KL,std_KL,n_masks");
  std::remove(path.c_str());
}

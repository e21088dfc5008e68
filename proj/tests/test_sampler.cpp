#include <catch2/catch.hpp>

#include <cmath>
#include <fstream>

#include "helpers.hpp"
#include "spim/bench.hpp"
#include "spim/circuit.hpp"
#include "spim/coloring.hpp"
#include "spim/error_model.hpp"
#include "spim/sampler.hpp"
#include "spim/sparsify.hpp"

using namespace spim;
using spim::test::sigma3;

namespace {

std::vector<double> chain_histogram(const IsingModel& model, const Coloring* coloring, SamplerConfig cfg,
                                    double beta, int64_t sweeps, const std::vector<int>& nodes) {
  Chain chain(model, coloring, cfg);
  chain.init_random();
  chain.set_beta(beta);
  std::vector<double> hist(size_t{1} << nodes.size(), 0.0);
  for (int64_t s = 0; s < sweeps; ++s) {
    chain.sweep();
    hist[state_index(chain.state(), nodes)] += 1.0;
  }
  for (double& h : hist) h /= double(sweeps);
  return hist;
}

}  // namespace

TEST_CASE("chromatic and sequential chains converge to the Boltzmann distribution", "[sampler]") {
  const IsingModel fa = gate_model(GateKind::kFullAdder);
  const Coloring col = dsatur(fa);
  const Distribution exact = boltzmann_exact(fa, 1.0);
  const int64_t sweeps = 1'000'000;

  SamplerConfig cfg;
  cfg.seed = 404;
  cfg.mode = SweepMode::chromatic;
  const auto hist_c = chain_histogram(fa, &col, cfg, 1.0, sweeps, exact.nodes);
  const double kl_c = kl_divergence(hist_c, exact.p, 1.0 / (10.0 * double(sweeps)));
  CHECK(kl_c < 0.01);

  cfg.mode = SweepMode::sequential;
  cfg.seed = 405;
  const auto hist_s = chain_histogram(fa, nullptr, cfg, 1.0, sweeps, exact.nodes);
  const double kl_s = kl_divergence(hist_s, exact.p, 1.0 / (10.0 * double(sweeps)));
  CHECK(kl_s < 0.01);

  // KL decreases with sample count
  cfg.seed = 404;
  cfg.mode = SweepMode::chromatic;
  const auto hist_short = chain_histogram(fa, &col, cfg, 1.0, 4'000, exact.nodes);
  CHECK(kl_divergence(hist_short, exact.p, 1.0 / 40'000.0) > kl_c);
}

TEST_CASE("the parallel chain converges to the cosh-product distribution", "[sampler]") {
  const IsingModel fa = gate_model(GateKind::kFullAdder);
  const Distribution ref = parallel_analytical(fa, 1.0);
  SamplerConfig cfg;
  cfg.mode = SweepMode::parallel;
  cfg.seed = 77;
  const int64_t sweeps = 1'000'000;
  const auto hist = chain_histogram(fa, nullptr, cfg, 1.0, sweeps, ref.nodes);
  CHECK(kl_divergence(hist, ref.p, 1.0 / (10.0 * double(sweeps))) < 0.02);
}

TEST_CASE("parallel updates on an edgeless model match the sequential chain in law", "[sampler]") {
  IsingModel m(3, Rep::bipolar);
  m.h = {1, -1, 0};
  const Distribution boltz = boltzmann_exact(m, 0.8);
  const Distribution par = parallel_analytical(m, 0.8);
  for (size_t s = 0; s < boltz.p.size(); ++s) CHECK(par.p[s] == Approx(boltz.p[s]).margin(1e-12));
}

TEST_CASE("at beta zero every p-bit is an unbiased coin", "[sampler]") {
  const IsingModel fa = gate_model(GateKind::kFullAdder);
  const Coloring col = dsatur(fa);
  SamplerConfig cfg;
  cfg.seed = 9;
  Chain chain(fa, &col, cfg);
  chain.init_random();
  chain.set_beta(0.0);
  const int64_t sweeps = 100'000;
  std::vector<int64_t> ups(5, 0);
  for (int64_t s = 0; s < sweeps; ++s) {
    chain.sweep();
    for (int i = 0; i < 5; ++i) ups[size_t(i)] += chain.state()[i] > 0;
  }
  for (int i = 0; i < 5; ++i)
    CHECK(std::abs(double(ups[size_t(i)]) / double(sweeps) - 0.5) < sigma3(0.5, double(sweeps)));
}

TEST_CASE("copy-pair correlation matches the two-state closed form at beta 3", "[sampler]") {
  const IsingModel copy = gate_model(GateKind::kCopy);
  const double expect = std::tanh(3.0);
  const int chains = 20'000;
  double sum = 0;
  for (int ch = 0; ch < chains; ++ch) {
    NodeRngs rngs(RngKind::counter, mix_seed(23, uint64_t(ch)), 2);
    SpinState s(Rep::bipolar, 2, 1);
    if (rngs.next_u01(0) < 0.5) s[0] = -1;
    if (rngs.next_u01(1) < 0.5) s[1] = -1;
    for (int t = 0; t < 60; ++t) sweep_sequential(copy, s, 3.0, rngs);
    sum += double(s[0]) * double(s[1]);
  }
  const double sd = std::sqrt((1.0 - expect * expect) / chains);
  CHECK(std::abs(sum / chains - expect) < 3.0 * sd);
}

TEST_CASE("single node with bias matches the closed form", "[sampler]") {
  IsingModel m(1, Rep::bipolar);
  m.h = {1};
  SamplerConfig cfg;
  cfg.mode = SweepMode::sequential;
  cfg.seed = 31;
  const int64_t sweeps = 1'000'000;
  const auto hist = chain_histogram(m, nullptr, cfg, 1.0, sweeps, {0});
  const double p_up = (1.0 + std::tanh(1.0)) / 2.0;
  CHECK(std::abs(hist[1] - p_up) < sigma3(p_up, double(sweeps)));
}

TEST_CASE("the table-driven chain is bit-identical to the reference sweeps", "[sampler]") {
  const IsingModel fa = gate_model(GateKind::kFullAdder);
  const Coloring col = dsatur(fa);
  for (SweepMode mode : {SweepMode::chromatic, SweepMode::sequential, SweepMode::parallel}) {
    SamplerConfig cfg;
    cfg.mode = mode;
    cfg.seed = 55;
    Chain chain(fa, &col, cfg);
    chain.init_random();
    chain.set_beta(0.7);

    NodeRngs rngs(cfg.rng, cfg.seed, fa.n);
    SpinState ref(Rep::bipolar, 5, -1);
    for (int i = 0; i < 5; ++i) ref[i] = rngs.next_u01(i) < 0.5 ? 1 : -1;  // same init draw
    REQUIRE(ref.v == chain.state().v);
    for (int t = 0; t < 300; ++t) {
      chain.sweep();
      switch (mode) {
        case SweepMode::chromatic: sweep_chromatic(fa, col, ref, 0.7, rngs); break;
        case SweepMode::sequential: sweep_sequential(fa, ref, 0.7, rngs); break;
        case SweepMode::parallel: sweep_parallel(fa, ref, 0.7, rngs); break;
      }
      REQUIRE(ref.v == chain.state().v);
    }
    // incremental energy stays exact
    CHECK(chain.energy_int() == fa.energy_int(chain.state()));
  }
}

TEST_CASE("permuting nodes inside a color block leaves the trajectory unchanged", "[sampler]") {
  auto sp = sparsify_circuit(build_factorizer(2), 5);
  const IsingModel m = compose(sp.circuit);
  Coloring col = dsatur(m);
  SamplerConfig cfg;
  cfg.seed = 12;
  Chain a(m, &col, cfg);
  a.init_random();
  a.set_beta(1.0);
  Coloring permuted = col;
  for (auto& block : permuted.blocks) std::reverse(block.begin(), block.end());
  Chain b(m, &permuted, cfg);
  b.init_random();
  b.set_beta(1.0);
  for (int t = 0; t < 200; ++t) {
    a.sweep();
    b.sweep();
    REQUIRE(a.state().v == b.state().v);
  }
}

TEST_CASE("identical configurations reproduce identical trajectories", "[sampler]") {
  const IsingModel fa = gate_model(GateKind::kFullAdder);
  const Coloring col = dsatur(fa);
  for (RngKind rng : {RngKind::counter, RngKind::lfsr32}) {
    SamplerConfig cfg;
    cfg.rng = rng;
    cfg.seed = 1234;
    Chain a(fa, &col, cfg), b(fa, &col, cfg);
    a.init_random();
    b.init_random();
    a.set_beta(1.0);
    b.set_beta(1.0);
    bool all_equal = true;
    for (int t = 0; t < 500; ++t) {
      a.sweep();
      b.sweep();
      all_equal = all_equal && a.state().v == b.state().v;
    }
    CHECK(all_equal);

    SamplerConfig other = cfg;
    other.seed = 4321;
    Chain c(fa, &col, other);
    c.init_random();
    c.set_beta(1.0);
    bool any_diff = false;
    for (int t = 0; t < 500; ++t) {
      c.sweep();
      a.sweep();
      any_diff = any_diff || c.state().v != a.state().v;
    }
    CHECK(any_diff);
  }
}

TEST_CASE("the LFSR-backed chain also reaches the Boltzmann distribution", "[sampler]") {
  const IsingModel andg = gate_model(GateKind::kAnd);
  const Distribution exact = boltzmann_exact(andg, 1.0);
  SamplerConfig cfg;
  cfg.rng = RngKind::lfsr32;
  cfg.mode = SweepMode::sequential;
  cfg.seed = 2024;
  const int64_t sweeps = 400'000;
  const auto hist = chain_histogram(andg, nullptr, cfg, 1.0, sweeps, exact.nodes);
  CHECK(kl_divergence(hist, exact.p, 1.0 / (10.0 * double(sweeps))) < 0.01);
}

TEST_CASE("flip accounting: one flip per unclamped node per sweep", "[sampler]") {
  Circuit c = build_factorizer(2);
  clamp_product(c, 9);
  const IsingModel m = compose(c);
  const Coloring col = dsatur(m);
  SamplerConfig cfg;
  cfg.sweeps_per_beta = 50;
  cfg.schedule = {0.5, 2.0, 10};
  auto [state, stats] = anneal(m, &col, cfg);
  CHECK(stats.n_unclamped == m.n_free());
  CHECK(stats.total_sweeps == 500);
  CHECK(stats.total_flips == stats.total_sweeps * int64_t(stats.n_unclamped));
}

TEST_CASE("paced runs at one sweep rate have fps proportional to size", "[sampler]") {
  // two ferromagnetic chains, one twice the size of the other
  auto make_chain_model = [](int n) {
    IsingModel m(n, Rep::bipolar);
    for (int i = 0; i + 1 < n; ++i) m.add_edge(i, i + 1, 1);
    m.finalize();
    return m;
  };
  const IsingModel small = make_chain_model(40);
  const IsingModel large = make_chain_model(80);
  SamplerConfig cfg;
  cfg.mode = SweepMode::sequential;
  cfg.schedule = {1.0, 1.0, 1};
  cfg.sweeps_per_beta = 3000;
  cfg.paced_sweeps_per_sec = 2000;
  auto [s1, r1] = anneal(small, nullptr, cfg);
  auto [s2, r2] = anneal(large, nullptr, cfg);
  const double ratio = measure_fps(r2) / measure_fps(r1);
  CHECK(ratio == Approx(2.0).epsilon(0.3));
  CHECK_THROWS_AS(measure_fps(RunStats{}), std::invalid_argument);
}

TEST_CASE("annealing decodes planted factors of a small product", "[sampler]") {
  // 8-bit factorizer clamped to 35; factors must come out as {5, 7}
  int solved = 0;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    Instance inst = make_semiprime(8, 5, 7);
    PipelineOptions opt;
    opt.sampler.seed = seed;
    opt.sampler.schedule = {0.2, 5.0, 100};
    opt.sampler.sweeps_per_beta = 1000;
    const PipelineResult res = pipeline(inst, opt);
    solved += res.solved;
  }
  CHECK(solved >= 8);
}

TEST_CASE("a degenerate schedule is plain fixed-temperature sampling", "[sampler]") {
  const IsingModel fa = gate_model(GateKind::kFullAdder);
  const Coloring col = dsatur(fa);
  SamplerConfig cfg;
  cfg.schedule = {2.0, 2.0, 1};
  cfg.sweeps_per_beta = 100;
  auto [state, stats] = anneal(fa, &col, cfg);
  CHECK(stats.total_sweeps == 100);
  for (const RunRecord& r : stats.trace) CHECK(r.beta == 2.0);
}

TEST_CASE("time-to-solution bookkeeping", "[sampler]") {
  SECTION("a planted initial state solves at zero sweeps") {
    Circuit c = build_factorizer(3);
    clamp_product(c, 35);
    set_planted_factors(c, 5, 7);
    const IsingModel m = compose(c);
    const Coloring col = dsatur(m);
    SpinState planted(Rep::bipolar, c.n, -1);
    for (int i = 0; i < c.n; ++i) planted[i] = (*c.planted)[i];
    SamplerConfig cfg;
    TtsSpec spec;
    spec.target = TtsTarget::tts100;
    spec.ground_energy_int = circuit_ground_energy(c);
    auto [tts, stats] = measure_tts(m, &col, cfg, spec, TtsBudget{1000, 10'000, 2.0}, &planted);
    CHECK(tts.reached);
    CHECK(tts.sweeps == 0);
  }
  SECTION("bundled 20-variable instance reaches 95% satisfaction within 1e4 sweeps") {
    const CnfFormula cnf = read_cnf(spim::test::data_path("r3sat_v20_c91_s1.cnf"));
    Circuit fused = build_sat(cnf);
    auto sp = sparsify_circuit(fused, 4);
    clamp_output_true(sp.circuit);
    const IsingModel m = compose(sp.circuit);
    const Coloring col = dsatur(m);
    SatView sat{&sp.circuit.cnf, &sp.circuit.var_nodes};
    int reached = 0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
      SamplerConfig cfg;
      cfg.seed = seed;
      TtsSpec spec;
      spec.target = TtsTarget::tts95;
      spec.sat = &sat;
      auto [tts, stats] = measure_tts(m, &col, cfg, spec, TtsBudget{2'500, 10'000, 2.0});
      reached += tts.reached;
    }
    CHECK(reached >= 9);
  }
  SECTION("energy targets demand a known negative ground energy") {
    const IsingModel fa = gate_model(GateKind::kFullAdder);
    SamplerConfig cfg;
    TtsSpec spec;
    spec.target = TtsTarget::tts99;
    CHECK_THROWS_AS(measure_tts(fa, nullptr, cfg, spec, TtsBudget{}), std::invalid_argument);
    spec.target = TtsTarget::tts95;
    CHECK_THROWS_AS(measure_tts(fa, nullptr, cfg, spec, TtsBudget{}), std::invalid_argument);
  }
}

TEST_CASE("exponential fit recovers the reference constants within 1%", "[sampler]") {
  const double t0 = std::pow(10.0, -3.39);
  const double tau = 122.13;
  std::vector<std::pair<double, double>> pts;
  for (double n : {399.0, 704.0, 1085.0, 1542.0, 2075.0, 2684.0, 3369.0, 4130.0, 4967.0, 5375.0})
    pts.emplace_back(n, t0 * std::exp(n / tau));
  const ExponentialFit fit = fit_exponential(pts);
  CHECK(std::abs(fit.t0 - t0) / t0 < 0.01);
  CHECK(std::abs(fit.tau - tau) / tau < 0.01);
  CHECK_THROWS_AS(fit_exponential({{1.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_exponential({{1.0, -1.0}, {2.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("activation LUT quantization stays within its bit budget", "[sampler]") {
  for (int bits : {4, 8, 12}) {
    const double bound = std::pow(2.0, -(bits - 1));
    for (double x = -3.0; x <= 3.0; x += 0.001) {
      const double t = std::tanh(x);
      CHECK(std::abs(detail::lut_quantize(t, bits) - t) <= bound);
    }
  }
}

TEST_CASE("LUT and quantized-beta chains still sample sensibly", "[sampler]") {
  const IsingModel copy = gate_model(GateKind::kCopy);
  SECTION("coarse LUT perturbs but does not break the chain") {
    SamplerConfig cfg;
    cfg.mode = SweepMode::sequential;
    cfg.activation = Activation::lut;
    cfg.lut_bits = 8;
    cfg.seed = 5;
    const Distribution exact = boltzmann_exact(copy, 2.0);
    const auto hist = chain_histogram(copy, nullptr, cfg, 2.0, 200'000, exact.nodes);
    CHECK(kl_divergence(hist, exact.p, 1e-6) < 0.01);
  }
  SECTION("quantized beta keeps the ferromagnetic correlation") {
    SamplerConfig cfg;
    cfg.mode = SweepMode::sequential;
    cfg.quantized_beta = true;
    cfg.seed = 6;
    Chain chain(copy, nullptr, cfg);
    chain.init_random();
    chain.set_beta(2.0);  // beta*J rounds to 2
    double corr = 0;
    const int64_t sweeps = 100'000;
    for (int64_t s = 0; s < sweeps; ++s) {
      chain.sweep();
      corr += double(chain.state()[0]) * double(chain.state()[1]);
    }
    CHECK(corr / double(sweeps) > 0.5);
  }
}

TEST_CASE("binary-representation sampling matches the relabeled distribution", "[sampler]") {
  const IsingModel bin = to_binary(gate_model(GateKind::kAnd));
  const Distribution exact = boltzmann_exact(bin, 1.0);
  SamplerConfig cfg;
  cfg.mode = SweepMode::sequential;
  cfg.seed = 8;
  const int64_t sweeps = 400'000;
  const auto hist = chain_histogram(bin, nullptr, cfg, 1.0, sweeps, exact.nodes);
  CHECK(kl_divergence(hist, exact.p, 1.0 / (10.0 * double(sweeps))) < 0.01);
}

TEST_CASE("improper colorings are refused", "[sampler]") {
  const IsingModel copy = gate_model(GateKind::kCopy);
  Coloring bad;
  bad.colors = {0, 0};
  bad.num_colors = 1;
  bad.blocks = {{0, 1}};
  SpinState s(Rep::bipolar, 2, 1);
  NodeRngs rngs(RngKind::counter, 1, 2);
  CHECK_THROWS_AS(sweep_chromatic(copy, bad, s, 1.0, rngs), std::invalid_argument);
  SamplerConfig cfg;
  CHECK_THROWS_AS(Chain(copy, &bad, cfg), std::invalid_argument);
}

TEST_CASE("run CSV and summary JSON artifacts", "[sampler]") {
  const IsingModel fa = gate_model(GateKind::kFullAdder);
  const Coloring col = dsatur(fa);
  SamplerConfig cfg;
  cfg.schedule = {0.5, 1.5, 4};
  cfg.sweeps_per_beta = 25;
  auto [state, stats] = anneal(fa, &col, cfg);
  REQUIRE(stats.trace.size() == 4);
  const std::string path = "run_test_tmp.csv";
  write_run_csv(stats, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "sweep,beta,energy,satisfied_clauses,cumulative_flips,wall_ns");
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == 4);
  std::remove(path.c_str());

  const nlohmann::json j = summary_to_json(stats);
  CHECK(j.at("flips_per_sweep").get<int>() == 5);
  CHECK(j.at("sweeps").get<int64_t>() == 100);
  CHECK(j.contains("best_state_hex"));
}

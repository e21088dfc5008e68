#pragma once

// Problem generation and end-to-end pipelines: random semiprime instances
// with planted factors, planted-satisfiable uniform random 3SAT, the
// build -> sparsify -> color -> anneal pipeline, and repeat campaigns.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "spim/circuit.hpp"
#include "spim/coloring.hpp"
#include "spim/model.hpp"
#include "spim/random.hpp"
#include "spim/sampler.hpp"
#include "spim/sparsify.hpp"

namespace spim {

// ---------------------------------------------------------------------------
// Primality (Miller-Rabin)

namespace detail {

inline uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t m) {
  return static_cast<uint64_t>((static_cast<__uint128_t>(a) * b) % m);
}

inline uint64_t powmod_u64(uint64_t a, uint64_t e, uint64_t m) {
  uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod_u64(r, a, m);
    a = mulmod_u64(a, a, m);
    e >>= 1;
  }
  return r;
}

}  // namespace detail

/// Miller-Rabin with the given number of random rounds (plus small-prime trial
/// division). Deterministic for a fixed seed.
inline bool miller_rabin(uint64_t n, int rounds = 64, uint64_t seed = 0x5EEDull) {
  if (n < 2) return false;
  for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull}) {
    if (n == p) return true;
    if (n % p == 0) return false;
  }
  uint64_t d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  uint64_t s = seed;
  for (int round = 0; round < rounds; ++round) {
    s = splitmix64(s);
    const uint64_t a = 2 + s % (n - 3);
    uint64_t x = detail::powmod_u64(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int q = 1; q < r; ++q) {
      x = detail::mulmod_u64(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Instances

struct Instance {
  enum class Kind : uint8_t { factorization, sat };
  Kind kind = Kind::factorization;
  std::string id;
  // factorization
  int bits = 0;
  uint64_t product = 0, a = 0, b = 0;
  // sat
  CnfFormula cnf;
  std::optional<std::vector<uint8_t>> planted_assignment;
};

/// Random n-bit semiprime: both factors are n/2-bit primes (top bit set) and
/// the product has exactly n bits. Deterministic per seed.
inline Instance gen_semiprime(int bits, uint64_t seed) {
  if (bits < 4 || bits % 2 != 0) throw std::invalid_argument("semiprime bits must be even and >= 4");
  if (bits > 50) throw std::invalid_argument("semiprime bits capped at 50");
  const int m = bits / 2;
  const uint64_t lo = uint64_t{1} << (m - 1);
  const uint64_t span = uint64_t{1} << (m - 1);
  uint64_t s = mix_seed(seed, 0xFAC70ull);
  auto draw_prime = [&]() {
    for (;;) {
      s = splitmix64(s);
      uint64_t cand = lo + (s % span);
      if (m > 2) cand |= 1;  // odd (2-bit factors may be the prime 2)
      if (miller_rabin(cand, 64, splitmix64(s))) return cand;
    }
  };
  for (;;) {
    const uint64_t a = draw_prime();
    const uint64_t b = draw_prime();
    const uint64_t p = a * b;
    if (p >> (bits - 1)) {  // full n-bit product
      Instance inst;
      inst.kind = Instance::Kind::factorization;
      inst.bits = bits;
      inst.product = p;
      inst.a = a;
      inst.b = b;
      inst.id = "semiprime" + std::to_string(bits) + "_s" + std::to_string(seed);
      return inst;
    }
  }
}

/// Fixed-factor instance. Unlike gen_semiprime, the product may use fewer
/// than n bits; only the factors must fit their registers.
inline Instance make_semiprime(int bits, uint64_t a, uint64_t b) {
  if (bits < 4 || bits % 2 != 0) throw std::invalid_argument("semiprime bits must be even and >= 4");
  const int m = bits / 2;
  if (!miller_rabin(a) || !miller_rabin(b)) throw std::invalid_argument("factors must be prime");
  if (a >> m || b >> m) throw std::invalid_argument("factors must fit in n/2 bits");
  Instance inst;
  inst.kind = Instance::Kind::factorization;
  inst.bits = bits;
  inst.product = a * b;
  inst.a = a;
  inst.b = b;
  inst.id = "semiprime" + std::to_string(bits) + "_fixed";
  return inst;
}

/// Uniform random 3SAT with a planted satisfying assignment: clauses are
/// drawn over three distinct variables with random signs and redrawn until
/// the planted assignment satisfies them.
inline Instance gen_random_3sat(int v, int c, uint64_t seed) {
  if (v < 3 || c < 1) throw std::invalid_argument("3SAT generation needs v >= 3, c >= 1");
  Instance inst;
  inst.kind = Instance::Kind::sat;
  inst.id = "r3sat_v" + std::to_string(v) + "_c" + std::to_string(c) + "_s" + std::to_string(seed);
  inst.cnf.v = v;
  uint64_t s = mix_seed(seed, 0x35A7ull);
  std::vector<uint8_t> planted(static_cast<size_t>(v));
  for (int x = 0; x < v; ++x) {
    s = splitmix64(s);
    planted[static_cast<size_t>(x)] = s & 1;
  }
  auto draw_clause = [&]() {
    std::array<int, 3> cl{};
    for (;;) {
      int vars[3];
      for (int t = 0; t < 3; ++t) {
        for (;;) {
          s = splitmix64(s);
          vars[t] = 1 + static_cast<int>(s % static_cast<uint64_t>(v));
          bool dup = false;
          for (int q = 0; q < t; ++q)
            if (vars[q] == vars[t]) dup = true;
          if (!dup) break;
        }
      }
      bool sat = false;
      for (int t = 0; t < 3; ++t) {
        s = splitmix64(s);
        const bool negate = s & 1;
        cl[static_cast<size_t>(t)] = negate ? -vars[t] : vars[t];
        const bool val = planted[static_cast<size_t>(vars[t] - 1)] != 0;
        if ((cl[static_cast<size_t>(t)] > 0) == val) sat = true;
      }
      if (sat) return cl;
    }
  };
  for (int ci = 0; ci < c; ++ci) inst.cnf.clauses.push_back(draw_clause());
  inst.planted_assignment = std::move(planted);
  return inst;
}

// ---------------------------------------------------------------------------
// Pipeline: build -> sparsify -> color -> anneal

struct PipelineOptions {
  int k = 0;           // 0 = default per problem (5 factorizer, 4 sat)
  weight_t j_t = 1;
  bool sparse = true;  // false = fused graph
  bool dry_run = false;
  SamplerConfig sampler;
  std::string out_dir;  // empty = no artifacts
};

struct PipelineResult {
  Circuit circuit;
  IsingModel model;
  Coloring coloring;
  RunStats stats;
  SpinState final_state;
  double density_value = 0;
  // decoded solution quality
  bool solved = false;
  uint64_t factor_a = 0, factor_b = 0;
  int satisfied = -1;
};

inline Circuit build_instance_circuit(const Instance& inst) {
  if (inst.kind == Instance::Kind::factorization) {
    Circuit c = build_factorizer(inst.bits / 2);
    clamp_product(c, inst.product);
    if (inst.a) set_planted_factors(c, inst.a, inst.b);
    return c;
  }
  Circuit c = build_sat(inst.cnf);
  clamp_output_true(c);
  if (inst.planted_assignment) set_planted_assignment(c, *inst.planted_assignment);
  return c;
}

inline PipelineResult pipeline(const Instance& inst, const PipelineOptions& opt) {
  PipelineResult out;
  Circuit fused = build_instance_circuit(inst);
  if (opt.sparse) {
    const int k = opt.k > 0 ? opt.k : (inst.kind == Instance::Kind::factorization ? 5 : 4);
    out.circuit = sparsify_circuit(fused, k, opt.j_t).circuit;
  } else {
    out.circuit = std::move(fused);
  }
  out.model = compose(out.circuit);
  out.coloring = dsatur(out.model);
  if (!validate(out.model, out.coloring)) throw std::logic_error("pipeline produced an improper coloring");
  out.density_value = density(out.model);

  if (!opt.out_dir.empty()) {
    std::filesystem::create_directories(opt.out_dir);
    save_json(circuit_to_json(out.circuit), opt.out_dir + "/circuit.json");
    save_json(model_to_json(out.model), opt.out_dir + "/model.json");
    write_coloring_csv(out.coloring, opt.out_dir + "/coloring.csv");
  }
  if (opt.dry_run) return out;

  SatView sat;
  const SatView* satp = nullptr;
  if (inst.kind == Instance::Kind::sat) {
    sat.cnf = &out.circuit.cnf;
    sat.var_nodes = &out.circuit.var_nodes;
    satp = &sat;
  }
  auto [final_state, stats] = anneal(out.model, &out.coloring, opt.sampler, satp);
  out.final_state = std::move(final_state);
  out.stats = std::move(stats);

  if (inst.kind == Instance::Kind::factorization) {
    out.factor_a = decode_bits(out.stats.best_state, out.circuit.a_nodes);
    out.factor_b = decode_bits(out.stats.best_state, out.circuit.b_nodes);
    out.solved = out.factor_a * out.factor_b == inst.product && out.factor_a != 1 && out.factor_b != 1;
  } else {
    out.satisfied = sat.satisfied(out.stats.best_state);
    out.solved = out.satisfied == out.circuit.cnf.c();
  }

  if (!opt.out_dir.empty()) {
    write_run_csv(out.stats, opt.out_dir + "/run.csv");
    nlohmann::json j = summary_to_json(out.stats);
    j["instance"] = inst.id;
    j["solved"] = out.solved;
    if (inst.kind == Instance::Kind::factorization) {
      j["factor_a"] = out.factor_a;
      j["factor_b"] = out.factor_b;
    } else {
      j["satisfied"] = out.satisfied;
      j["clauses"] = out.circuit.cnf.c();
    }
    save_json(j, opt.out_dir + "/summary.json");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Campaigns: repeated TTS/fps runs over instances, aggregate CSV rows.

struct CampaignRow {
  std::string instance;
  int n_pbits = 0;
  int repeat = 0;
  uint64_t seed = 0;
  std::string target;
  bool reached = false;
  int64_t tts_sweeps = -1;
  int64_t tts_wall_ns = -1;
  double fps = 0;
  double best_energy = 0;
};

struct CampaignConfig {
  int repeats = 10;
  TtsTarget target = TtsTarget::tts99;
  TtsBudget budget;
  SamplerConfig sampler;
  int k = 0;
  weight_t j_t = 1;
  int threads = 1;
};

inline std::vector<CampaignRow> campaign(const std::vector<Instance>& instances, const CampaignConfig& cfg) {
  if (instances.empty() || cfg.repeats < 1) throw std::invalid_argument("campaign needs instances and repeats >= 1");
  struct Job {
    const Instance* inst;
    int repeat;
  };
  std::vector<Job> jobs;
  for (const auto& inst : instances)
    for (int r = 0; r < cfg.repeats; ++r) jobs.push_back({&inst, r});
  std::vector<CampaignRow> rows(jobs.size());

  auto run_job = [&](size_t ji) {
    const Instance& inst = *jobs[ji].inst;
    const int repeat = jobs[ji].repeat;
    PipelineOptions opt;
    opt.k = cfg.k;
    opt.j_t = cfg.j_t;
    opt.dry_run = true;
    PipelineResult built = pipeline(inst, opt);

    SamplerConfig scfg = cfg.sampler;
    scfg.seed = mix_seed(cfg.sampler.seed, (static_cast<uint64_t>(ji) << 8) | static_cast<uint64_t>(repeat));

    TtsSpec spec;
    spec.target = cfg.target;
    SatView sat;
    if (inst.kind == Instance::Kind::sat) {
      sat.cnf = &built.circuit.cnf;
      sat.var_nodes = &built.circuit.var_nodes;
      spec.sat = &sat;
    } else {
      spec.ground_energy_int = circuit_ground_energy(built.circuit);
    }
    auto [tts, stats] = measure_tts(built.model, &built.coloring, scfg, spec, cfg.budget);
    CampaignRow row;
    row.instance = inst.id;
    row.n_pbits = built.model.n;
    row.repeat = repeat;
    row.seed = scfg.seed;
    row.target = tts.target;
    row.reached = tts.reached;
    row.tts_sweeps = tts.sweeps;
    row.tts_wall_ns = tts.wall_ns;
    row.fps = stats.wall_ns > 0 ? static_cast<double>(stats.total_flips) * 1e9 / static_cast<double>(stats.wall_ns) : 0;
    row.best_energy = stats.final_energy;
    rows[ji] = std::move(row);
  };

  const int nthreads = std::max(1, cfg.threads);
  if (nthreads == 1) {
    for (size_t ji = 0; ji < jobs.size(); ++ji) run_job(ji);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&]() {
        for (;;) {
          const size_t ji = next.fetch_add(1);
          if (ji >= jobs.size()) return;
          run_job(ji);
        }
      });
    for (auto& th : pool) th.join();
  }
  return rows;
}

inline void write_campaign_csv(const std::vector<CampaignRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "instance,n_pbits,repeat,seed,target,reached,tts_sweeps,tts_wall_ns,fps,best_energy\n";
  for (const auto& r : rows)
    out << r.instance << ',' << r.n_pbits << ',' << r.repeat << ',' << r.seed << ',' << r.target << ','
        << (r.reached ? 1 : 0) << ',' << r.tts_sweeps << ',' << r.tts_wall_ns << ',' << r.fps << ',' << r.best_energy
        << '\n';
}

}  // namespace spim

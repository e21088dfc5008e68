// Command-line front end: problem generation, build/sparsify/color/sample
// pipelines, TTS and fps campaigns, and error-mask experiments.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spim/spim.hpp"

using namespace spim;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitTargetNotReached = 2;

struct SamplerFlags {
  double beta_start = 0.2, beta_end = 5.0;
  int beta_steps = 100;
  int64_t sweeps_per_beta = 100;
  uint64_t seed = 1;
  std::string mode = "chromatic";
  std::string rng = "counter";
  double sweep_rate = 0;
  bool quantized_beta = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--beta-start", beta_start, "initial inverse temperature");
    cmd->add_option("--beta-end", beta_end, "final inverse temperature");
    cmd->add_option("--beta-steps", beta_steps, "number of annealing plateaus");
    cmd->add_option("--sweeps-per-beta", sweeps_per_beta, "sweeps per plateau");
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--mode", mode, "chromatic|sequential|parallel");
    cmd->add_option("--rng", rng, "counter|lfsr32");
    cmd->add_option("--sweep-rate", sweep_rate, "pace sweeps at this rate (sweeps/s, 0 = free-running)");
    cmd->add_flag("--quantized-beta", quantized_beta, "round beta*J to the integer weight grid");
  }

  SamplerConfig config() const {
    SamplerConfig cfg;
    cfg.schedule = {beta_start, beta_end, beta_steps};
    cfg.sweeps_per_beta = sweeps_per_beta;
    cfg.seed = seed;
    cfg.mode = mode_from_name(mode);
    cfg.rng = rng_from_name(rng);
    cfg.paced_sweeps_per_sec = sweep_rate;
    cfg.quantized_beta = quantized_beta;
    return cfg;
  }
};

void ensure_dir(const std::string& dir) { fs::create_directories(dir); }

void report_graph(const Circuit& c, const IsingModel& m, const Coloring* col) {
  std::printf("nodes          %d\n", m.n);
  std::printf("edges          %lld\n", static_cast<long long>(m.edge_count()));
  std::printf("max degree     %d\n", m.max_degree());
  std::printf("density        %.4f%%\n", 100.0 * density(m));
  if (col) std::printf("colors         %d\n", col->num_colors);
  std::printf("clamped nodes  %zu\n", c.clamps.size());
}

Circuit load_circuit(const std::string& path) { return circuit_from_json(load_json(path)); }

int cmd_gen_semiprime(int bits, uint64_t seed, uint64_t a, uint64_t b, const std::string& out) {
  const Instance inst = (a && b) ? make_semiprime(bits, a, b) : gen_semiprime(bits, seed);
  nlohmann::json j = {{"kind", "factorization"},
                      {"bits", inst.bits},
                      {"product", inst.product},
                      {"a", inst.a},
                      {"b", inst.b},
                      {"id", inst.id}};
  std::cout << j.dump(2) << '\n';
  if (!out.empty()) save_json(j, out);
  return kExitOk;
}

int cmd_gen_3sat(int vars, int clauses, uint64_t seed, const std::string& out) {
  const Instance inst = gen_random_3sat(vars, clauses, seed);
  std::ostringstream body;
  body << "c planted-satisfiable uniform random 3SAT (v=" << vars << ", c=" << clauses << ", seed=" << seed << ")\n"
       << "c generated by tools: spim gen-3sat --vars " << vars << " --clauses " << clauses << " --seed " << seed
       << "\n"
       << "c same (v,c) profile as SATLIB uf" << vars << "-" << clauses
       << "; fetch the originals with tools/fetch_satlib.sh\n";
  write_dimacs(inst.cnf, body);
  if (out.empty()) {
    std::cout << body.str();
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot open for writing: " + out);
    f << body.str();
  }
  return kExitOk;
}

int cmd_build_fact(int m, uint64_t product, uint64_t a, uint64_t b, const std::string& out_dir) {
  Circuit c = build_factorizer(m);
  if (a && b) {
    if (product == 0) product = a * b;
    clamp_product(c, product);
    set_planted_factors(c, a, b);
  } else if (product) {
    clamp_product(c, product);
  }
  const IsingModel model = compose(c);
  ensure_dir(out_dir);
  save_json(circuit_to_json(c), out_dir + "/circuit.json");
  save_json(model_to_json(model), out_dir + "/model.json");
  report_graph(c, model, nullptr);
  std::printf("wrote %s/circuit.json, %s/model.json\n", out_dir.c_str(), out_dir.c_str());
  return kExitOk;
}

int cmd_build_sat(const std::string& cnf_path, bool unclamped, const std::string& out_dir) {
  const CnfFormula cnf = read_cnf(cnf_path);
  Circuit c = build_sat(cnf);
  if (!unclamped) clamp_output_true(c);
  const IsingModel model = compose(c);
  ensure_dir(out_dir);
  save_json(circuit_to_json(c), out_dir + "/circuit.json");
  save_json(model_to_json(model), out_dir + "/model.json");
  report_graph(c, model, nullptr);
  std::printf("wrote %s/circuit.json, %s/model.json\n", out_dir.c_str(), out_dir.c_str());
  return kExitOk;
}

int cmd_sparsify(const std::string& circuit_path, int k, int jt, const std::string& out_dir) {
  const Circuit fused = load_circuit(circuit_path);
  auto res = sparsify_circuit(fused, k > 0 ? k : (fused.kind == ProblemKind::factorizer ? 5 : 4),
                              static_cast<weight_t>(jt));
  const IsingModel model = compose(res.circuit);
  ensure_dir(out_dir);
  save_json(circuit_to_json(res.circuit), out_dir + "/circuit.json");
  save_json(model_to_json(model), out_dir + "/model.json");
  report_graph(res.circuit, model, nullptr);
  std::printf("replica groups %d -> %d nodes\n", res.plan.fused_n, res.plan.sparse_n);
  std::printf("wrote %s/circuit.json, %s/model.json\n", out_dir.c_str(), out_dir.c_str());
  return kExitOk;
}

int cmd_color(const std::string& model_path, const std::string& out, const std::string& embed) {
  const IsingModel model = model_from_json(load_json(model_path));
  const Coloring col = dsatur(model);
  if (!validate(model, col)) throw std::logic_error("DSATUR produced an improper coloring");
  write_coloring_csv(col, out);
  if (!embed.empty()) save_json(model_to_json(model, col), embed);
  std::printf("colors       %d\n", col.num_colors);
  std::printf("max degree   %d (greedy bound %d)\n", model.max_degree(), model.max_degree() + 1);
  std::printf("density      %.4f%%  (cap %.4f%% at k=%d)\n", 100.0 * density(model),
              100.0 * density_max(model.max_degree(), model.n), model.max_degree());
  std::printf("wrote %s\n", out.c_str());
  return kExitOk;
}

struct LoadedProblem {
  Circuit circuit;
  IsingModel model;
  Coloring coloring;
  bool has_circuit = false;
};

LoadedProblem load_problem(const std::string& model_path, const std::string& circuit_path,
                           const std::string& coloring_path) {
  LoadedProblem p;
  if (!circuit_path.empty()) {
    p.circuit = load_circuit(circuit_path);
    p.model = compose(p.circuit);
    p.has_circuit = true;
  } else if (!model_path.empty()) {
    p.model = model_from_json(load_json(model_path));
  } else {
    throw CLI::ValidationError("--model or --circuit is required");
  }
  p.coloring = coloring_path.empty() ? dsatur(p.model) : read_coloring_csv(coloring_path, p.model);
  if (!validate(p.model, p.coloring)) throw std::runtime_error("coloring is not proper for this model");
  return p;
}

int run_and_write(const LoadedProblem& p, SamplerConfig cfg, const std::string& out_dir) {
  SatView sat;
  const SatView* satp = nullptr;
  if (p.has_circuit && p.circuit.kind == ProblemKind::sat) {
    sat.cnf = &p.circuit.cnf;
    sat.var_nodes = &p.circuit.var_nodes;
    satp = &sat;
  }
  auto [state, stats] = anneal(p.model, &p.coloring, cfg, satp);
  ensure_dir(out_dir);
  write_run_csv(stats, out_dir + "/run.csv");
  nlohmann::json j = summary_to_json(stats);
  if (p.has_circuit && p.circuit.kind == ProblemKind::factorizer) {
    j["factor_a"] = decode_bits(stats.best_state, p.circuit.a_nodes);
    j["factor_b"] = decode_bits(stats.best_state, p.circuit.b_nodes);
    j["product"] = p.circuit.product;
  }
  if (satp) {
    j["satisfied"] = sat.satisfied(stats.best_state);
    j["clauses"] = p.circuit.cnf.c();
  }
  save_json(j, out_dir + "/summary.json");
  std::printf("sweeps %lld  flips %lld  fps %.3e  best energy %.1f\n",
              static_cast<long long>(stats.total_sweeps), static_cast<long long>(stats.total_flips), stats.fps,
              stats.best_energy);
  std::printf("wrote %s/run.csv, %s/summary.json\n", out_dir.c_str(), out_dir.c_str());
  return kExitOk;
}

int cmd_tts(const std::string& circuit_path, const std::string& target, int repeats, const SamplerFlags& sf,
            int64_t min_budget, int64_t total_budget, const std::string& out_dir, int threads) {
  const Circuit circuit = load_circuit(circuit_path);
  Instance inst;
  if (circuit.kind == ProblemKind::factorizer) {
    inst.kind = Instance::Kind::factorization;
    inst.bits = 2 * circuit.m;
    inst.product = circuit.product;
    inst.a = circuit.factor_a;
    inst.b = circuit.factor_b;
    inst.id = "circuit:" + circuit_path;
    if ((target == "99" || target == "100") && circuit.planted == std::nullopt)
      throw CLI::ValidationError("energy targets need planted factors in the circuit");
  } else if (circuit.kind == ProblemKind::sat) {
    inst.kind = Instance::Kind::sat;
    inst.cnf = circuit.cnf;
    inst.id = "circuit:" + circuit_path;
  } else {
    throw CLI::ValidationError("tts needs a factorizer or sat circuit");
  }

  CampaignConfig cfg;
  cfg.repeats = repeats;
  cfg.target = target == "100" ? TtsTarget::tts100 : target == "99" ? TtsTarget::tts99 : TtsTarget::tts95;
  cfg.budget = TtsBudget{min_budget, total_budget, 2.0};
  cfg.sampler = sf.config();
  cfg.threads = threads;
  const auto rows = campaign({inst}, cfg);
  ensure_dir(out_dir);
  write_campaign_csv(rows, out_dir + "/tts.csv");

  int reached = 0;
  int64_t sum_sweeps = 0;
  for (const auto& r : rows) {
    reached += r.reached;
    if (r.reached) sum_sweeps += r.tts_sweeps;
  }
  std::printf("target tts%s: reached %d/%d%s\n", target.c_str(), reached, repeats,
              reached ? "" : " (budget exhausted)");
  if (reached)
    std::printf("mean TTS over successes: %.3e sweeps\n", static_cast<double>(sum_sweeps) / reached);
  std::printf("wrote %s/tts.csv\n", out_dir.c_str());
  return reached == repeats ? kExitOk : kExitTargetNotReached;
}

int cmd_fps(const std::vector<std::string>& model_paths, const SamplerFlags& sf, int64_t sweeps,
            const std::string& out) {
  std::ofstream csv(out);
  if (!csv) throw std::runtime_error("cannot open for writing: " + out);
  csv << "model,n,n_unclamped,sweeps,flips,flips_per_sweep,wall_ns,fps\n";
  for (const std::string& path : model_paths) {
    const IsingModel model = model_from_json(load_json(path));
    const Coloring col = dsatur(model);
    SamplerConfig cfg = sf.config();
    cfg.schedule = {sf.beta_end, sf.beta_end, 1};
    cfg.sweeps_per_beta = sweeps;
    auto [state, stats] = anneal(model, &col, cfg);
    csv << path << ',' << model.n << ',' << stats.n_unclamped << ',' << stats.total_sweeps << ','
        << stats.total_flips << ',' << stats.n_unclamped << ',' << stats.wall_ns << ',' << stats.fps << '\n';
    std::printf("%-40s N=%6d  fps %.3e  (flips/sweep = %d)\n", path.c_str(), model.n, stats.fps,
                stats.n_unclamped);
  }
  std::printf("wrote %s\n", out.c_str());
  return kExitOk;
}

int cmd_masks(const std::string& model_path, const std::string& kind, double beta, int masks, int64_t samples,
              uint64_t seed, int threads, const std::string& out_dir) {
  const IsingModel model =
      model_path.empty() ? gate_model(GateKind::kFullAdder) : model_from_json(load_json(model_path));
  ensure_dir(out_dir);
  std::vector<MaskKind> kinds;
  if (kind == "both") {
    kinds = {MaskKind::single, MaskKind::double_};
  } else if (kind == "single") {
    kinds = {MaskKind::single};
  } else if (kind == "double") {
    kinds = {MaskKind::double_};
  } else {
    throw CLI::ValidationError("--kind must be single, double or both");
  }
  for (MaskKind mk : kinds) {
    MaskExperimentConfig cfg;
    cfg.kind = mk;
    cfg.beta = beta;
    cfg.masks_per_er = masks;
    cfg.samples_per_mask = samples;
    cfg.seed = seed;
    cfg.threads = threads;
    const auto curve = mask_experiment(model, cfg);
    const std::string path = out_dir + "/kl_" + mask_name(mk) + ".csv";
    write_kl_csv(curve, mk, path);
    std::printf("%s mask: KL %.4g at Er=0 -> %.4g at Er=1; wrote %s\n", mask_name(mk), curve.front().mean_kl,
                curve.back().mean_kl, path.c_str());
  }
  return kExitOk;
}

int cmd_pipeline(const std::string& cnf_path, int bits, uint64_t seed, uint64_t a, uint64_t b, int k, bool fused,
                 bool dry_run, const SamplerFlags& sf, const std::string& out_dir) {
  Instance inst;
  if (!cnf_path.empty()) {
    inst.kind = Instance::Kind::sat;
    inst.cnf = read_cnf(cnf_path);
    inst.id = cnf_path;
  } else if (a && b) {
    inst = make_semiprime(bits, a, b);
  } else {
    inst = gen_semiprime(bits, seed);
  }
  PipelineOptions opt;
  opt.k = k;
  opt.sparse = !fused;
  opt.dry_run = dry_run;
  opt.sampler = sf.config();
  opt.out_dir = out_dir;
  const PipelineResult res = pipeline(inst, opt);
  report_graph(res.circuit, res.model, &res.coloring);
  if (dry_run) {
    std::printf("dry run: artifacts in %s\n", out_dir.c_str());
    return kExitOk;
  }
  if (inst.kind == Instance::Kind::factorization) {
    std::printf("product %llu -> factors %llu x %llu (%s)\n", static_cast<unsigned long long>(inst.product),
                static_cast<unsigned long long>(res.factor_a), static_cast<unsigned long long>(res.factor_b),
                res.solved ? "exact" : "not exact");
  } else {
    std::printf("satisfied %d / %d clauses (%s)\n", res.satisfied, res.circuit.cnf.c(),
                res.solved ? "all" : "partial");
  }
  return res.solved ? kExitOk : kExitTargetNotReached;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse Ising machine workbench: invertible-logic compilation and chromatic Gibbs sampling"};
  app.require_subcommand(1);

  // gen-semiprime
  int gs_bits = 14;
  uint64_t gs_seed = 1, gs_a = 0, gs_b = 0;
  std::string gs_out;
  auto* gs = app.add_subcommand("gen-semiprime", "generate a planted semiprime instance");
  gs->add_option("--bits", gs_bits, "total product bits (even)")->required();
  gs->add_option("--seed", gs_seed, "random seed");
  gs->add_option("--a", gs_a, "force factor A");
  gs->add_option("--b", gs_b, "force factor B");
  gs->add_option("--out", gs_out, "write instance JSON here");

  // gen-3sat
  int g3_vars = 20, g3_clauses = 91;
  uint64_t g3_seed = 1;
  std::string g3_out;
  auto* g3 = app.add_subcommand("gen-3sat", "generate a planted-satisfiable random 3SAT instance");
  g3->add_option("--vars", g3_vars, "variable count")->required();
  g3->add_option("--clauses", g3_clauses, "clause count")->required();
  g3->add_option("--seed", g3_seed, "random seed");
  g3->add_option("--out", g3_out, "write DIMACS here (default stdout)");

  // build-fact
  int bf_m = 8;
  uint64_t bf_product = 0, bf_a = 0, bf_b = 0;
  std::string bf_out = ".";
  auto* bf = app.add_subcommand("build-fact", "build a fused invertible multiplier circuit");
  bf->add_option("--m", bf_m, "bits per factor")->required();
  bf->add_option("--product", bf_product, "clamp the output to this product");
  bf->add_option("--a", bf_a, "planted factor A");
  bf->add_option("--b", bf_b, "planted factor B");
  bf->add_option("--out-dir", bf_out, "artifact directory");

  // build-sat
  std::string bs_cnf, bs_out = ".";
  bool bs_unclamped = false;
  auto* bs = app.add_subcommand("build-sat", "build a fused invertible 3SAT circuit from DIMACS");
  bs->add_option("--cnf", bs_cnf, "DIMACS file")->required();
  bs->add_flag("--unclamped", bs_unclamped, "leave the output node free");
  bs->add_option("--out-dir", bs_out, "artifact directory");

  // sparsify
  std::string sp_circuit, sp_out = ".";
  int sp_k = 0, sp_jt = 1;
  auto* sp = app.add_subcommand("sparsify", "degree-bound a circuit with copy gates");
  sp->add_option("--circuit", sp_circuit, "circuit JSON")->required();
  sp->add_option("--k", sp_k, "max neighbors (default 5 factorizer, 4 sat)");
  sp->add_option("--jt", sp_jt, "copy coupling strength");
  sp->add_option("--out-dir", sp_out, "artifact directory");

  // color
  std::string co_model, co_out = "coloring.csv", co_embed;
  auto* co = app.add_subcommand("color", "DSATUR-color a model into independent blocks");
  co->add_option("--model", co_model, "model JSON")->required();
  co->add_option("--out", co_out, "coloring CSV path");
  co->add_option("--embed-model", co_embed, "also write the model JSON with the coloring embedded");

  // sample
  std::string sm_model, sm_circuit, sm_coloring, sm_out = ".";
  double sm_beta = 1.0;
  int64_t sm_sweeps = 10000;
  SamplerFlags sm_flags;
  auto* sm = app.add_subcommand("sample", "fixed-temperature sampling run");
  sm->add_option("--model", sm_model, "model JSON");
  sm->add_option("--circuit", sm_circuit, "circuit JSON (enables solution decoding)");
  sm->add_option("--coloring", sm_coloring, "coloring CSV (default: run DSATUR)");
  sm->add_option("--beta", sm_beta, "inverse temperature")->required();
  sm->add_option("--sweeps", sm_sweeps, "number of sweeps");
  sm_flags.attach(sm);
  sm->add_option("--out-dir", sm_out, "artifact directory");

  // anneal
  std::string an_model, an_circuit, an_coloring, an_out = ".";
  SamplerFlags an_flags;
  auto* an = app.add_subcommand("anneal", "simulated annealing with a linear beta schedule");
  an->add_option("--model", an_model, "model JSON");
  an->add_option("--circuit", an_circuit, "circuit JSON (enables solution decoding)");
  an->add_option("--coloring", an_coloring, "coloring CSV (default: run DSATUR)");
  an_flags.attach(an);
  an->add_option("--out-dir", an_out, "artifact directory");

  // tts
  std::string tt_circuit, tt_target = "99", tt_out = ".";
  int tt_repeats = 10, tt_threads = 1;
  int64_t tt_min = 10'000, tt_total = 10'000'000;
  SamplerFlags tt_flags;
  auto* tt = app.add_subcommand("tts", "time-to-solution campaign with restart doubling");
  tt->add_option("--circuit", tt_circuit, "circuit JSON")->required();
  tt->add_option("--target", tt_target, "100, 99 or 95")->check(CLI::IsMember({"100", "99", "95"}));
  tt->add_option("--repeats", tt_repeats, "independent seeded runs");
  tt->add_option("--min-budget", tt_min, "first restart budget (sweeps)");
  tt->add_option("--budget", tt_total, "total sweep budget per run");
  tt->add_option("--threads", tt_threads, "worker threads");
  tt_flags.attach(tt);
  tt->add_option("--out-dir", tt_out, "artifact directory");

  // fps
  std::vector<std::string> fp_models;
  int64_t fp_sweeps = 20'000;
  std::string fp_out = "fps.csv";
  SamplerFlags fp_flags;
  auto* fp = app.add_subcommand("fps", "measure correlated flips per second");
  fp->add_option("--model", fp_models, "model JSON (repeatable)")->required();
  fp->add_option("--sweeps", fp_sweeps, "sweeps per measurement");
  fp_flags.attach(fp);
  fp->add_option("--out", fp_out, "CSV path");

  // masks
  std::string mk_model, mk_kind = "both", mk_out = ".";
  double mk_beta = 1.0;
  int mk_masks = 400, mk_threads = 1;
  int64_t mk_samples = 20'000;
  uint64_t mk_seed = 1;
  auto* mk = app.add_subcommand("masks", "inexact-sampling error-mask experiment (default: full adder)");
  mk->add_option("--model", mk_model, "model JSON (default: the 5 p-bit full adder)");
  mk->add_option("--kind", mk_kind, "single|double|both");
  mk->add_option("--beta", mk_beta, "inverse temperature");
  mk->add_option("--masks", mk_masks, "random masks per error fraction");
  mk->add_option("--samples", mk_samples, "samples per mask");
  mk->add_option("--seed", mk_seed, "random seed");
  mk->add_option("--threads", mk_threads, "worker threads");
  mk->add_option("--out-dir", mk_out, "artifact directory");

  // pipeline
  std::string pl_cnf, pl_out = ".";
  int pl_bits = 14, pl_k = 0;
  uint64_t pl_seed = 1, pl_a = 0, pl_b = 0;
  bool pl_fused = false, pl_dry = false;
  SamplerFlags pl_flags;
  auto* pl = app.add_subcommand("pipeline", "build -> sparsify -> color -> anneal end to end");
  pl->add_option("--cnf", pl_cnf, "DIMACS file (SAT mode)");
  pl->add_option("--bits", pl_bits, "semiprime bits (factorization mode)");
  pl->add_option("--instance-seed", pl_seed, "instance seed (factorization mode)");
  pl->add_option("--a", pl_a, "force factor A");
  pl->add_option("--b", pl_b, "force factor B");
  pl->add_option("--k", pl_k, "max neighbors (default 5 factorizer, 4 sat)");
  pl->add_flag("--fused", pl_fused, "skip sparsification");
  pl->add_flag("--dry-run", pl_dry, "build and validate without sampling");
  pl_flags.attach(pl);
  pl->add_option("--out-dir", pl_out, "artifact directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gs->parsed()) return cmd_gen_semiprime(gs_bits, gs_seed, gs_a, gs_b, gs_out);
    if (g3->parsed()) return cmd_gen_3sat(g3_vars, g3_clauses, g3_seed, g3_out);
    if (bf->parsed()) return cmd_build_fact(bf_m, bf_product, bf_a, bf_b, bf_out);
    if (bs->parsed()) return cmd_build_sat(bs_cnf, bs_unclamped, bs_out);
    if (sp->parsed()) return cmd_sparsify(sp_circuit, sp_k, sp_jt, sp_out);
    if (co->parsed()) return cmd_color(co_model, co_out, co_embed);
    if (sm->parsed()) {
      LoadedProblem p = load_problem(sm_model, sm_circuit, sm_coloring);
      SamplerConfig cfg = sm_flags.config();
      cfg.schedule = {sm_beta, sm_beta, 1};
      cfg.sweeps_per_beta = sm_sweeps;
      cfg.record_every = std::max<int64_t>(1, sm_sweeps / 100);
      return run_and_write(p, cfg, sm_out);
    }
    if (an->parsed()) {
      LoadedProblem p = load_problem(an_model, an_circuit, an_coloring);
      return run_and_write(p, an_flags.config(), an_out);
    }
    if (tt->parsed()) return cmd_tts(tt_circuit, tt_target, tt_repeats, tt_flags, tt_min, tt_total, tt_out, tt_threads);
    if (fp->parsed()) return cmd_fps(fp_models, fp_flags, fp_sweeps, fp_out);
    if (mk->parsed()) return cmd_masks(mk_model, mk_kind, mk_beta, mk_masks, mk_samples, mk_seed, mk_threads, mk_out);
    if (pl->parsed()) return cmd_pipeline(pl_cnf, pl_bits, pl_seed, pl_a, pl_b, pl_k, pl_fused, pl_dry, pl_flags, pl_out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

#pragma once

// Block-Gibbs sampling engine. Chromatic mode emulates the phase-shifted
// clock architecture: color blocks are processed in fixed ascending order and
// every p-bit of a block updates from live neighbor values (neighbors are
// never in the same block, so the sweep is an exact Gibbs chain). Sequential
// mode is the reference one-at-a-time chain; parallel mode updates every node
// from the previous sweep's snapshot. Simulated annealing raises beta
// linearly; flips (correlated p-bit updates) are counted exactly.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "spim/circuit.hpp"
#include "spim/coloring.hpp"
#include "spim/model.hpp"
#include "spim/random.hpp"

namespace spim {

enum class SweepMode : uint8_t { chromatic, sequential, parallel };

inline const char* mode_name(SweepMode m) {
  switch (m) {
    case SweepMode::chromatic: return "chromatic";
    case SweepMode::sequential: return "sequential";
    case SweepMode::parallel: return "parallel";
  }
  throw std::invalid_argument("bad sweep mode");
}

inline SweepMode mode_from_name(const std::string& s) {
  if (s == "chromatic") return SweepMode::chromatic;
  if (s == "sequential" || s == "sequential_gibbs") return SweepMode::sequential;
  if (s == "parallel" || s == "fully_parallel") return SweepMode::parallel;
  throw std::invalid_argument("unknown sweep mode: " + s);
}

/// beta rises linearly from beta_start to beta_end over `steps` plateaus.
struct AnnealSchedule {
  double beta_start = 0.2;
  double beta_end = 5.0;
  int steps = 100;

  double beta_at(int step) const {
    if (steps <= 1) return beta_start;
    return beta_start + (beta_end - beta_start) * static_cast<double>(step) / static_cast<double>(steps - 1);
  }

  void check() const {
    if (beta_start < 0 || beta_end < beta_start) throw std::invalid_argument("annealing beta must be nondecreasing and nonnegative");
    if (steps < 1) throw std::invalid_argument("annealing needs at least one step");
  }
};

enum class Activation : uint8_t { exact_tanh, lut };

struct SamplerConfig {
  SweepMode mode = SweepMode::chromatic;
  RngKind rng = RngKind::counter;
  uint64_t seed = 1;
  AnnealSchedule schedule;
  int64_t sweeps_per_beta = 100;
  bool quantized_beta = false;   // round beta*J, beta*h to the integer weight grid
  Activation activation = Activation::exact_tanh;
  int lut_bits = 8;              // activation LUT output precision
  int64_t record_every = 0;      // 0 = one trace record per beta plateau
  double paced_sweeps_per_sec = 0;  // >0 emulates a fixed-rate clock
};

// ---------------------------------------------------------------------------
// Single-sweep reference operations

namespace detail {

inline double activation_threshold(Rep rep, double beta_scale, int64_t field) {
  const double x = beta_scale * static_cast<double>(field);
  return std::tanh(rep == Rep::bipolar ? x : 0.5 * x);
}

/// Rounds a tanh value onto a 2^bits-level grid over [-1, 1]; the rounding
/// error stays within 2^-(bits-1).
inline double lut_quantize(double t, int bits) {
  const double levels = static_cast<double>((1 << bits) - 1);
  return 2.0 * std::round((t + 1.0) * 0.5 * levels) / levels - 1.0;
}

inline spin_t spin_for(Rep rep, bool up) { return up ? up_value(rep) : down_value(rep); }

}  // namespace detail

/// One pass over the color blocks in ascending order; every unclamped node
/// updates once from live neighbor values.
inline void sweep_chromatic(const IsingModel& model, const Coloring& coloring, SpinState& state, double beta,
                            NodeRngs& rngs) {
  model.check_state(state);
  if (!validate(model, coloring)) throw std::invalid_argument("improper coloring refused");
  const double bs = beta * model.weight_scale;
  for (const auto& block : coloring.blocks) {
    for (int i : block) {
      const double t = detail::activation_threshold(model.rep, bs, model.local_field_int(state, i));
      state[i] = detail::spin_for(model.rep, t - rngs.next_pm1(i) >= 0.0);
    }
  }
}

/// Standard Gibbs: nodes one at a time in index order, always-fresh fields.
inline void sweep_sequential(const IsingModel& model, SpinState& state, double beta, NodeRngs& rngs) {
  model.check_state(state);
  const double bs = beta * model.weight_scale;
  for (int i = 0; i < model.n; ++i) {
    if (model.is_clamped(i)) continue;
    const double t = detail::activation_threshold(model.rep, bs, model.local_field_int(state, i));
    state[i] = detail::spin_for(model.rep, t - rngs.next_pm1(i) >= 0.0);
  }
}

/// Fully synchronous update: all nodes simultaneously from the previous state.
inline void sweep_parallel(const IsingModel& model, SpinState& state, double beta, NodeRngs& rngs) {
  model.check_state(state);
  const double bs = beta * model.weight_scale;
  const SpinState prev = state;
  for (int i = 0; i < model.n; ++i) {
    if (model.is_clamped(i)) continue;
    const double t = detail::activation_threshold(model.rep, bs, model.local_field_int(prev, i));
    state[i] = detail::spin_for(model.rep, t - rngs.next_pm1(i) >= 0.0);
  }
}

// ---------------------------------------------------------------------------
// Chain: the table-driven engine used for long runs. Bit-identical to the
// reference sweeps above for the same rng streams.

class Chain {
 public:
  Chain(const IsingModel& model, const Coloring* coloring, const SamplerConfig& cfg)
      : model_(model), coloring_(coloring), cfg_(cfg), rngs_(cfg.rng, cfg.seed, model.n),
        state_(model.rep, model.n, down_value(model.rep)) {
    if (cfg.mode == SweepMode::chromatic) {
      if (!coloring_ || !validate(model_, *coloring_)) throw std::invalid_argument("chromatic mode needs a proper coloring");
    }
    free_ = model_.free_nodes();
    model_.apply_clamps(state_);
  }

  /// Random initial state drawn from each node's own stream.
  void init_random() {
    for (int i : free_) state_[i] = detail::spin_for(model_.rep, rngs_.next_u01(i) < 0.5);
    model_.apply_clamps(state_);
    energy_ = model_.energy_int(state_);
  }

  void init_state(const SpinState& s) {
    model_.check_state(s);
    state_ = s;
    model_.apply_clamps(state_);
    energy_ = model_.energy_int(state_);
  }

  void set_beta(double beta) {
    beta_ = beta;
    build_tables();
  }

  void sweep() {
    switch (cfg_.mode) {
      case SweepMode::chromatic:
        for (const auto& block : coloring_->blocks)
          for (int i : block) update_node(i);
        break;
      case SweepMode::sequential:
        for (int i : free_) update_node(i);
        break;
      case SweepMode::parallel: {
        snapshot_ = state_.v;
        for (int i : free_) update_node_from(i, snapshot_);
        energy_ = model_.energy_int(state_);
        break;
      }
    }
    flips_ += static_cast<int64_t>(free_.size());
  }

  const SpinState& state() const { return state_; }
  int64_t energy_int() const { return energy_; }
  double energy() const { return model_.weight_scale * static_cast<double>(energy_); }
  int64_t flips() const { return flips_; }
  int n_unclamped() const { return static_cast<int>(free_.size()); }
  double beta() const { return beta_; }

 private:
  void build_tables() {
    const double scale = model_.weight_scale;
    if (cfg_.quantized_beta) {
      eff_adj_.assign(static_cast<size_t>(model_.n), {});
      eff_h_.assign(static_cast<size_t>(model_.n), 0);
      for (int i = 0; i < model_.n; ++i) {
        for (const auto& [j, w] : model_.adj[static_cast<size_t>(i)])
          eff_adj_[static_cast<size_t>(i)].emplace_back(j, static_cast<weight_t>(std::llround(beta_ * scale * w)));
        eff_h_[static_cast<size_t>(i)] = static_cast<weight_t>(std::llround(beta_ * scale * model_.h[static_cast<size_t>(i)]));
      }
    }
    int64_t fmax = 0;
    for (int i = 0; i < model_.n; ++i) {
      int64_t row = std::abs(int64_t{cfg_.quantized_beta ? eff_h_[static_cast<size_t>(i)] : model_.h[static_cast<size_t>(i)]});
      const auto& row_adj = cfg_.quantized_beta ? eff_adj_[static_cast<size_t>(i)] : model_.adj[static_cast<size_t>(i)];
      for (const auto& [j, w] : row_adj) row += std::abs(int64_t{w});
      fmax = std::max(fmax, row);
    }
    fmax_ = fmax;
    table_.assign(static_cast<size_t>(2 * fmax_ + 1), 0.0);
    const double bs = cfg_.quantized_beta ? 1.0 : beta_ * scale;
    for (int64_t f = -fmax_; f <= fmax_; ++f) {
      double t = detail::activation_threshold(model_.rep, bs, f);
      if (cfg_.activation == Activation::lut) t = detail::lut_quantize(t, cfg_.lut_bits);
      table_[static_cast<size_t>(f + fmax_)] = t;
    }
  }

  void update_node(int i) { update_node_from(i, state_.v); }

  void update_node_from(int i, const std::vector<spin_t>& src) {
    const auto& row_adj = cfg_.quantized_beta ? eff_adj_[static_cast<size_t>(i)] : model_.adj[static_cast<size_t>(i)];
    int64_t f = cfg_.quantized_beta ? eff_h_[static_cast<size_t>(i)] : model_.h[static_cast<size_t>(i)];
    for (const auto& [j, w] : row_adj) f += int64_t{w} * src[static_cast<size_t>(j)];
    const double t = table_[static_cast<size_t>(f + fmax_)];
    const spin_t next = detail::spin_for(model_.rep, t - rngs_.next_pm1(i) >= 0.0);
    const spin_t old = state_[i];
    if (next != old && cfg_.mode != SweepMode::parallel) {
      // dE = (m_old - m_new) * I_i with the model's own weights
      const int64_t field = cfg_.quantized_beta ? model_.local_field_int(state_, i) : f;
      energy_ += (int64_t{old} - int64_t{next}) * field;
    }
    state_[i] = next;
  }

  const IsingModel& model_;
  const Coloring* coloring_;
  SamplerConfig cfg_;
  NodeRngs rngs_;
  SpinState state_;
  std::vector<spin_t> snapshot_;
  std::vector<int> free_;
  std::vector<double> table_;
  std::vector<std::vector<std::pair<int, weight_t>>> eff_adj_;
  std::vector<weight_t> eff_h_;
  int64_t fmax_ = 0;
  int64_t energy_ = 0;
  int64_t flips_ = 0;
  double beta_ = 0;
};

// ---------------------------------------------------------------------------
// Run bookkeeping

struct RunRecord {
  int64_t sweep;
  double beta;
  double energy;
  int satisfied;  // -1 when not applicable
  int64_t flips;
  int64_t wall_ns;
};

struct TtsResult {
  std::string target;
  bool reached = false;
  int64_t sweeps = -1;
  int64_t wall_ns = -1;
  int attempts = 0;
};

struct RunStats {
  std::vector<RunRecord> trace;
  int64_t total_sweeps = 0;
  int64_t total_flips = 0;
  int64_t wall_ns = 0;
  int n_unclamped = 0;
  double fps = 0;
  double best_energy = 0;
  SpinState best_state;
  double final_energy = 0;
  std::optional<TtsResult> tts;
};

/// Clause bookkeeping for SAT runs: which nodes carry each variable.
struct SatView {
  const CnfFormula* cnf = nullptr;
  const std::vector<std::vector<int>>* var_nodes = nullptr;

  int satisfied(const SpinState& s) const {
    return satisfied_clauses(*cnf, assignment_from_state(s, *var_nodes));
  }
};

/// Correlated flips per second over the sampling wall time (I/O excluded).
inline double measure_fps(const RunStats& stats) {
  if (stats.total_sweeps <= 0 || stats.wall_ns <= 0) throw std::invalid_argument("empty run");
  return static_cast<double>(stats.total_flips) * 1e9 / static_cast<double>(stats.wall_ns);
}

// ---------------------------------------------------------------------------
// Annealing

namespace detail {

class Pacer {
 public:
  explicit Pacer(double sweeps_per_sec) : period_ns_(sweeps_per_sec > 0 ? 1e9 / sweeps_per_sec : 0) {}

  void start() { t0_ = std::chrono::steady_clock::now(); }

  void wait(int64_t sweep_index) {
    if (period_ns_ <= 0) return;
    const auto due = t0_ + std::chrono::nanoseconds(static_cast<int64_t>(period_ns_ * static_cast<double>(sweep_index)));
    std::this_thread::sleep_until(due);
  }

 private:
  double period_ns_;
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace detail

/// Runs the linear annealing schedule. Returns the final state; the best-seen
/// state (by energy) is in the stats. on_sweep, when set, is called after
/// every sweep and may stop the run by returning true.
inline std::pair<SpinState, RunStats> anneal(
    const IsingModel& model, const Coloring* coloring, const SamplerConfig& cfg, const SatView* sat = nullptr,
    const SpinState* init = nullptr,
    const std::function<bool(int64_t sweep, double beta, int64_t energy_int)>& on_sweep = nullptr) {
  cfg.schedule.check();
  Chain chain(model, coloring, cfg);
  if (init)
    chain.init_state(*init);
  else
    chain.init_random();

  RunStats stats;
  stats.n_unclamped = chain.n_unclamped();
  int64_t best = chain.energy_int();
  SpinState best_state = chain.state();

  detail::Pacer pacer(cfg.paced_sweeps_per_sec);
  const auto t0 = std::chrono::steady_clock::now();
  pacer.start();
  auto now_ns = [&]() {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
  };
  auto record = [&](double beta) {
    stats.trace.push_back({stats.total_sweeps, beta,
                           model.weight_scale * static_cast<double>(chain.energy_int()),
                           sat ? sat->satisfied(chain.state()) : -1, chain.flips(), now_ns()});
  };

  bool stopped = false;
  for (int step = 0; step < cfg.schedule.steps && !stopped; ++step) {
    const double beta = cfg.schedule.beta_at(step);
    chain.set_beta(beta);
    for (int64_t s = 0; s < cfg.sweeps_per_beta && !stopped; ++s) {
      pacer.wait(stats.total_sweeps + 1);
      chain.sweep();
      ++stats.total_sweeps;
      if (chain.energy_int() < best) {
        best = chain.energy_int();
        best_state = chain.state();
      }
      if (cfg.record_every > 0 && stats.total_sweeps % cfg.record_every == 0) record(beta);
      if (on_sweep && on_sweep(stats.total_sweeps, beta, chain.energy_int())) stopped = true;
    }
    if (cfg.record_every == 0) record(beta);
  }

  stats.wall_ns = now_ns();
  stats.total_flips = chain.flips();
  stats.best_energy = model.weight_scale * static_cast<double>(best);
  stats.best_state = std::move(best_state);
  stats.final_energy = chain.energy();
  stats.fps = stats.wall_ns > 0 ? static_cast<double>(stats.total_flips) * 1e9 / static_cast<double>(stats.wall_ns) : 0.0;
  return {chain.state(), std::move(stats)};
}

// ---------------------------------------------------------------------------
// Time to solution

enum class TtsTarget : uint8_t { tts100, tts99, tts95 };

inline const char* tts_name(TtsTarget t) {
  switch (t) {
    case TtsTarget::tts100: return "tts100";
    case TtsTarget::tts99: return "tts99";
    case TtsTarget::tts95: return "tts95";
  }
  throw std::invalid_argument("bad tts target");
}

struct TtsSpec {
  TtsTarget target = TtsTarget::tts100;
  // energy route (factorization): ground energy in integer units
  std::optional<int64_t> ground_energy_int;
  // clause route (SAT)
  const SatView* sat = nullptr;
};

struct TtsBudget {
  int64_t min_sweeps = 10'000;   // first restart budget
  int64_t total_sweeps = 10'000'000;  // give up beyond this
  double doubling = 2.0;
};

/// Restart protocol: anneal the full schedule within a budget of sweeps,
/// reset and double the budget on failure. The reported time accumulates
/// across restarts.
inline std::pair<TtsResult, RunStats> measure_tts(const IsingModel& model, const Coloring* coloring,
                                                  const SamplerConfig& base_cfg, const TtsSpec& spec,
                                                  const TtsBudget& budget, const SpinState* init = nullptr) {
  TtsResult res;
  res.target = tts_name(spec.target);

  if (spec.target == TtsTarget::tts95 && !spec.sat) throw std::invalid_argument("tts95 needs a CNF view");
  int64_t energy_threshold = 0;
  int satisfied_threshold = 0;
  const bool clause_route = spec.sat != nullptr && spec.target != TtsTarget::tts99;
  if (clause_route) {
    const int c = spec.sat->cnf->c();
    satisfied_threshold = spec.target == TtsTarget::tts100 ? c : (19 * c + 19) / 20;  // ceil(0.95c)
  } else {
    if (!spec.ground_energy_int) throw std::invalid_argument("energy-based TTS needs the ground energy");
    const double eg = static_cast<double>(*spec.ground_energy_int);
    if (eg >= 0) throw std::invalid_argument("ground energy must be negative for normalized-energy targets");
    energy_threshold = spec.target == TtsTarget::tts100
                           ? *spec.ground_energy_int
                           : static_cast<int64_t>(std::floor(0.99 * eg));
  }

  int64_t consumed = 0;
  int64_t wall_consumed = 0;
  RunStats last;
  for (int attempt = 0;; ++attempt) {
    int64_t b = static_cast<int64_t>(static_cast<double>(budget.min_sweeps) * std::pow(budget.doubling, attempt));
    b = std::min(b, budget.total_sweeps - consumed);
    if (b <= 0) break;
    ++res.attempts;

    SamplerConfig cfg = base_cfg;
    cfg.seed = mix_seed(base_cfg.seed, 0xA77E000ull + static_cast<uint64_t>(attempt));
    cfg.sweeps_per_beta = std::max<int64_t>(1, (b + cfg.schedule.steps - 1) / cfg.schedule.steps);

    Chain chain(model, coloring, cfg);
    if (init)
      chain.init_state(*init);
    else
      chain.init_random();
    auto target_hit = [&]() {
      if (clause_route) return spec.sat->satisfied(chain.state()) >= satisfied_threshold;
      return chain.energy_int() <= energy_threshold;
    };

    const auto t0 = std::chrono::steady_clock::now();
    auto wall_now = [&]() {
      return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
    };
    int64_t sweeps = 0;
    int64_t hit_sweep = target_hit() ? 0 : -1;  // a planted start is already solved
    for (int step = 0; step < cfg.schedule.steps && sweeps < b && hit_sweep < 0; ++step) {
      chain.set_beta(cfg.schedule.beta_at(step));
      for (int64_t s = 0; s < cfg.sweeps_per_beta && sweeps < b; ++s) {
        chain.sweep();
        ++sweeps;
        if (target_hit()) {
          hit_sweep = sweeps;
          break;
        }
      }
    }
    const int64_t wall = wall_now();
    last = RunStats{};
    last.total_sweeps = sweeps;
    last.total_flips = chain.flips();
    last.wall_ns = wall;
    last.n_unclamped = chain.n_unclamped();
    last.final_energy = chain.energy();
    last.best_state = chain.state();
    if (hit_sweep >= 0) {
      res.reached = true;
      res.sweeps = consumed + hit_sweep;
      res.wall_ns = wall_consumed + wall;
      return {res, last};
    }
    consumed += sweeps;
    wall_consumed += wall;
    if (consumed >= budget.total_sweeps) break;
  }
  res.sweeps = consumed;
  res.wall_ns = wall_consumed;
  return {res, last};
}

// ---------------------------------------------------------------------------
// Exponential fit t = t0 * exp(N / tau) by least squares on log t.

struct ExponentialFit {
  double t0 = 0;
  double tau = 0;
};

inline ExponentialFit fit_exponential(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw std::invalid_argument("exponential fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(points.size());
  for (const auto& [x, t] : points) {
    if (t <= 0) throw std::invalid_argument("exponential fit needs positive times");
    const double y = std::log(t);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0) throw std::invalid_argument("exponential fit is degenerate");
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  if (slope == 0) throw std::invalid_argument("exponential fit has zero slope");
  return {std::exp(intercept), 1.0 / slope};
}

// ---------------------------------------------------------------------------
// Run artifacts

inline void write_run_csv(const RunStats& stats, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "sweep,beta,energy,satisfied_clauses,cumulative_flips,wall_ns\n";
  for (const auto& r : stats.trace) {
    out << r.sweep << ',' << r.beta << ',' << r.energy << ',';
    if (r.satisfied >= 0) out << r.satisfied;
    out << ',' << r.flips << ',' << r.wall_ns << '\n';
  }
}

inline nlohmann::json summary_to_json(const RunStats& stats) {
  nlohmann::json j;
  j["n_unclamped"] = stats.n_unclamped;
  j["sweeps"] = stats.total_sweeps;
  j["flips"] = stats.total_flips;
  j["flips_per_sweep"] = stats.n_unclamped;
  j["wall_ns"] = stats.wall_ns;
  j["fps"] = stats.fps;
  j["best_energy"] = stats.best_energy;
  j["best_state_hex"] = state_to_hex(stats.best_state);
  j["final_energy"] = stats.final_energy;
  if (stats.tts) {
    j["tts"] = {{"target", stats.tts->target},
                {"reached", stats.tts->reached},
                {"sweeps", stats.tts->sweeps},
                {"wall_ns", stats.tts->wall_ns},
                {"attempts", stats.tts->attempts}};
  }
  return j;
}

}  // namespace spim

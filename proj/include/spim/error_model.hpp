#pragma once

// Inexact ("overclocked") Gibbs sampling. Failing neighbor connections are
// modeled by per-directed-edge error masks: the single mask flips the sign of
// a failing coupling, the double mask makes it read the previous sweep's
// value instead of the live one. At zero error both reduce to the exact
// chain; a full double mask is the fully parallel update, whose stationary
// distribution has the cosh-product closed form.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "spim/model.hpp"
#include "spim/random.hpp"
#include "spim/sampler.hpp"

namespace spim {

enum class MaskKind : uint8_t { single, double_ };

inline const char* mask_name(MaskKind k) { return k == MaskKind::single ? "single" : "double"; }

/// Per-directed-edge failure flags, aligned with the model's adjacency lists:
/// fail[i][a] marks the connection into i from its a-th neighbor.
struct ErrorMask {
  MaskKind kind = MaskKind::single;
  std::vector<std::vector<uint8_t>> fail;

  int total_entries() const {
    int t = 0;
    for (const auto& row : fail) t += static_cast<int>(row.size());
    return t;
  }

  int failing_entries() const {
    int t = 0;
    for (const auto& row : fail)
      for (uint8_t f : row) t += f;
    return t;
  }

  double error_fraction() const {
    const int total = total_entries();
    return total == 0 ? 0.0 : static_cast<double>(failing_entries()) / static_cast<double>(total);
  }
};

inline ErrorMask all_pass_mask(const IsingModel& model, MaskKind kind) {
  ErrorMask m;
  m.kind = kind;
  m.fail.resize(static_cast<size_t>(model.n));
  for (int i = 0; i < model.n; ++i) m.fail[static_cast<size_t>(i)].assign(model.adj[static_cast<size_t>(i)].size(), 0);
  return m;
}

/// Uniformly random mask with exactly n_fail failing directed entries.
inline ErrorMask random_mask(const IsingModel& model, MaskKind kind, int n_fail, uint64_t seed) {
  ErrorMask m = all_pass_mask(model, kind);
  std::vector<std::pair<int, int>> slots;
  for (int i = 0; i < model.n; ++i)
    for (size_t a = 0; a < model.adj[static_cast<size_t>(i)].size(); ++a) slots.emplace_back(i, static_cast<int>(a));
  if (n_fail < 0 || n_fail > static_cast<int>(slots.size()))
    throw std::invalid_argument("mask error count out of range");
  uint64_t s = seed;
  for (int t = 0; t < n_fail; ++t) {  // partial Fisher-Yates
    s = splitmix64(s);
    const size_t pick = static_cast<size_t>(t) + s % (slots.size() - static_cast<size_t>(t));
    std::swap(slots[static_cast<size_t>(t)], slots[pick]);
    m.fail[static_cast<size_t>(slots[static_cast<size_t>(t)].first)][static_cast<size_t>(slots[static_cast<size_t>(t)].second)] = 1;
  }
  return m;
}

/// I_i = sum_j M^S_ij J_ij m_j + h_i with M = -1 on failing entries.
inline int64_t field_single_mask_int(const IsingModel& model, const SpinState& state, const ErrorMask& mask, int i) {
  if (mask.kind != MaskKind::single) throw std::invalid_argument("mask kind mismatch");
  model.check_node(i);
  int64_t f = model.h[static_cast<size_t>(i)];
  const auto& row = model.adj[static_cast<size_t>(i)];
  for (size_t a = 0; a < row.size(); ++a) {
    const int64_t sign = mask.fail[static_cast<size_t>(i)][a] ? -1 : 1;
    f += sign * int64_t{row[a].second} * state[row[a].first];
  }
  return f;
}

inline double field_single_mask(const IsingModel& model, const SpinState& state, const ErrorMask& mask, int i) {
  model.check_state(state);
  return model.weight_scale * static_cast<double>(field_single_mask_int(model, state, mask, i));
}

/// I_i = sum_j M^D_ij J_ij m_j^new + sum_j (1 - M^D_ij) J_ij m_j^old + h_i,
/// failing entries reading the previous sweep's snapshot.
inline int64_t field_double_mask_int(const IsingModel& model, const SpinState& state_new, const SpinState& state_old,
                                     const ErrorMask& mask, int i) {
  if (mask.kind != MaskKind::double_) throw std::invalid_argument("mask kind mismatch");
  model.check_node(i);
  int64_t f = model.h[static_cast<size_t>(i)];
  const auto& row = model.adj[static_cast<size_t>(i)];
  for (size_t a = 0; a < row.size(); ++a) {
    const SpinState& src = mask.fail[static_cast<size_t>(i)][a] ? state_old : state_new;
    f += int64_t{row[a].second} * src[row[a].first];
  }
  return f;
}

inline double field_double_mask(const IsingModel& model, const SpinState& state_new, const SpinState& state_old,
                                const ErrorMask& mask, int i) {
  model.check_state(state_new);
  model.check_state(state_old);
  return model.weight_scale * static_cast<double>(field_double_mask_int(model, state_new, state_old, mask, i));
}

/// One sequential sweep under a mask. For the double mask, `snapshot` must
/// hold the state at the start of the sweep and is refreshed on return.
inline void sweep_masked(const IsingModel& model, SpinState& state, SpinState& snapshot, const ErrorMask& mask,
                         double beta, NodeRngs& rngs) {
  model.check_state(state);
  const double bs = beta * model.weight_scale;
  for (int i = 0; i < model.n; ++i) {
    if (model.is_clamped(i)) continue;
    const int64_t f = mask.kind == MaskKind::single ? field_single_mask_int(model, state, mask, i)
                                                    : field_double_mask_int(model, state, snapshot, mask, i);
    const double t = detail::activation_threshold(model.rep, bs, f);
    state[i] = detail::spin_for(model.rep, t - rngs.next_pm1(i) >= 0.0);
  }
  if (mask.kind == MaskKind::double_) snapshot = state;
}

// ---------------------------------------------------------------------------
// Kullback-Leibler divergence

/// KL(p || q) = sum p log(p/q), natural log. With eps > 0 both distributions
/// get add-epsilon smoothing before comparison (used for empirical
/// histograms, eps = 1/(10*samples) by convention).
inline double kl_divergence(const std::vector<double>& p, const std::vector<double>& q, double eps = 0.0) {
  if (p.size() != q.size()) throw std::invalid_argument("KL needs equal supports");
  double kl = 0.0;
  const double k = static_cast<double>(p.size());
  for (size_t s = 0; s < p.size(); ++s) {
    const double ps = (p[s] + eps) / (1.0 + eps * k);
    const double qs = (q[s] + eps) / (1.0 + eps * k);
    if (ps > 0.0) {
      if (qs <= 0.0) throw std::invalid_argument("KL undefined: q vanishes where p does not");
      kl += ps * std::log(ps / qs);
    }
  }
  return std::max(kl, 0.0);
}

inline double kl_divergence(const Distribution& p, const Distribution& q, double eps = 0.0) {
  return kl_divergence(p.p, q.p, eps);
}

// ---------------------------------------------------------------------------
// Fully parallel update: exact stationary distribution
// p(m) ~ prod_i cosh(beta*[sum_j J_ij m_j + h_i]) * exp(beta m_i h_i),
// the product running over the free nodes.

inline Distribution parallel_analytical(const IsingModel& model, double beta) {
  Distribution d;
  d.nodes = model.free_nodes();
  d.p.assign(size_t{1} << d.nodes.size(), 0.0);
  std::vector<double> logw(d.p.size());
  double maxlog = -1e300;
  for_each_free_state(model, [&](size_t idx, const SpinState& s) {
    double lw = 0.0;
    for (int i : d.nodes) {
      const double field = model.weight_scale * static_cast<double>(model.local_field_int(s, i));
      const double hb = model.weight_scale * static_cast<double>(model.h[static_cast<size_t>(i)]);
      // log cosh without overflow
      const double x = std::abs(beta * field);
      lw += x + std::log1p(std::exp(-2.0 * x)) - std::log(2.0);
      lw += beta * static_cast<double>(s[i]) * hb;
    }
    logw[idx] = lw;
    maxlog = std::max(maxlog, lw);
  });
  double z = 0.0;
  for (size_t s = 0; s < logw.size(); ++s) {
    d.p[s] = std::exp(logw[s] - maxlog);
    z += d.p[s];
  }
  for (double& q : d.p) q /= z;
  return d;
}

// ---------------------------------------------------------------------------
// Random-mask experiment: for each error fraction on the grid, average the
// empirical distribution over random masks and compare with the exact
// Boltzmann distribution.

struct MaskCurvePoint {
  int failing;        // failing directed entries
  double er;          // failing / total
  double mean_kl;     // KL(averaged empirical distribution || exact)
  double std_kl;      // std of per-mask KLs
  int n_masks;
};

struct MaskExperimentConfig {
  MaskKind kind = MaskKind::double_;
  double beta = 1.0;
  int masks_per_er = 400;
  int64_t samples_per_mask = 20'000;
  uint64_t seed = 1;
  int threads = 1;
  RngKind rng = RngKind::counter;
};

/// Runs the grid 0..total_entries (all error fractions) unless a subset is
/// given. The model must be small enough for the exact reference.
inline std::vector<MaskCurvePoint> mask_experiment(const IsingModel& model, const MaskExperimentConfig& cfg,
                                                   std::vector<int> grid = {}) {
  const Distribution exact = boltzmann_exact(model, cfg.beta);
  const int total = [&] {
    int t = 0;
    for (int i = 0; i < model.n; ++i) t += model.degree(i);
    return t;
  }();
  if (grid.empty()) {
    grid.resize(static_cast<size_t>(total) + 1);
    std::iota(grid.begin(), grid.end(), 0);
  }

  std::vector<MaskCurvePoint> curve;
  for (int failing : grid) {
    std::vector<double> mask_kl(static_cast<size_t>(cfg.masks_per_er), 0.0);
    std::vector<std::vector<double>> partial_hist(static_cast<size_t>(std::max(cfg.threads, 1)),
                                                  std::vector<double>(exact.p.size(), 0.0));
    auto run_range = [&](int tid, int lo, int hi) {
      for (int mi = lo; mi < hi; ++mi) {
        const uint64_t mask_seed = mix_seed(cfg.seed, (static_cast<uint64_t>(failing) << 32) | static_cast<uint64_t>(mi));
        ErrorMask mask = random_mask(model, cfg.kind, failing, mask_seed);
        NodeRngs rngs(cfg.rng, mix_seed(mask_seed, 0xC0FFEEull), model.n);
        SpinState state = model.make_state(down_value(model.rep));
        for (int i : exact.nodes) state[i] = detail::spin_for(model.rep, rngs.next_u01(i) < 0.5);
        SpinState snapshot = state;
        std::vector<double> hist(exact.p.size(), 0.0);
        for (int64_t s = 0; s < cfg.samples_per_mask; ++s) {
          sweep_masked(model, state, snapshot, mask, cfg.beta, rngs);
          hist[state_index(state, exact.nodes)] += 1.0;
        }
        double norm = static_cast<double>(cfg.samples_per_mask);
        std::vector<double> p(hist.size());
        for (size_t s = 0; s < hist.size(); ++s) p[s] = hist[s] / norm;
        mask_kl[static_cast<size_t>(mi)] = kl_divergence(p, exact.p, 1.0 / (10.0 * norm));
        for (size_t s = 0; s < hist.size(); ++s) partial_hist[static_cast<size_t>(tid)][s] += hist[s];
      }
    };
    const int nthreads = std::max(1, cfg.threads);
    if (nthreads == 1) {
      run_range(0, 0, cfg.masks_per_er);
    } else {
      std::vector<std::thread> pool;
      const int per = (cfg.masks_per_er + nthreads - 1) / nthreads;
      for (int t = 0; t < nthreads; ++t)
        pool.emplace_back(run_range, t, t * per, std::min(cfg.masks_per_er, (t + 1) * per));
      for (auto& th : pool) th.join();
    }

    std::vector<double> avg(exact.p.size(), 0.0);
    double total_samples = 0.0;
    for (const auto& part : partial_hist)
      for (size_t s = 0; s < avg.size(); ++s) {
        avg[s] += part[s];
        total_samples += part[s];
      }
    for (double& a : avg) a /= total_samples;
    double mean_of_kl = 0.0, var = 0.0;
    for (double v : mask_kl) mean_of_kl += v;
    mean_of_kl /= static_cast<double>(cfg.masks_per_er);
    for (double v : mask_kl) var += (v - mean_of_kl) * (v - mean_of_kl);
    var /= std::max(1, cfg.masks_per_er - 1);

    MaskCurvePoint pt;
    pt.failing = failing;
    pt.er = total == 0 ? 0.0 : static_cast<double>(failing) / static_cast<double>(total);
    pt.mean_kl = kl_divergence(avg, exact.p, 1.0 / (10.0 * total_samples));
    pt.std_kl = std::sqrt(var);
    pt.n_masks = cfg.masks_per_er;
    curve.push_back(pt);
  }
  return curve;
}

inline void write_kl_csv(const std::vector<MaskCurvePoint>& curve, MaskKind kind, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "Er,kind,mean_KL,std_KL,n_masks\n";
  for (const auto& pt : curve)
    out << pt.er << ',' << mask_name(kind) << ',' << pt.mean_kl << ',' << pt.std_kl << ',' << pt.n_masks << '\n';
}

}  // namespace spim

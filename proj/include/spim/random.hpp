#pragma once

// Random number generation. Two per-node stream flavors mirror the hardware
// and a statistical default:
//  - Lfsr32: the 32-bit Fibonacci linear-feedback shift register with taps
//    [32, 22, 2, 1] (maximal length), one per p-bit.
//  - counter-based SplitMix64 streams keyed by (seed, node), the default.
// Per-node streams make trajectories independent of within-block update
// order and of the thread count.

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace spim {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ (0x9E3779B97F4A7C15ull * (stream + 1)));
}

/// Fibonacci LFSR over the polynomial with the given taps (1-based bit
/// positions, tap N = register width). State must never be zero.
template <int Width>
struct Lfsr {
  static_assert(Width >= 2 && Width <= 32);
  uint32_t state = 1;

  explicit Lfsr(uint32_t seed, std::initializer_list<int> taps) : state(seed) {
    if (seed == 0) throw std::invalid_argument("LFSR seed must be nonzero");
    if ((Width < 32) && (seed >> Width)) throw std::invalid_argument("LFSR seed exceeds register width");
    tap_mask_ = 0;
    for (int t : taps) tap_mask_ |= 1u << (t - 1);
  }

  uint32_t next() {
    uint32_t fb = state & tap_mask_;
    fb ^= fb >> 16;
    fb ^= fb >> 8;
    fb ^= fb >> 4;
    fb ^= fb >> 2;
    fb ^= fb >> 1;
    fb &= 1u;
    state = ((state << 1) | fb) & (Width == 32 ? 0xFFFFFFFFu : ((1u << Width) - 1));
    return state;
  }

 private:
  uint32_t tap_mask_ = 0;
};

/// The hardware RNG: 32-bit LFSR, taps [32, 22, 2, 1].
struct Lfsr32 {
  uint32_t state;

  explicit Lfsr32(uint32_t seed) : state(seed) {
    if (seed == 0) throw std::invalid_argument("LFSR seed must be nonzero");
  }

  uint32_t next() {
    const uint32_t fb = ((state >> 31) ^ (state >> 21) ^ (state >> 1) ^ state) & 1u;
    state = (state << 1) | fb;
    return state;
  }

  /// state / 2^32 in [0,1) -- never exactly 0 since the state is nonzero.
  double next_u01() { return static_cast<double>(next()) * 0x1p-32; }
};

enum class RngKind : uint8_t { counter, lfsr32 };

inline const char* rng_name(RngKind k) { return k == RngKind::counter ? "counter" : "lfsr32"; }

inline RngKind rng_from_name(const std::string& s) {
  if (s == "counter") return RngKind::counter;
  if (s == "lfsr32") return RngKind::lfsr32;
  throw std::invalid_argument("unknown rng kind: " + s);
}

/// One independent stream per node, seeded from a 64-bit mix of the global
/// seed and the node index.
class NodeRngs {
 public:
  NodeRngs(RngKind kind, uint64_t seed, int nodes) : kind_(kind) {
    if (kind_ == RngKind::counter) {
      keys_.resize(static_cast<size_t>(nodes));
      ctr_.assign(static_cast<size_t>(nodes), 0);
      for (int i = 0; i < nodes; ++i) keys_[static_cast<size_t>(i)] = mix_seed(seed, static_cast<uint64_t>(i));
    } else {
      lfsr_.reserve(static_cast<size_t>(nodes));
      for (int i = 0; i < nodes; ++i) {
        uint64_t s = mix_seed(seed, static_cast<uint64_t>(i));
        uint32_t st = static_cast<uint32_t>(s);
        while (st == 0) {
          s = splitmix64(s);
          st = static_cast<uint32_t>(s);
        }
        lfsr_.emplace_back(st);
      }
    }
  }

  double next_u01(int node) {
    if (kind_ == RngKind::counter) {
      const uint64_t z = splitmix64(keys_[static_cast<size_t>(node)] + 0x9E3779B97F4A7C15ull * ++ctr_[static_cast<size_t>(node)]);
      return static_cast<double>(z >> 11) * 0x1p-53;
    }
    return lfsr_[static_cast<size_t>(node)].next_u01();
  }

  /// Uniform on (-1, 1), the comparator input of the p-bit update rule.
  double next_pm1(int node) { return 2.0 * next_u01(node) - 1.0; }

 private:
  RngKind kind_;
  std::vector<uint64_t> keys_;
  std::vector<uint64_t> ctr_;
  std::vector<Lfsr32> lfsr_;
};

}  // namespace spim

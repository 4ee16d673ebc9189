#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace statecap::rng {

/// SplitMix64 finalizer. Used to turn loosely structured inputs (master seed,
/// tag hash, index) into well-mixed 64-bit values for seeding substreams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Deterministic substream seed derivation. Every randomized component
/// (solver restart, simulation trial, codebook row) owns a seed derived from
/// the master seed, a role tag and an index, so results do not depend on
/// evaluation order or worker count.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t index = 0) {
  std::uint64_t h = splitmix64(master ^ fnv1a(tag));
  return splitmix64(h ^ (index * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
}

/// Thin wrapper over std::mt19937_64 that owns all sampling used by the
/// library. std::random distributions are implementation-defined, so the
/// samplers here are written out explicitly; given the same seed the draw
/// sequence is identical on every platform.
class Engine {
 public:
  explicit Engine(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). n must be >= 1.
  int uniform_int(int n) {
    return static_cast<int>(gen_() % static_cast<std::uint64_t>(n));
  }

  /// Sample an index from an (unnormalized is not allowed) pmf by cumulative
  /// walk. Cells with zero mass are never returned.
  int categorical(std::span<const double> pmf) {
    double u = uniform01();
    double acc = 0.0;
    int last_live = 0;
    for (int i = 0; i < static_cast<int>(pmf.size()); ++i) {
      if (pmf[i] <= 0.0) continue;
      last_live = i;
      acc += pmf[i];
      if (u < acc) return i;
    }
    return last_live;
  }

  /// Dirichlet(1,...,1) draw: exponentials normalized to the simplex.
  std::vector<double> dirichlet(int dims) {
    std::vector<double> v(dims);
    double total = 0.0;
    for (auto& x : v) {
      double u = uniform01();
      x = -std::log(1.0 - u);
      total += x;
    }
    for (auto& x : v) x /= total;
    return v;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace statecap::rng

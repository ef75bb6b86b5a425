// Seedable deterministic random number generation.
//
// The generator algorithm is fixed so that seeded runs replay identically:
//   * uniform bits come from std::mt19937_64, whose output sequence is
//     specified exactly by the C++ standard;
//   * uniform doubles in [0, 1) take the top 53 bits of one 64-bit draw;
//   * normal deviates use the Marsaglia polar transform of uniform pairs,
//     with the spare deviate cached between calls;
//   * bounded integers use the multiply-shift reduction of one draw;
//   * child generators derive their seed by splitmix64-mixing the parent
//     seed with the child index.
// A SeededRng instance is single-owner: never share one across threads.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cryptolab/core/errors.hpp"

namespace cryptolab {

class SeededRng {
public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw ParameterError("next_below: bound must be positive");
    const unsigned __int128 wide = static_cast<unsigned __int128>(engine_()) * n;
    return static_cast<std::uint64_t>(wide >> 64);
  }

  // One normal deviate with the given mean and standard deviation.
  double gaussian(double mean, double std_dev) {
    if (std_dev < 0.0 || !std::isfinite(std_dev)) {
      throw ParameterError("gaussian: standard deviation must be finite and >= 0");
    }
    return mean + std_dev * standard_normal();
  }

  std::vector<double> gaussian_draws(double mean, double std_dev, std::size_t n) {
    if (std_dev < 0.0 || !std::isfinite(std_dev)) {
      throw ParameterError("gaussian_draws: standard deviation must be finite and >= 0");
    }
    std::vector<double> out(n);
    for (auto& v : out) v = mean + std_dev * standard_normal();
    return out;
  }

  // Child generator seeded from (parent seed, index); used for per-path
  // streams in ensemble simulations.
  SeededRng derive(std::uint64_t index) const {
    return SeededRng(splitmix64(seed_ + 0x9e3779b97f4a7c15ULL * (index + 1)));
  }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

private:
  double standard_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cryptolab

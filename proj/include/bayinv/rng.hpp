#pragma once

#include "bayinv/types.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace bayinv {

/// Seeded random stream with platform-independent output.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard; conversions to real numbers are done here rather than through
/// <random> distributions, whose algorithms are implementation-defined.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for (seed, stream) pairs, e.g. one per chain or restart.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id)
  {
    return Rng(mix(mix(seed) ^ mix(stream_id + 0x9e3779b97f4a7c15ULL)));
  }

  /// Deterministic child seed for a named stage (e.g. one per pipeline step).
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag)
  {
    return mix(mix(seed) + mix(tag ^ 0xd1b54a32d192ed03ULL));
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform point in a box.
  Vector uniform(const Box& box)
  {
    Vector x(box.dim());
    for (std::size_t i = 0; i < box.dim(); ++i)
      x[i] = uniform(box[i].lower, box[i].upper);
    return x;
  }

  /// Standard normal via Box-Muller; the spare value is cached.
  double normal()
  {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n)
  {
    // rejection sampling keeps the result unbiased
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = 0;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  template <class T>
  void shuffle(std::vector<T>& v)
  {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[below(i)]);
  }

private:
  static std::uint64_t mix(std::uint64_t z)
  {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace bayinv

#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random streams. Every draw is a pure function of
// (seed, index), so parallel consumers get identical numbers no matter how
// work is scheduled across threads.

namespace fpt {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// draw #index of stream `seed`
inline std::uint64_t stream_draw(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ull));
}

// uniform in [0,1), full 53-bit mantissa
inline double uniform01(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>(stream_draw(seed, index) >> 11) * 0x1.0p-53;
}

// Sequential convenience wrapper over the counter stream. Box-Muller for
// normals; the sine partner is discarded to keep the counter arithmetic
// trivial (two uniforms per normal).
struct counter_rng {
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;

  explicit counter_rng(std::uint64_t s) : seed(s) {}

  double next_uniform() { return uniform01(seed, counter++); }

  double next_normal() {
    const double a = next_uniform();  // in [0,1); 1-a in (0,1] keeps log finite
    const double b = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(1.0 - a));
    return r * std::cos(6.283185307179586476925286766559 * b);
  }

  // uniform in [lo, hi)
  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_uniform(); }
};

// derive an independent child seed (e.g. per trial, per sample)
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) {
  return splitmix64(master ^ (salt * 0x9e3779b97f4a7c15ull + 0x243f6a8885a308d3ull));
}

}  // namespace fpt

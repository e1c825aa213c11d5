#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace earshot {

// Deterministic RNG used everywhere in the pipeline. mt19937_64 output is
// pinned by the C++ standard, and the distribution transforms below are
// written out explicitly so sampled values are identical across standard
// library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t u64() { return eng_(); }

  // Uniform in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  uint64_t uniform_int(uint64_t n) {
    // Rejection sampling to avoid modulo bias.
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

  double normal(double mu = 0.0, double sigma = 1.0) {
    // Box-Muller, no cached spare (keeps the stream position predictable).
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mu + sigma * r * std::cos(2.0 * M_PI * u2);
  }

  double exponential(double mean) {
    double u = uniform();
    while (u >= 1.0) u = uniform();
    return -mean * std::log1p(-u);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Index sampled according to non-negative weights.
  size_t weighted(const std::vector<double>& w) {
    double total = 0.0;
    for (double x : w) total += x;
    double u = uniform() * total;
    double acc = 0.0;
    for (size_t i = 0; i + 1 < w.size(); ++i) {
      acc += w[i];
      if (u < acc) return i;
    }
    return w.empty() ? 0 : w.size() - 1;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = uniform_int(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

// Derives an independent stream seed from a base seed and a tag path.
// FNV-1a over the arguments; collision-free enough for stream separation.
inline uint64_t derive_seed(uint64_t base) { return base; }

template <typename... Rest>
inline uint64_t derive_seed(uint64_t base, uint64_t tag, Rest... rest) {
  uint64_t h = base ^ 0xcbf29ce484222325ull;
  for (int i = 0; i < 8; ++i) {
    h ^= (tag >> (8 * i)) & 0xff;
    h *= 0x100000001b3ull;
  }
  return derive_seed(h, static_cast<uint64_t>(rest)...);
}

}  // namespace earshot

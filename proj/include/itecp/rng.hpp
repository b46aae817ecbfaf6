#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace itecp {

// Derives an independent stream seed from (base, stream). splitmix64 finalizer;
// the +1 keeps stream 0 from collapsing to the base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double norm_ppf(double p);

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// mt19937_64 with hand-rolled transforms. The engine output sequence is fully
// specified by the standard; std::*_distribution is not, so every draw here is
// derived from raw engine words to keep results identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on the open interval (0,1); 53-bit resolution.
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return norm_ppf(uniform()); }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n), rejection sampling to avoid modulo bias.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (-n) % n;
    for (;;) {
      std::uint64_t r = gen_();
      if (r >= threshold) return r % n;
    }
  }

 private:
  std::mt19937_64 gen_;
};

// Fisher-Yates permutation of 0..n-1.
inline std::vector<int> shuffled_indices(int n, Rng& rng) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = n - 1; i > 0; --i) {
    int j = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(i) + 1));
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

}  // namespace itecp

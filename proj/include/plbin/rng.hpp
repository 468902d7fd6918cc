#pragma once

#include <cstdint>
#include <random>

namespace plbin {

struct RngSeed {
  std::uint64_t value = 0;
};

// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Child seed for work item `index` of stream `stream`. Depends only on its
// arguments, so replicate seeds are independent of execution order.
constexpr RngSeed derive_seed(RngSeed master, std::uint64_t stream, std::uint64_t index) {
  return RngSeed{mix64(mix64(master.value ^ mix64(stream)) + index)};
}

// Seed drawn from the OS entropy source, for runs without an explicit seed.
RngSeed fresh_seed();

class Rng {
public:
  explicit Rng(RngSeed seed) : engine_(mix64(seed.value)) {}

  // Uniform on (0, 1]; never returns 0 so U^(-1/alpha) and ln U are finite.
  double uniform_pos() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  double normal(double mean, double sd) { return mean + sd * std_normal_(engine_); }

  std::uint64_t binomial(std::uint64_t trials, double p) {
    if (trials == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return trials;
    return std::binomial_distribution<std::uint64_t>(trials, p)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> std_normal_{0.0, 1.0};
};

} // namespace plbin

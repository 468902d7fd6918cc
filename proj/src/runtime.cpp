#include <cstdlib>
#include <random>
#include <string>
#include <thread>

#include "plbin/parallel.hpp"
#include "plbin/rng.hpp"

namespace plbin {

RngSeed fresh_seed() {
  std::random_device rd;
  const std::uint64_t hi = rd();
  const std::uint64_t lo = rd();
  return RngSeed{(hi << 32) ^ lo};
}

unsigned default_threads() {
  if (const char* env = std::getenv("PLBIN_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

} // namespace plbin

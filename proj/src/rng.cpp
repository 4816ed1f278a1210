#include "mbl/rng.hpp"

#include <cmath>

namespace mbl {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream_id, std::uint64_t realization) {
  return splitmix64(splitmix64(master ^ (0x9E3779B97F4A7C15ULL * (stream_id + 1))) + realization);
}

double RandomStream::normal() {
  // Box–Muller; u1 in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace mbl

#pragma once

#include <cstdint>
#include <random>

namespace mbl {

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based stream derivation:
///   seed(master, stream, r) = splitmix64(splitmix64(master ^ (0x9E3779B97F4A7C15 * (stream + 1))) + r)
/// Disorder fields and Bernoulli masks use disjoint stream ids, so they are independent families.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream_id, std::uint64_t realization);

/// mt19937_64 with a portable uniform mapping (top 53 bits), so draws are bit-identical across standard libraries.
class RandomStream {
 public:
  RandomStream(std::uint64_t master, std::uint64_t stream_id, std::uint64_t realization)
      : gen_(stream_seed(master, stream_id, realization)) {}
  explicit RandomStream(std::uint64_t raw_seed) : gen_(raw_seed) {}

  std::uint64_t next() { return gen_(); }
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }
  double normal();

 private:
  std::mt19937_64 gen_;
};

}  // namespace mbl

#ifndef COPER_CORE_RNG_HPP
#define COPER_CORE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace coper {

// Counter-based splittable generator (splitmix64 core). derive() produces an
// independent stream from a tag, so per-view / per-epoch noise streams do not
// interfere under a single experiment seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix(seed ^ 0x5851f42d4c957f2dULL)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  Rng derive(std::uint64_t tag) const {
    return Rng(mix(state_ ^ mix(tag + 0x632be59bd9b4e019ULL)));
  }

  // [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Box-Muller, cosine branch only (stateless across calls).
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Uniform integer in [0, n). Modulo bias is ~n/2^64, irrelevant here.
  std::uint64_t below(std::uint64_t n) { return n <= 1 ? 0 : next_u64() % n; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace coper

#endif

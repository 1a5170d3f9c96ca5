#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace rollsim {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed of the stream addressed by `path` below `master`. Replica k of a
/// Monte Carlo run uses derive_seed(master, {k}), so results do not depend on
/// which worker ran the replica.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t s = splitmix64(master);
  for (auto k : path) s = splitmix64(s ^ splitmix64(k + 0x632BE59BD9B4E019ull));
  return s;
}

class Rng {
 public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Independent child generator for sub-stream `k`.
  Rng split(std::uint64_t k) const { return Rng(derive_seed(seed_of_engine(), {k})); }

  double normal() { return normal_(engine_); }
  /// Uniform on the open interval (0, 1).
  double uniform() {
    double u;
    do {
      u = std::generate_canonical<double, 53>(engine_);
    } while (u <= 0.0);
    return u;
  }
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  engine_type& engine() { return engine_; }

 private:
  std::uint64_t seed_of_engine() const {
    engine_type copy = engine_;
    return copy();
  }

  engine_type engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace rollsim

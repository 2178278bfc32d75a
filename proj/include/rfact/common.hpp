#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string_view>
#include <type_traits>

namespace rfact {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// 64-bit FNV-1a. Backs layout fingerprints and model-file checksums, so it
// must produce the same digest on every build; std::hash gives no such
// guarantee.
class Fnv1a {
 public:
  void update(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      state_ ^= static_cast<std::uint64_t>(p[i]);
      state_ *= 0x100000001b3ULL;
    }
  }
  void update(std::string_view s) {
    update_value<std::uint64_t>(s.size());
    update(s.data(), s.size());
  }
  template <typename T>
    requires std::is_arithmetic_v<T>
  void update_value(T v) {
    update(&v, sizeof(v));
  }
  [[nodiscard]] std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

// Deterministic random source (splitmix64 core, explicit Box-Muller normals).
// The std <random> distributions are implementation-defined, which would
// break the byte-reproducibility contract of seeded runs; these samplers are
// pinned down to the bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive.
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  // Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

 private:
  std::uint64_t state_;
};

// Mixes a master seed with stream indices so that parallel and serial
// generation orders agree.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  Fnv1a h;
  h.update_value(master);
  h.update_value(a);
  h.update_value(b);
  h.update_value(c);
  return h.digest();
}

}  // namespace rfact

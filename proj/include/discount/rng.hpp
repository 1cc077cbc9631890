#pragma once

#include "discount/types.hpp"

#include <cstdint>
#include <random>

namespace discount {

/// Seedable random source. All randomness in the library flows through an
/// explicit Rng instance; there is no global generator. The uniform and
/// normal transforms are implemented on top of the raw 64-bit stream so that
/// sequences are reproducible independently of the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on (0, 1].
  double uniform() {
    return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller.
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang squeeze.
  double gamma(double shape);

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

  /// Uniform integer in [0, bound) without modulo bias.
  std::uint64_t below(std::uint64_t bound);

  Vector normal_vector(Index n);
  Matrix normal_matrix(Index rows, Index cols);

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace discount

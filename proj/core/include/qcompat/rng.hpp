#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace qcompat {

// Deterministic random stream. std::normal_distribution is implementation
// defined, so the Gaussian is generated explicitly (Box-Muller) to keep
// results identical across standard libraries for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Derives an independent deterministic stream, e.g. one per restart.
  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    return Rng(seed * 0x9e3779b97f4a7c15ULL + stream + 1ULL);
  }

  double uniform() {  // [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t integer() { return engine_(); }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 1e-300);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  std::complex<double> complex_gaussian() {
    return {gaussian() / std::sqrt(2.0), gaussian() / std::sqrt(2.0)};
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qcompat

#ifndef ODECERT_RNG_HPP
#define ODECERT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace odecert {

// mt19937_64 output is fully specified by the standard; mapping the raw
// bits ourselves (instead of std::uniform_real_distribution, whose
// algorithm is implementation-defined) keeps every seeded run reproducible.

/// Uniform in [0, 1).
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Uniform strictly inside (0, 1); never returns an endpoint.
inline double uniform01_open(std::mt19937_64& g) {
  return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform strictly inside (a, b).
inline double uniform_open(std::mt19937_64& g, double a, double b) {
  return a + (b - a) * uniform01_open(g);
}

/// Standard normal via Box-Muller on open uniforms.
inline double normal01(std::mt19937_64& g) {
  const double u1 = uniform01_open(g);
  const double u2 = uniform01_open(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace odecert

#endif  // ODECERT_RNG_HPP

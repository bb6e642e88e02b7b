#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "cyf/grid.hpp"

namespace cyf::test {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Pointwise i.i.d. uniform noise; rough on purpose.
inline ScalarField noise(const Grid& grid, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  ScalarField u(grid);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = d(rng);
  return u;
}

inline VectorField noise_vector(const Grid& grid, std::uint64_t seed) {
  VectorField v(grid);
  for (int a = 0; a < grid.dims(); ++a) v[a] = noise(grid, seed * 31 + static_cast<std::uint64_t>(a));
  return v;
}

// Few low modes with random amplitudes and phases; smooth solver data.
inline ScalarField smooth(const Grid& grid, std::uint64_t seed, double amplitude, int modes = 2) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-amplitude, amplitude);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  ScalarField u(grid);
  for (int kx = 0; kx <= modes; ++kx) {
    for (int ky = (kx == 0 ? 1 : -modes); ky <= modes; ++ky) {
      const double a = amp(rng) / (kx * kx + ky * ky);
      const double p = phase(rng);
      u += ScalarField::from_function(grid, [&](std::span<const double> x) {
        const double y = x.size() > 1 ? x[1] : 0.0;
        return a * std::cos(kTwoPi * (kx * x[0] + ky * y) + p);
      });
    }
  }
  return u;
}

inline ScalarField sin_x(const Grid& grid) {
  return ScalarField::from_function(grid, [](std::span<const double> x) { return std::sin(kTwoPi * x[0]); });
}

// Exact eigenvalue of the compact second difference on sin(2 pi x) with N points.
inline double discrete_eigenvalue(int n) {
  const double h = 1.0 / n;
  return -(2.0 / (h * h)) * (1.0 - std::cos(kTwoPi * h));
}

}  // namespace cyf::test

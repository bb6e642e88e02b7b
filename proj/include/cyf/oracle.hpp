#pragma once

#include <Eigen/Dense>

#include "cyf/background.hpp"
#include "cyf/elliptic.hpp"

// Brute-force references for small grids. Everything here assembles explicit
// matrices from the stencil definitions and solves with dense factorizations;
// none of it goes through the spectral or Krylov paths it is used to check.
namespace cyf::oracle {

inline constexpr std::size_t kMaxPoints = 4096;

struct DenseOperator {
  std::size_t size = 0;
  Eigen::MatrixXd entries;

  ScalarField apply(const ScalarField& u) const;
};

/// Explicit matrix of chern_laplacian on bg's grid. Throws TooLarge above 4096 points.
DenseOperator dense_chern_laplacian(const Background& bg);

/// Zero-mean solution of chern_laplacian(f) = rhs via a bordered dense system.
ScalarField dense_solve_poisson(const Background& bg, const ScalarField& rhs);

/// (I - a laplacian) u = f by dense LU.
ScalarField dense_helmholtz(const ScalarField& f, double a);

/// Dense solve of apply_linearization(u, v, g) = rhs.
ScalarField dense_solve_linearized(const ScalarField& u, const ScalarField& g, const Background& bg,
                                   const ScalarField& rhs);

/// Damped Newton with dense LU steps; same contract as newton_solve.
SolveOutcome dense_solve_elliptic(const ScalarField& g, const Background& bg, const ScalarField& u0,
                                  const NewtonParams& params = {});

/// (energy(u + eps phi) - energy(u - eps phi)) / (2 eps), eps in [1e-8, 1e-4].
double fd_energy_gradient(const ScalarField& u, const ScalarField& g, const Background& bg,
                          const ScalarField& phi, double eps);

}  // namespace cyf::oracle

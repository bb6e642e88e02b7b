#pragma once

#include <functional>

#include "cyf/grid.hpp"

namespace cyf {

using LinearMap = std::function<ScalarField(const ScalarField&)>;

struct GmresOptions {
  double relative_tol = 1e-12;
  int restart = 60;
  int max_iterations = 1200;
};

struct GmresResult {
  bool converged = false;
  int iterations = 0;
  double relative_residual = 0.0;  // true residual, Euclidean, relative to |b|
};

/// Restarted GMRES with right preconditioning: solves op(x) = b using
/// precond as an approximate inverse. x holds the initial guess on entry.
GmresResult gmres(const LinearMap& op, const LinearMap& precond, const ScalarField& b,
                  ScalarField& x, const GmresOptions& options = {});

}  // namespace cyf

#pragma once

#include "cyf/grid.hpp"

namespace cyf {

/// Reference data of the conformal class: curvature s0 of the unit-volume
/// Gauduchon metric, its (divergence-free) Lee vector field theta, and the
/// complex dimension n. Immutable after construction.
class Background {
 public:
  /// Projects theta_raw onto divergence-free fields (theta = theta_raw - grad p
  /// with laplacian p = div theta_raw). Throws ProjectionFailure when the
  /// projected divergence exceeds 1e-8, InvalidArgument when n < 2.
  static Background make(int n, ScalarField s0, VectorField theta_raw);
  /// Balanced background (theta = 0).
  static Background balanced(int n, ScalarField s0);

  const Grid& grid() const { return s0_.grid(); }
  int n() const { return n_; }
  const ScalarField& s0() const { return s0_; }
  const VectorField& theta() const { return theta_; }
  double gamma() const { return gamma_; }
  bool is_balanced() const { return balanced_; }

 private:
  Background(int n, ScalarField s0, VectorField theta);

  int n_;
  ScalarField s0_;
  VectorField theta_;
  double gamma_;
  bool balanced_;
};

/// Gauduchon degree: integral of s0.
double gauduchon_degree(const Background& bg);

/// laplacian(u) - advect(u, theta).
ScalarField chern_laplacian(const ScalarField& u, const Background& bg);

/// Throws Overflow when 2 sup|u| / n > 700, the range of exp().
void check_exp_range(const ScalarField& u, int n);

/// exp(2u/n), pointwise, after the range check.
ScalarField conformal_factor(const ScalarField& u, int n);

/// Curvature of the conformally changed metric: e^{-2u/n} (-chern_laplacian(u) + s0).
ScalarField conformal_curvature(const ScalarField& u, const Background& bg);

}  // namespace cyf

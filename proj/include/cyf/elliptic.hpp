#pragma once

#include <optional>
#include <string>

#include "cyf/background.hpp"

namespace cyf {

struct NewtonParams {
  double tol_residual = 1e-10;  // sup-norm
  int max_iter = 50;
  double damping = 0.5;  // backtracking factor
  int max_halvings = 20;
  double linear_tol = 1e-12;  // relative Euclidean residual of each linear solve
};

enum class SolveStatus { Converged, Diverged };
enum class DivergeReason { None, MaxIter, NearSingular, LineSearchStall, Overflow };

std::string_view to_string(SolveStatus status);
std::string_view to_string(DivergeReason reason);

struct SolveOutcome {
  SolveStatus status = SolveStatus::Diverged;
  DivergeReason reason = DivergeReason::None;
  std::optional<ScalarField> u;  // present when Converged
  double residual_sup = 0.0;
  int iterations = 0;
  std::string message;

  bool converged() const { return status == SolveStatus::Converged; }
};

/// Zero-mean f with chern_laplacian(f) = rhs. Spectral when theta = 0, else
/// GMRES preconditioned by the spectral inverse Laplacian.
/// Throws NonZeroMean if |integrate(rhs)| > 1e-10, SolverFailure on stall.
ScalarField solve_poisson(const Background& bg, const ScalarField& rhs);

/// F(u) = -chern_laplacian(u) + s0 - g e^{2u/n}.
ScalarField residual(const ScalarField& u, const ScalarField& g, const Background& bg);

/// dF/du applied to v: -chern_laplacian(v) - (2/n) g e^{2u/n} v.
ScalarField apply_linearization(const ScalarField& u, const ScalarField& v, const ScalarField& g,
                                const Background& bg);

/// Solves apply_linearization(u, v, g) = rhs. Throws NearSingular when the
/// Krylov solve stalls or the solution norm exceeds 1e10 |rhs|.
ScalarField solve_linearized(const ScalarField& u, const ScalarField& g, const Background& bg,
                             const ScalarField& rhs, double linear_tol = 1e-12);

/// Damped Newton iteration on the residual. Never throws for solver failures;
/// they are reported through the outcome.
SolveOutcome newton_solve(const ScalarField& g, const Background& bg, const ScalarField& u_init,
                          const NewtonParams& params = {});

struct Subsolution {
  ScalarField phi;  // f - t0
  double t0 = 0.0;
  ScalarField f;  // zero-mean solution of chern_laplacian(f) = s0 - gamma
};

/// Constant-shift sub-solution phi = f - t0 with
/// t0 = |f|_sup + (n/2) ln(sup|g| / -gamma) + 1, verified pointwise.
/// Throws NotNegativeDegree if gamma >= 0, VerificationFailure if the strict
/// inequality F(phi) < 0 fails at some point.
Subsolution build_subsolution(const ScalarField& g, const Background& bg);

/// Newton solution for g0 + lambda1, a super-solution of the problem at
/// lambda < lambda1. Throws InvalidArgument unless lambda < lambda1.
SolveOutcome build_supersolution(const ScalarField& g0, double lambda, double lambda1,
                                 const Background& bg, const NewtonParams& params = {},
                                 const std::optional<ScalarField>& seed = std::nullopt);

}  // namespace cyf

#pragma once

#include <optional>

#include "cyf/background.hpp"
#include "cyf/elliptic.hpp"

namespace cyf {

/// I(u) = integral of |grad u|^2 + 2 s0 u - n g e^{2u/n}.
double energy(const ScalarField& u, const ScalarField& g, const Background& bg);

/// d/dt I(u + t phi) at t = 0.
double first_variation(const ScalarField& u, const ScalarField& phi, const ScalarField& g,
                       const Background& bg);

/// d^2/dt^2 I(u + t phi) at t = 0.
double second_variation(const ScalarField& u, const ScalarField& phi, const ScalarField& g,
                        const Background& bg);

struct DiagnosticSet {
  double energy = 0.0;
  double c0_over_l2 = 0.0;    // sup|u| / max(|u|_L2, 1)
  double integral_gap = 0.0;  // |gamma - integral of g e^{2u/n}|
  double exp_mass = 0.0;      // integral of e^{2u/n}
  double exp_grad = 0.0;      // integral of |grad e^{u/n}|^2
  double laplacian_l2 = 0.0;  // |laplacian u|_L2, a W^{2,2} proxy
  std::optional<double> lower_bound_slack;  // min(u - phi_t0) when a sub-solution exists
};

DiagnosticSet diagnostics(const ScalarField& u, const ScalarField& g, const Background& bg);

struct VariationalParams {
  double step = 0.5;        // pseudo-time of each preconditioned gradient step
  double tol = 1e-12;       // sup-norm change that ends the descent
  int max_iter = 20000;
  NewtonParams polish{};
};

/// Minimizes I over the order interval [lower, upper] by projected,
/// Helmholtz-preconditioned gradient descent started at `lower`, then polishes
/// the limit with Newton. Balanced backgrounds only (the flow is the
/// L2-gradient of I/2 there).
SolveOutcome minimize_in_order_interval(const ScalarField& g, const Background& bg,
                                        const ScalarField& lower, const ScalarField& upper,
                                        const VariationalParams& params = {});

}  // namespace cyf

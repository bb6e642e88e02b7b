#include "cyf/variational.hpp"

#include <algorithm>
#include <cmath>

namespace cyf {

double energy(const ScalarField& u, const ScalarField& g, const Background& bg) {
  require_same_grid(u.grid(), g.grid());
  const VectorField du = gradient(u);
  const ScalarField e = conformal_factor(u, bg.n());
  const double n = bg.n();
  ScalarField integrand(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) {
    integrand[i] = 2.0 * bg.s0()[i] * u[i] - n * g[i] * e[i];
  }
  return integrate(integrand) + integrate_dot(du, du);
}

double first_variation(const ScalarField& u, const ScalarField& phi, const ScalarField& g,
                       const Background& bg) {
  require_same_grid(u.grid(), phi.grid());
  const ScalarField e = conformal_factor(u, bg.n());
  ScalarField integrand(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) {
    integrand[i] = (bg.s0()[i] - g[i] * e[i]) * phi[i];
  }
  return 2.0 * (integrate_dot(gradient(u), gradient(phi)) + integrate(integrand));
}

double second_variation(const ScalarField& u, const ScalarField& phi, const ScalarField& g,
                        const Background& bg) {
  require_same_grid(u.grid(), phi.grid());
  const ScalarField e = conformal_factor(u, bg.n());
  ScalarField integrand(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) integrand[i] = g[i] * e[i] * phi[i] * phi[i];
  const VectorField dphi = gradient(phi);
  return 2.0 * integrate_dot(dphi, dphi) - (4.0 / bg.n()) * integrate(integrand);
}

DiagnosticSet diagnostics(const ScalarField& u, const ScalarField& g, const Background& bg) {
  DiagnosticSet d;
  d.energy = energy(u, g, bg);
  d.c0_over_l2 = sup_norm(u) / std::max(l2_norm(u), 1.0);
  const ScalarField e = conformal_factor(u, bg.n());
  d.integral_gap = std::abs(bg.gamma() - integrate(g * e));
  d.exp_mass = integrate(e);
  const double inv_n = 1.0 / bg.n();
  const VectorField de = gradient(map(u, [inv_n](double v) { return std::exp(inv_n * v); }));
  d.exp_grad = integrate_dot(de, de);
  d.laplacian_l2 = l2_norm(laplacian(u));
  if (bg.gamma() < 0.0) {
    try {
      const Subsolution sub = build_subsolution(g, bg);
      d.lower_bound_slack = (u - sub.phi).min();
    } catch (const Error&) {
      d.lower_bound_slack.reset();
    }
  }
  return d;
}

SolveOutcome minimize_in_order_interval(const ScalarField& g, const Background& bg,
                                        const ScalarField& lower, const ScalarField& upper,
                                        const VariationalParams& params) {
  if (!bg.is_balanced()) {
    throw Error(ErrorKind::InvalidArgument, "variational descent needs a balanced background");
  }
  require_same_grid(lower.grid(), upper.grid());
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (lower[i] > upper[i]) {
      throw Error(ErrorKind::InvalidArgument, "order interval is empty: lower > upper somewhere");
    }
  }
  const double k = 2.0 / bg.n();
  ScalarField u = lower;
  int it = 0;
  for (; it < params.max_iter; ++it) {
    const ScalarField e = conformal_factor(u, bg.n());
    double react = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) react = std::max(react, std::abs(k * g[i] * e[i]));
    const double tau = react > 0.0 ? std::min(params.step, 1.0 / react) : params.step;
    // Preconditioned descent step for I/2, whose L2-gradient is the residual.
    ScalarField rhs = u;
    for (std::size_t i = 0; i < u.size(); ++i) rhs[i] += tau * (g[i] * e[i] - bg.s0()[i]);
    ScalarField next = helmholtz_solve(rhs, tau);
    for (std::size_t i = 0; i < u.size(); ++i) next[i] = std::clamp(next[i], lower[i], upper[i]);
    const double change = sup_norm(next - u);
    u = std::move(next);
    if (change < params.tol) break;
  }
  SolveOutcome polished = newton_solve(g, bg, u, params.polish);
  polished.iterations += it;
  return polished;
}

}  // namespace cyf

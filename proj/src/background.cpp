#include "cyf/background.hpp"

#include <cmath>
#include <string>

#include "cyf/spectral.hpp"

namespace cyf {

Background::Background(int n, ScalarField s0, VectorField theta)
    : n_(n), s0_(std::move(s0)), theta_(std::move(theta)), gamma_(integrate(s0_)),
      balanced_(theta_.is_zero()) {}

Background Background::make(int n, ScalarField s0, VectorField theta_raw) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "complex dimension n must be >= 2");
  require_same_grid(s0.grid(), theta_raw.grid());
  require_finite(s0, "s0");
  if (!theta_raw.is_finite()) throw Error(ErrorKind::NonFinite, "theta has non-finite values");

  VectorField theta = theta_raw;
  if (!theta_raw.is_zero()) {
    const ScalarField p = spectral::inverse_laplacian(divergence(theta_raw));
    theta = theta_raw - gradient(p);
  }
  const double div = sup_norm(divergence(theta));
  if (div >= 1e-8) {
    throw Error(ErrorKind::ProjectionFailure,
                "divergence of projected theta is " + std::to_string(div));
  }
  return Background(n, std::move(s0), std::move(theta));
}

Background Background::balanced(int n, ScalarField s0) {
  VectorField zero(s0.grid());
  return make(n, std::move(s0), std::move(zero));
}

double gauduchon_degree(const Background& bg) { return integrate(bg.s0()); }

ScalarField chern_laplacian(const ScalarField& u, const Background& bg) {
  require_same_grid(u.grid(), bg.grid());
  if (bg.is_balanced()) return laplacian(u);
  return laplacian(u) - advect(u, bg.theta());
}

void check_exp_range(const ScalarField& u, int n) {
  const double m = sup_norm(u);
  if (!std::isfinite(m) || 2.0 * m / n > 700.0) {
    throw Error(ErrorKind::Overflow, "2 sup|u| / n = " + std::to_string(2.0 * m / n) +
                                         " exceeds the exponential range guard");
  }
}

ScalarField conformal_factor(const ScalarField& u, int n) {
  check_exp_range(u, n);
  const double k = 2.0 / n;
  return map(u, [k](double v) { return std::exp(k * v); });
}

ScalarField conformal_curvature(const ScalarField& u, const Background& bg) {
  check_exp_range(u, bg.n());
  const double k = -2.0 / bg.n();
  ScalarField out = bg.s0() - chern_laplacian(u, bg);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= std::exp(k * u[i]);
  return out;
}

}  // namespace cyf

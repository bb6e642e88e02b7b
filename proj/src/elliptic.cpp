#include "cyf/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cyf/krylov.hpp"
#include "cyf/spectral.hpp"

namespace cyf {

std::string_view to_string(SolveStatus status) {
  return status == SolveStatus::Converged ? "Converged" : "Diverged";
}

std::string_view to_string(DivergeReason reason) {
  switch (reason) {
    case DivergeReason::None: return "None";
    case DivergeReason::MaxIter: return "MaxIter";
    case DivergeReason::NearSingular: return "NearSingular";
    case DivergeReason::LineSearchStall: return "LineSearchStall";
    case DivergeReason::Overflow: return "Overflow";
  }
  return "Unknown";
}

namespace {

// GMRES can stagnate at the rounding floor; a relative residual below this is
// accepted as solved even when the requested tolerance was tighter.
constexpr double kRoundingFloor = 1e-8;

double euclidean_norm(const ScalarField& u) {
  double s = 0.0;
  for (double v : u.values()) s += v * v;
  return std::sqrt(s);
}

}  // namespace

ScalarField solve_poisson(const Background& bg, const ScalarField& rhs) {
  require_same_grid(rhs.grid(), bg.grid());
  require_finite(rhs, "poisson right-hand side");
  const double m = integrate(rhs);
  if (std::abs(m) > 1e-10) {
    throw Error(ErrorKind::NonZeroMean, "right-hand side has mean " + std::to_string(m));
  }
  const ScalarField b = rhs - m;
  if (bg.is_balanced()) return spectral::inverse_laplacian(b);

  ScalarField f(b.grid());
  const LinearMap op = [&bg](const ScalarField& v) { return chern_laplacian(v, bg); };
  const LinearMap precond = [](const ScalarField& v) { return spectral::inverse_laplacian(v); };
  GmresOptions options;
  const double b_norm = euclidean_norm(b);
  options.relative_tol = b_norm > 0.0 ? std::clamp(1e-11 / b_norm, 1e-14, 1e-12) : 1e-12;
  gmres(op, precond, b, f, options);
  f += -integrate(f);
  const double r = sup_norm(chern_laplacian(f, bg) - b);
  if (r > 1e-9 * std::max(1.0, sup_norm(b))) {
    throw Error(ErrorKind::SolverFailure, "poisson residual stalled at " + std::to_string(r));
  }
  return f;
}

ScalarField residual(const ScalarField& u, const ScalarField& g, const Background& bg) {
  require_same_grid(u.grid(), g.grid());
  ScalarField out = bg.s0() - chern_laplacian(u, bg);
  const ScalarField e = conformal_factor(u, bg.n());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= g[i] * e[i];
  return out;
}

ScalarField apply_linearization(const ScalarField& u, const ScalarField& v, const ScalarField& g,
                                const Background& bg) {
  require_same_grid(u.grid(), v.grid());
  require_same_grid(u.grid(), g.grid());
  ScalarField out = -chern_laplacian(v, bg);
  const ScalarField e = conformal_factor(u, bg.n());
  const double k = 2.0 / bg.n();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= k * g[i] * e[i] * v[i];
  return out;
}

ScalarField solve_linearized(const ScalarField& u, const ScalarField& g, const Background& bg,
                             const ScalarField& rhs, double linear_tol) {
  require_same_grid(u.grid(), rhs.grid());
  require_finite(rhs, "linearized right-hand side");
  const double k = 2.0 / bg.n();
  const ScalarField e = conformal_factor(u, bg.n());
  ScalarField potential(u.grid());  // -(2/n) g e^{2u/n}
  for (std::size_t i = 0; i < potential.size(); ++i) potential[i] = -k * g[i] * e[i];

  // Shift of the spectral preconditioner (c - laplacian): the mean potential
  // when it is positive, otherwise its mean magnitude.
  double shift = integrate(potential);
  if (shift <= 0.0) shift = integrate(map(potential, [](double p) { return std::abs(p); }));
  shift = std::max(shift, 1e-6);

  const LinearMap op = [&](const ScalarField& v) {
    ScalarField out = -chern_laplacian(v, bg);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += potential[i] * v[i];
    return out;
  };
  const LinearMap precond = [shift](const ScalarField& v) {
    return spectral::shifted_inverse(v, shift);
  };
  ScalarField v(u.grid());
  GmresOptions options;
  options.relative_tol = linear_tol;
  const GmresResult res = gmres(op, precond, rhs, v, options);
  if (!res.converged && !(res.relative_residual <= kRoundingFloor)) {
    throw Error(ErrorKind::NearSingular, "linearized solve stalled at relative residual " +
                                             std::to_string(res.relative_residual));
  }
  const double rhs_norm = euclidean_norm(rhs);
  if (!v.is_finite() || euclidean_norm(v) > 1e10 * rhs_norm) {
    throw Error(ErrorKind::NearSingular, "linearized operator is numerically singular");
  }
  return v;
}

SolveOutcome newton_solve(const ScalarField& g, const Background& bg, const ScalarField& u_init,
                          const NewtonParams& params) {
  SolveOutcome out;
  auto diverge = [&out](DivergeReason reason, std::string message) {
    out.status = SolveStatus::Diverged;
    out.reason = reason;
    out.message = std::move(message);
    out.u.reset();
    return out;
  };
  if (!u_init.is_finite()) return diverge(DivergeReason::Overflow, "initial guess not finite");

  ScalarField u = u_init;
  ScalarField F(u.grid());
  try {
    F = residual(u, g, bg);
  } catch (const Error& e) {
    return diverge(DivergeReason::Overflow, e.what());
  }
  double r = sup_norm(F);
  out.residual_sup = r;

  for (int it = 0;; ++it) {
    out.iterations = it;
    out.residual_sup = r;
    if (r <= params.tol_residual) {
      out.status = SolveStatus::Converged;
      out.reason = DivergeReason::None;
      out.u = std::move(u);
      return out;
    }
    if (it >= params.max_iter) {
      return diverge(DivergeReason::MaxIter, "no convergence after " + std::to_string(it) +
                                                 " iterations, residual " + std::to_string(r));
    }

    ScalarField step(u.grid());
    try {
      step = solve_linearized(u, g, bg, -F, params.linear_tol);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Overflow) return diverge(DivergeReason::Overflow, e.what());
      return diverge(DivergeReason::NearSingular, e.what());
    }

    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h <= params.max_halvings; ++h, alpha *= params.damping) {
      ScalarField trial = u + alpha * step;
      ScalarField F_trial(u.grid());
      try {
        F_trial = residual(trial, g, bg);
      } catch (const Error&) {
        continue;
      }
      const double r_trial = sup_norm(F_trial);
      if (r_trial < r) {
        u = std::move(trial);
        F = std::move(F_trial);
        r = r_trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      return diverge(DivergeReason::LineSearchStall,
                     "line search stalled at residual " + std::to_string(r));
    }
  }
}

Subsolution build_subsolution(const ScalarField& g, const Background& bg) {
  require_same_grid(g.grid(), bg.grid());
  const double gamma = gauduchon_degree(bg);
  if (!(gamma < 0.0)) {
    throw Error(ErrorKind::NotNegativeDegree, "Gauduchon degree " + std::to_string(gamma) + " >= 0");
  }
  ScalarField f = solve_poisson(bg, bg.s0() - gamma);
  const double f_sup = sup_norm(f);
  const double g_sup = sup_norm(g);
  const int n = bg.n();
  // Gamma + sup|g| e^{(2/n)(|f| - t0)} < 0 holds for any t0 beyond the log term.
  double t0 = f_sup + 1.0;
  if (g_sup > 0.0) t0 += 0.5 * n * std::log(g_sup / -gamma);

  ScalarField phi = f - t0;
  const ScalarField check = residual(phi, g, bg);
  const double worst = check.max();
  if (!(worst < 0.0)) {
    throw Error(ErrorKind::VerificationFailure,
                "sub-solution inequality fails, max residual " + std::to_string(worst));
  }
  return Subsolution{std::move(phi), t0, std::move(f)};
}

SolveOutcome build_supersolution(const ScalarField& g0, double lambda, double lambda1,
                                 const Background& bg, const NewtonParams& params,
                                 const std::optional<ScalarField>& seed) {
  if (!(lambda < lambda1)) {
    throw Error(ErrorKind::InvalidArgument, "super-solution needs lambda < lambda1");
  }
  const ScalarField g = g0 + lambda1;
  return newton_solve(g, bg, seed.value_or(ScalarField(g0.grid())), params);
}

}  // namespace cyf

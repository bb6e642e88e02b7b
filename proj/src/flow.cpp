#include "cyf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cyf/elliptic.hpp"

namespace cyf {

std::string_view to_string(FlowStatus status) {
  switch (status) {
    case FlowStatus::Converged: return "Converged";
    case FlowStatus::TimedOut: return "TimedOut";
    case FlowStatus::MonitorViolation: return "MonitorViolation";
    case FlowStatus::BlowUp: return "BlowUp";
  }
  return "Unknown";
}

ScalarField flow_velocity(const ScalarField& u, const ScalarField& g, const Background& bg) {
  return -residual(u, g, bg);
}

double flow_energy(const ScalarField& u, const ScalarField& g, const Background& bg) {
  const VectorField du = gradient(u);
  const ScalarField e = conformal_factor(u, bg.n());
  const double half_n = 0.5 * bg.n();
  ScalarField integrand(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) {
    integrand[i] = u[i] * bg.s0()[i] - half_n * (e[i] - 1.0) * g[i];
  }
  return integrate(integrand) + 0.5 * integrate_dot(du, du);
}

ScalarField step_imex(const ScalarField& u, double dt, const ScalarField& g, const Background& bg) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "time step must be positive");
  require_same_grid(u.grid(), g.grid());
  const ScalarField e = conformal_factor(u, bg.n());
  ScalarField explicit_part = u;
  for (std::size_t i = 0; i < u.size(); ++i) explicit_part[i] += dt * (g[i] * e[i] - bg.s0()[i]);
  if (!bg.is_balanced()) explicit_part -= dt * advect(u, bg.theta());
  return helmholtz_solve(explicit_part, dt);
}

namespace {

double l2_of(const ScalarField& u) { return l2_norm(u); }

FlowRecord make_record(double t, double dt, const ScalarField& u, const ScalarField& w,
                       const ScalarField& g, const Background& bg) {
  FlowRecord rec;
  rec.t = t;
  rec.dt = dt;
  rec.sup_u = sup_norm(u);
  rec.l2_u = l2_of(u);
  rec.sup_ut = sup_norm(w);
  rec.ut_sq = integrate(w * w);
  rec.energy = flow_energy(u, g, bg);
  rec.residual_sup = rec.sup_ut;
  return rec;
}

// Largest step keeping the explicit reaction monotone and the explicit drift
// stable against the implicit diffusion.
double stability_cap(const ScalarField& u, const ScalarField& g, const Background& bg) {
  const double k = 2.0 / bg.n();
  double react = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    react = std::max(react, std::abs(k * g[i] * std::exp(k * u[i])));
  }
  double cap = react > 0.0 ? 1.0 / react : std::numeric_limits<double>::infinity();
  if (!bg.is_balanced()) {
    const double th = sup_norm(bg.theta());
    cap = std::min(cap, 1.0 / (th * th));
  }
  return cap;
}

double pointwise_c1(const ScalarField& g, const Background& bg) {
  double c1 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    c1 = std::max(c1, std::abs(g[i]) + std::abs(bg.s0()[i]));
  }
  return c1;
}

}  // namespace

FlowResult run_flow_from(const ScalarField& u0, const ScalarField& g, const Background& bg,
                         const FlowParams& params) {
  if (!(params.dt_init > 0.0 && params.dt_init <= params.dt_max) || !(params.eps_stop > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "invalid flow parameters");
  }
  require_same_grid(u0.grid(), g.grid());
  require_same_grid(u0.grid(), bg.grid());

  FlowResult result{u0, {}, FlowStatus::TimedOut, {}, {}, {}, {}, std::nullopt, 0};
  ScalarField u = u0;
  ScalarField w = flow_velocity(u, g, bg);
  double t = 0.0;
  result.trace.records.push_back(make_record(t, 0.0, u, w, g, bg));

  const bool g_nonpositive = g.max() <= 0.0;
  const double c1 = pointwise_c1(g, bg);
  double dt = params.dt_init;
  long steps = 0;

  for (;;) {
    if (sup_norm(w) < params.eps_stop) {
      result.status = FlowStatus::Converged;
      break;
    }
    if (t >= params.t_max || steps >= params.max_steps) {
      result.status = FlowStatus::TimedOut;
      result.message = "stopped at t = " + std::to_string(t) + " with sup|u_t| = " +
                       std::to_string(sup_norm(w));
      break;
    }
    dt = std::min({dt, params.dt_max, stability_cap(u, g, bg)});
    if (dt < 1e-14) {
      result.status = FlowStatus::BlowUp;
      result.message = "time step underflow at t = " + std::to_string(t);
      break;
    }

    std::optional<ScalarField> next;
    std::optional<ScalarField> w_next;
    try {
      next = step_imex(u, dt, g, bg);
      w_next = flow_velocity(*next, g, bg);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Overflow && e.kind() != ErrorKind::SolverFailure &&
          e.kind() != ErrorKind::NonFinite) {
        throw;
      }
    }
    bool accept = next.has_value() && next->is_finite() && w_next->is_finite();
    if (accept && g_nonpositive && sup_norm(*w_next) > c1 * (1.0 + 1e-6)) accept = false;
    if (accept && params.defect_tol > 0.0) {
      const double w_l2 = l2_norm(w);
      const double indicator = w_l2 * l2_norm(*w_next - w);
      if (indicator > params.defect_tol * (1.0 + w_l2 * w_l2)) accept = false;
    }
    if (!accept) {
      ++result.rejected_steps;
      dt *= 0.5;
      continue;
    }

    t += dt;
    ++steps;
    u = std::move(*next);
    w = std::move(*w_next);
    result.trace.records.push_back(make_record(t, dt, u, w, g, bg));
    dt *= params.dt_growth;
  }
  result.u_final = u;

  if (params.monitors) {
    result.time_derivative = monitor_time_derivative_bound(result.trace, g, bg);
    if (g.max() < 0.0) {
      double sup_u = 0.0;
      for (const auto& r : result.trace.records) sup_u = std::max(sup_u, r.sup_u);
      result.decay_rate = decay_constant(g, sup_u, bg.n());
    }
    result.decay = monitor_decay_envelope(result.trace, g, bg);
    result.dissipation.applicable = bg.is_balanced() && params.defect_tol > 0.0;
    if (result.dissipation.applicable) result.dissipation = monitor_dissipation(result.trace);

    auto flag = [&](const MonitorCheck& check, std::uint32_t bit) {
      if (!check.applicable || check.passed) return;
      result.trace.records[*check.first_violation].monitor_flags |= bit;
    };
    flag(result.time_derivative, kTimeDerivativeBound);
    flag(result.decay, kDecayEnvelope);
    flag(result.dissipation, kDissipation);
    if (result.status != FlowStatus::BlowUp &&
        ((result.time_derivative.applicable && !result.time_derivative.passed) ||
         (result.decay.applicable && !result.decay.passed) ||
         (result.dissipation.applicable && !result.dissipation.passed))) {
      result.status = FlowStatus::MonitorViolation;
    }
  }
  return result;
}

FlowResult run_flow(const ScalarField& g, const Background& bg, const FlowParams& params) {
  return run_flow_from(ScalarField(g.grid()), g, bg, params);
}

MonitorCheck monitor_time_derivative_bound(const FlowTrace& trace, const ScalarField& g,
                                           const Background& bg) {
  MonitorCheck check;
  check.applicable = g.max() <= 0.0;
  if (!check.applicable) return check;
  const double c1 = pointwise_c1(g, bg);
  const double allowed = c1 * (1.0 + 1e-6);
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const double v = trace.records[k].sup_ut;
    if (allowed > 0.0) check.worst_ratio = std::max(check.worst_ratio, v / c1);
    if (v > allowed) {
      check.passed = false;
      if (!check.first_violation) check.first_violation = k;
    }
  }
  return check;
}

double decay_constant(const ScalarField& g, double sup_u_realized, int n) {
  const double g_max = g.max();
  if (!(g_max < 0.0)) {
    throw Error(ErrorKind::RequiresNegativeG, "decay constant needs max g < 0");
  }
  return -(4.0 / n) * g_max * std::exp(-2.0 * sup_u_realized / n);
}

MonitorCheck monitor_decay_envelope(const FlowTrace& trace, const ScalarField& g,
                                    const Background& bg) {
  MonitorCheck check;
  check.applicable = g.max() < 0.0 && !trace.records.empty();
  if (!check.applicable) return check;
  double sup_u = 0.0;
  for (const auto& r : trace.records) sup_u = std::max(sup_u, r.sup_u);
  const double rate = decay_constant(g, sup_u, bg.n());
  const double initial = sup_norm(g - bg.s0());
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    const auto& r = trace.records[k];
    const double envelope = initial * std::exp(-0.5 * rate * r.t);
    const double allowed = envelope * (1.0 + 1e-6) + 1e-13;
    if (envelope > 0.0) check.worst_ratio = std::max(check.worst_ratio, r.sup_ut / envelope);
    if (r.sup_ut > allowed) {
      check.passed = false;
      if (!check.first_violation) check.first_violation = k;
    }
  }
  return check;
}

MonitorCheck monitor_dissipation(const FlowTrace& trace) {
  MonitorCheck check;
  const auto& recs = trace.records;
  for (std::size_t k = 1; k + 1 < recs.size(); ++k) {
    const double dE = (recs[k + 1].energy - recs[k - 1].energy) / (recs[k + 1].t - recs[k - 1].t);
    const double scale = 1.0 + recs[k].ut_sq;
    const double gap = std::abs(dE + recs[k].ut_sq);
    check.worst_ratio = std::max(check.worst_ratio, gap / (1e-4 * scale));
    if (gap > 1e-4 * scale) {
      check.passed = false;
      if (!check.first_violation) check.first_violation = k;
    }
  }
  return check;
}

}  // namespace cyf

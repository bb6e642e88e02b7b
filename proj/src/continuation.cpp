#include "cyf/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cyf/variational.hpp"

namespace cyf {

void validate_candidate(const ScalarField& g0, const Background& bg) {
  require_same_grid(g0.grid(), bg.grid());
  const double hi = g0.max();
  const double lo = g0.min();
  if (std::abs(hi) > 1e-12) {
    throw Error(ErrorKind::BadCandidate, "candidate must have max g0 = 0, got " + std::to_string(hi));
  }
  if (hi - lo <= 1e-12) throw Error(ErrorKind::BadCandidate, "candidate g0 is constant");
  if (!(bg.gamma() < 0.0)) {
    throw Error(ErrorKind::NotNegativeDegree,
                "Gauduchon degree " + std::to_string(bg.gamma()) + " >= 0");
  }
}

namespace {

// Predictor-corrector march in lambda from a known solution. The tangent
// du/dlambda solves J t = e^{2u/n}; Newton corrects at each new lambda, the
// step halves on failure and doubles on success.
SolveOutcome march(const ContinuationSeed& seed, double target, const ScalarField& g0,
                   const Background& bg, const ContinuationParams& params) {
  const double min_step = params.min_step_fraction * params.width_tol;
  double lambda = seed.lambda;
  ScalarField u = seed.u;
  double step = target - lambda;
  SolveOutcome last;
  int iterations = 0;

  while (lambda != target) {
    const double next = std::abs(target - lambda) <= std::abs(step) ? target : lambda + step;
    const ScalarField g_next = g0 + next;
    SolveOutcome out;
    try {
      const ScalarField tangent =
          solve_linearized(u, g0 + lambda, bg, conformal_factor(u, bg.n()), params.newton.linear_tol);
      out = newton_solve(g_next, bg, u + (next - lambda) * tangent, params.newton);
    } catch (const Error&) {
      out.status = SolveStatus::Diverged;
    }
    iterations += out.iterations;
    if (!out.converged()) {
      out = newton_solve(g_next, bg, u, params.newton);
      iterations += out.iterations;
    }
    if (out.converged()) {
      lambda = next;
      u = *out.u;
      last = std::move(out);
      step *= 2.0;
      continue;
    }
    step *= 0.5;
    if (std::abs(step) < min_step) {
      out.iterations = iterations;
      out.message = "continuation stalled at lambda = " + std::to_string(lambda) +
                    (out.message.empty() ? "" : "; " + out.message);
      return out;
    }
  }
  if (!last.converged()) {
    // target == seed.lambda
    last = newton_solve(g0 + target, bg, seed.u, params.newton);
  }
  last.iterations = iterations;
  return last;
}

}  // namespace

SolveOutcome solvable(double lambda, const ScalarField& g0, const Background& bg,
                      const std::optional<ContinuationSeed>& seed,
                      const ContinuationParams& params) {
  validate_candidate(g0, bg);
  const ScalarField g = g0 + lambda;
  std::string trail;

  if (seed) {
    SolveOutcome out = march(*seed, lambda, g0, bg, params);
    if (out.converged()) {
      out.message = "continuation";
      return out;
    }
    trail += "continuation: " + out.message + "; ";
  }

  SolveOutcome cold = newton_solve(g, bg, ScalarField(g.grid()), params.newton);
  if (cold.converged()) {
    cold.message = "newton";
    return cold;
  }
  trail += "newton: " + cold.message + "; ";

  const FlowResult flow = run_flow(g, bg, params.fallback_flow);
  if (flow.status == FlowStatus::Converged) {
    SolveOutcome polished = newton_solve(g, bg, flow.u_final, params.newton);
    if (polished.converged()) {
      polished.message = "flow";
      return polished;
    }
    trail += "flow polish: " + polished.message;
  } else {
    trail += "flow: " + std::string(to_string(flow.status)) + " " + flow.message;
  }
  cold.message = trail;
  return cold;
}

LambdaOutcome summarize(double lambda, const SolveOutcome& outcome, const ScalarField& g,
                        const Background& bg) {
  LambdaOutcome s;
  s.lambda = lambda;
  s.status = outcome.status;
  s.reason = outcome.reason;
  s.method = outcome.message;
  s.residual_sup = outcome.residual_sup;
  s.iterations = outcome.iterations;
  if (outcome.u) {
    const ScalarField& u = *outcome.u;
    const DiagnosticSet d = diagnostics(u, g, bg);
    s.sup_u = sup_norm(u);
    s.exp_mass = d.exp_mass;
    s.exp_grad = d.exp_grad;
    s.integral_gap = d.integral_gap;
  }
  return s;
}

ContinuationReport bisect_lambda_star(const ScalarField& g0, const Background& bg,
                                      const ContinuationParams& params) {
  validate_candidate(g0, bg);
  if (!(params.width_tol > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "width_tol must be positive");
  }
  ContinuationReport report;
  report.upper_bound = -g0.min();

  auto record = [&](double lambda, const SolveOutcome& out) {
    report.lambdas.push_back(lambda);
    report.outcomes.push_back(summarize(lambda, out, g0 + lambda, bg));
  };

  SolveOutcome at_zero = solvable(0.0, g0, bg, std::nullopt, params);
  record(0.0, at_zero);
  if (!at_zero.converged()) {
    throw Error(ErrorKind::InconsistentThreshold, "lambda = 0 is not solvable: " + at_zero.message);
  }
  report.u_zero = *at_zero.u;

  const double hi = report.upper_bound * (1.0 + params.margin_fraction);
  SolveOutcome at_hi = solvable(hi, g0, bg, ContinuationSeed{0.0, *at_zero.u}, params);
  record(hi, at_hi);
  if (at_hi.converged()) {
    throw Error(ErrorKind::InconsistentThreshold,
                "lambda = " + std::to_string(hi) + " above -min g0 reported solvable");
  }

  report.lambda_lo = 0.0;
  report.lambda_hi = hi;
  ScalarField u_lo = *at_zero.u;
  while (report.lambda_hi - report.lambda_lo >= params.width_tol) {
    const double mid = 0.5 * (report.lambda_lo + report.lambda_hi);
    SolveOutcome out = solvable(mid, g0, bg, ContinuationSeed{report.lambda_lo, u_lo}, params);
    record(mid, out);
    if (out.converged()) {
      report.lambda_lo = mid;
      u_lo = *out.u;
    } else {
      report.lambda_hi = mid;
    }
  }

  double max_solvable = -1.0;
  double min_unsolvable = std::numeric_limits<double>::infinity();
  for (const auto& o : report.outcomes) {
    if (o.status == SolveStatus::Converged) {
      max_solvable = std::max(max_solvable, o.lambda);
    } else {
      min_unsolvable = std::min(min_unsolvable, o.lambda);
    }
  }
  if (!(max_solvable < min_unsolvable)) {
    throw Error(ErrorKind::InconsistentThreshold,
                "solvable lambda " + std::to_string(max_solvable) +
                    " above unsolvable lambda " + std::to_string(min_unsolvable));
  }
  report.lambda_star_estimate = 0.5 * (report.lambda_lo + report.lambda_hi);
  report.u_lo = std::move(u_lo);
  return report;
}

std::vector<LambdaOutcome> sweep_lambdas(const ScalarField& g0, const Background& bg,
                                         const std::vector<double>& lambdas,
                                         const ContinuationParams& params,
                                         std::vector<ScalarField>* solutions) {
  validate_candidate(g0, bg);
  std::vector<LambdaOutcome> out;
  std::optional<ContinuationSeed> seed;
  for (double lambda : lambdas) {
    SolveOutcome res = solvable(lambda, g0, bg, seed, params);
    out.push_back(summarize(lambda, res, g0 + lambda, bg));
    if (res.converged()) {
      if (solutions) solutions->push_back(*res.u);
      seed = ContinuationSeed{lambda, *res.u};
    }
  }
  return out;
}

ProbeReport probe_lambda_star(const ScalarField& g0, const Background& bg,
                              const ContinuationReport& report,
                              const ContinuationParams& params) {
  validate_candidate(g0, bg);
  ProbeReport probe;
  probe.in_hypothesis = bg.is_balanced() && bg.n() == 2;
  probe.label = probe.in_hypothesis ? "in-hypothesis" : "exploratory";

  const double baseline = 0.5 * report.lambda_star_estimate;
  const double lo = report.lambda_lo;
  std::vector<double> lambdas{baseline};
  if (lo > baseline) {
    for (int k = 1; k <= 8; ++k) lambdas.push_back(lo - (lo - baseline) * std::ldexp(1.0, -k));
    lambdas.push_back(lo);
  }

  std::optional<ContinuationSeed> seed;
  if (report.u_zero) seed = ContinuationSeed{0.0, *report.u_zero};
  std::optional<ScalarField> last;
  for (double lambda : lambdas) {
    const SolveOutcome res = solvable(lambda, g0, bg, seed, params);
    ProbeEntry e;
    e.lambda = lambda;
    e.converged = res.converged();
    e.residual_sup = res.residual_sup;
    if (res.u) {
      const DiagnosticSet d = diagnostics(*res.u, g0 + lambda, bg);
      e.sup_u = sup_norm(*res.u);
      e.exp_mass = d.exp_mass;
      e.exp_grad = d.exp_grad;
      e.laplacian_l2 = d.laplacian_l2;
      seed = ContinuationSeed{lambda, *res.u};
      last = *res.u;
    }
    probe.entries.push_back(e);
  }

  const ProbeEntry& base = probe.entries.front();
  probe.bounded = base.converged;
  for (const auto& e : probe.entries) {
    if (!e.converged) {
      probe.bounded = false;
      continue;
    }
    auto ratio = [](double v, double b) { return b > 0.0 ? v / b : (v > 0.0 ? INFINITY : 0.0); };
    const double r = std::max({ratio(e.exp_mass, base.exp_mass), ratio(e.exp_grad, base.exp_grad),
                               ratio(e.laplacian_l2, base.laplacian_l2)});
    probe.worst_ratio = std::max(probe.worst_ratio, r);
    if (r > 10.0) probe.bounded = false;
  }

  const double mid = report.lambda_star_estimate;
  probe.midpoint = newton_solve(g0 + mid, bg, last.value_or(ScalarField(g0.grid())), params.newton);
  return probe;
}

}  // namespace cyf

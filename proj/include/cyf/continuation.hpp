#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cyf/elliptic.hpp"
#include "cyf/flow.hpp"

namespace cyf {

struct ContinuationParams {
  double width_tol = 1e-3;
  double margin_fraction = 0.1;  // right endpoint is (1 + margin) * (-min g0)
  /// Smallest lambda increment the predictor-corrector march may take, as a
  /// fraction of width_tol.
  double min_step_fraction = 0.125;
  NewtonParams newton{};
  FlowParams fallback_flow = default_fallback_flow();

  static FlowParams default_fallback_flow() {
    FlowParams p;
    p.defect_tol = 0.0;
    p.monitors = false;
    p.max_steps = 20000;
    return p;
  }
};

/// Known solution at some lambda, used to start a continuation march.
struct ContinuationSeed {
  double lambda = 0.0;
  ScalarField u;
};

/// Throws BadCandidate unless max g0 = 0 (1e-12) and g0 is nonconstant;
/// NotNegativeDegree unless gamma < 0.
void validate_candidate(const ScalarField& g0, const Background& bg);

/// Tries, in order: predictor-corrector march from the seed, Newton from zero,
/// and a flow run polished by Newton. Diverged only if all fail. On success the
/// outcome message names the method that worked.
SolveOutcome solvable(double lambda, const ScalarField& g0, const Background& bg,
                      const std::optional<ContinuationSeed>& seed = std::nullopt,
                      const ContinuationParams& params = {});

struct LambdaOutcome {
  double lambda = 0.0;
  SolveStatus status = SolveStatus::Diverged;
  DivergeReason reason = DivergeReason::None;
  std::string method;
  double residual_sup = 0.0;
  double sup_u = 0.0;
  double exp_mass = 0.0;
  double exp_grad = 0.0;
  double integral_gap = 0.0;
  int iterations = 0;
};

struct ContinuationReport {
  std::vector<double> lambdas;  // in probe order
  std::vector<LambdaOutcome> outcomes;
  double lambda_lo = 0.0;  // largest solvable
  double lambda_hi = 0.0;  // smallest unsolvable
  double lambda_star_estimate = 0.0;
  double upper_bound = 0.0;  // -min g0
  std::optional<ScalarField> u_lo;
  std::optional<ScalarField> u_zero;  // solution at lambda = 0

  double width() const { return lambda_hi - lambda_lo; }
};

LambdaOutcome summarize(double lambda, const SolveOutcome& outcome, const ScalarField& g,
                        const Background& bg);

/// Bisection for the solvability threshold starting from the bracket
/// (0, (1 + margin)(-min g0)). Throws InconsistentThreshold if the recorded
/// outcomes are not separated by a single threshold.
ContinuationReport bisect_lambda_star(const ScalarField& g0, const Background& bg,
                                      const ContinuationParams& params = {});

/// Solves g0 + lambda for each entry of `lambdas` in order, seeding each solve
/// with the last converged solution. Solutions are appended to `solutions`
/// when given (converged entries only).
std::vector<LambdaOutcome> sweep_lambdas(const ScalarField& g0, const Background& bg,
                                         const std::vector<double>& lambdas,
                                         const ContinuationParams& params = {},
                                         std::vector<ScalarField>* solutions = nullptr);

struct ProbeEntry {
  double lambda = 0.0;
  bool converged = false;
  double residual_sup = 0.0;
  double sup_u = 0.0;
  double exp_mass = 0.0;
  double exp_grad = 0.0;
  double laplacian_l2 = 0.0;
};

struct ProbeReport {
  std::vector<ProbeEntry> entries;  // entries.front() is the lambda*/2 baseline
  bool in_hypothesis = false;       // balanced background with n = 2
  std::string label;                // "in-hypothesis" or "exploratory"
  bool bounded = false;  // every diagnostic stays within 10x its baseline
  double worst_ratio = 0.0;
  SolveOutcome midpoint;  // Newton at the bracket midpoint from the last seed
};

ProbeReport probe_lambda_star(const ScalarField& g0, const Background& bg,
                              const ContinuationReport& report,
                              const ContinuationParams& params = {});

}  // namespace cyf

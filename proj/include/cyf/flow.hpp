#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cyf/background.hpp"

namespace cyf {

struct FlowParams {
  double dt_init = 1e-3;
  double dt_max = 0.5;
  double dt_growth = 1.2;
  double eps_stop = 1e-9;  // threshold on sup|u_t|
  double t_max = 200.0;
  /// Step acceptance bound on |u_t|_2 * |u_t^+ - u_t|_2 relative to 1 + |u_t|_2^2,
  /// which controls the first-order defect of the energy identity. 0 disables it.
  double defect_tol = 5e-5;
  long max_steps = 2'000'000;
  /// Evaluate the a-priori monitors after the run and report violations.
  bool monitors = true;
};

/// Monitor bits stored per record.
enum MonitorFlag : std::uint32_t {
  kTimeDerivativeBound = 1u << 0,
  kDecayEnvelope = 1u << 1,
  kDissipation = 1u << 2,
};

struct FlowRecord {
  double t = 0.0;
  double dt = 0.0;  // step that produced this record (0 for the initial state)
  double sup_u = 0.0;
  double l2_u = 0.0;
  double sup_ut = 0.0;
  double ut_sq = 0.0;  // integral of u_t^2
  double energy = 0.0;
  double residual_sup = 0.0;
  std::uint32_t monitor_flags = 0;
};

struct FlowTrace {
  std::vector<FlowRecord> records;
};

enum class FlowStatus { Converged, TimedOut, MonitorViolation, BlowUp };
std::string_view to_string(FlowStatus status);

struct MonitorCheck {
  bool applicable = true;
  bool passed = true;
  std::optional<std::size_t> first_violation;  // record index
  double worst_ratio = 0.0;  // max over records of observed / allowed
};

struct FlowResult {
  ScalarField u_final;
  FlowTrace trace;
  FlowStatus status = FlowStatus::TimedOut;
  std::string message;
  MonitorCheck time_derivative;
  MonitorCheck decay;
  MonitorCheck dissipation;
  std::optional<double> decay_rate;  // realized C10 when g < 0
  long rejected_steps = 0;
};

/// u_t of the flow at u: chern_laplacian(u) - s0 + g e^{2u/n} (= -residual).
ScalarField flow_velocity(const ScalarField& u, const ScalarField& g, const Background& bg);

/// Flow energy E(u) = integral of u s0 + |grad u|^2 / 2 - (n/2)(e^{2u/n} - 1) g.
/// Along a balanced flow dE/dt = -integral of u_t^2.
double flow_energy(const ScalarField& u, const ScalarField& g, const Background& bg);

/// One first-order IMEX step: implicit diffusion, explicit drift and reaction.
ScalarField step_imex(const ScalarField& u, double dt, const ScalarField& g, const Background& bg);

/// Integrates the flow from u = 0.
FlowResult run_flow(const ScalarField& g, const Background& bg, const FlowParams& params = {});

/// Diagnostic entry point: integrates the flow from an arbitrary start.
FlowResult run_flow_from(const ScalarField& u0, const ScalarField& g, const Background& bg,
                         const FlowParams& params = {});

/// sup|u_t| <= sup(|g| + |s0|) (1 + 1e-6) at every record. Applicable when g <= 0.
MonitorCheck monitor_time_derivative_bound(const FlowTrace& trace, const ScalarField& g,
                                           const Background& bg);

/// C10 = -(4/n) (max g) e^{-2 sup_u / n}. Throws RequiresNegativeG if max g >= 0.
double decay_constant(const ScalarField& g, double sup_u_realized, int n);

/// sup|u_t|(t) <= max|g - s0| e^{-C10 t / 2} at every record after t = 0.
MonitorCheck monitor_decay_envelope(const FlowTrace& trace, const ScalarField& g,
                                    const Background& bg);

/// |dE/dt + integral u_t^2| <= 1e-4 (1 + integral u_t^2), dE/dt by centered differences.
MonitorCheck monitor_dissipation(const FlowTrace& trace);

}  // namespace cyf

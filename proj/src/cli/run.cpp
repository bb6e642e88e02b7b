#include "cyf/cli/run.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "cyf/cli/field_io.hpp"
#include "cyf/continuation.hpp"
#include "cyf/variational.hpp"

namespace cyf::cli {

using nlohmann::ordered_json;

namespace {

// Seed slots; 0-5 belong to the background.
constexpr std::uint64_t kSlotG = 6;
constexpr std::uint64_t kSlotG0 = 7;
constexpr std::uint64_t kSlotInitial = 8;

std::string format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool is_config_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidSize:
    case ErrorKind::InvalidArgument:
    case ErrorKind::GridMismatch:
    case ErrorKind::ProjectionFailure:
    case ErrorKind::NotNegativeDegree:
    case ErrorKind::RequiresNegativeG:
    case ErrorKind::BadCandidate:
    case ErrorKind::ParseError:
    case ErrorKind::ValidationError:
      return true;
    default:
      return false;
  }
}

ordered_json monitor_json(const MonitorCheck& m) {
  ordered_json j;
  j["applicable"] = m.applicable;
  j["passed"] = m.passed;
  j["worst_ratio"] = m.worst_ratio;
  j["first_violation"] = m.first_violation ? ordered_json(*m.first_violation) : ordered_json(nullptr);
  return j;
}

ordered_json no_monitors() {
  const MonitorCheck none{false, true, std::nullopt, 0.0};
  return {{"time_derivative", monitor_json(none)},
          {"decay_envelope", monitor_json(none)},
          {"dissipation", monitor_json(none)}};
}

ordered_json field_stats(const ScalarField& u) {
  return {{"min", u.min()}, {"max", u.max()}, {"mean", mean(u)}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
}

void write_outcomes_csv(const std::filesystem::path& path, const std::vector<LambdaOutcome>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << "lambda,status,reason,method,iterations,residual_sup,sup_u,exp_mass,exp_grad,integral_gap\n";
  for (const auto& r : rows) {
    // The method column is free text; keep the CSV one field wide.
    std::string method = r.method;
    for (char& ch : method) {
      if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
    }
    out << format(r.lambda) << ',' << to_string(r.status) << ',' << to_string(r.reason) << ','
        << method << ',' << r.iterations << ',' << format(r.residual_sup) << ',' << format(r.sup_u)
        << ',' << format(r.exp_mass) << ',' << format(r.exp_grad) << ',' << format(r.integral_gap)
        << '\n';
  }
}

ordered_json outcome_json(const SolveOutcome& o) {
  ordered_json j;
  j["status"] = to_string(o.status);
  j["reason"] = to_string(o.reason);
  j["iterations"] = o.iterations;
  j["final_residual"] = o.residual_sup;
  j["message"] = o.message;
  return j;
}

ordered_json bracket_json(const ContinuationReport& r) {
  return {{"lambda_lo", r.lambda_lo},
          {"lambda_hi", r.lambda_hi},
          {"width", r.width()},
          {"lambda_star_estimate", r.lambda_star_estimate},
          {"upper_bound", r.upper_bound},
          {"probes", r.lambdas.size()}};
}

double lo_residual(const ContinuationReport& r) {
  for (std::size_t i = 0; i < r.lambdas.size(); ++i) {
    if (r.lambdas[i] == r.lambda_lo && r.outcomes[i].status == SolveStatus::Converged) {
      return r.outcomes[i].residual_sup;
    }
  }
  return 0.0;
}

class Run {
 public:
  Run(const RunConfig& config, std::ostream* log)
      : c_(config), log_(log), bg_(make_background(config)) {}

  int go(ordered_json& summary) {
    summary["gamma"] = bg_.gamma();
    summary["balanced"] = bg_.is_balanced();
    switch (c_.mode) {
      case Mode::Flow: return flow(summary);
      case Mode::Newton: return newton(summary);
      case Mode::Sweep: return sweep(summary);
      case Mode::Bisect: return bisect(summary);
      case Mode::Probe: return probe(summary);
      case Mode::Diagnose: return diagnose(summary);
    }
    return kConfigError;
  }

 private:
  ScalarField target_g() const {
    if (c_.g) return sample(*c_.g, bg_.grid(), field_seed(c_.seed, kSlotG));
    return g0() + c_.lambda.value_or(0.0);
  }
  ScalarField g0() const { return sample(*c_.g0, bg_.grid(), field_seed(c_.seed, kSlotG0)); }
  ScalarField initial() const {
    if (!c_.initial) return ScalarField(bg_.grid());
    return sample(*c_.initial, bg_.grid(), field_seed(c_.seed, kSlotInitial));
  }
  std::filesystem::path out(const char* name) const { return c_.output_dir / name; }
  void save(const char* name, const ScalarField& u) const {
    if (c_.save_fields) write_field(out(name), u);
  }
  void say(const std::string& line) const {
    if (log_) *log_ << line << '\n';
  }

  int flow(ordered_json& s) {
    const ScalarField g = target_g();
    const FlowResult r = run_flow_from(initial(), g, bg_, c_.flow);
    {
      std::ofstream csv(out("trace.csv"), std::ios::binary | std::ios::trunc);
      if (!csv) throw Error(ErrorKind::IoError, "cannot write trace.csv");
      write_trace_csv(csv, r.trace);
    }
    save("u_final.cyf", r.u_final);
    const FlowRecord& last = r.trace.records.back();
    s["status"] = to_string(r.status);
    s["message"] = r.message;
    s["t_final"] = last.t;
    s["steps"] = r.trace.records.size() - 1;
    s["rejected_steps"] = r.rejected_steps;
    s["final_residual"] = last.residual_sup;
    s["final_sup_ut"] = last.sup_ut;
    s["u_final"] = field_stats(r.u_final);
    ordered_json m = c_.flow.monitors ? ordered_json{{"time_derivative", monitor_json(r.time_derivative)},
                                                     {"decay_envelope", monitor_json(r.decay)},
                                                     {"dissipation", monitor_json(r.dissipation)}}
                                      : no_monitors();
    m["decay_rate"] = r.decay_rate ? ordered_json(*r.decay_rate) : ordered_json(nullptr);
    s["monitors"] = std::move(m);
    say("flow: " + std::string(to_string(r.status)) + " at t = " + format(last.t) +
        ", residual " + format(last.residual_sup));
    switch (r.status) {
      case FlowStatus::Converged: return kSuccess;
      case FlowStatus::MonitorViolation: return kMonitorViolation;
      default: return kNotConverged;
    }
  }

  int newton(ordered_json& s) {
    const ScalarField g = target_g();
    if (c_.g0) s["lambda"] = *c_.lambda;
    const SolveOutcome o = newton_solve(g, bg_, initial(), c_.newton);
    const ordered_json oj = outcome_json(o);
    for (const auto& item : oj.items()) s[item.key()] = item.value();
    s["monitors"] = no_monitors();
    if (o.u) {
      save("u.cyf", *o.u);
      s["u"] = field_stats(*o.u);
      s["integral_gap"] = std::abs(bg_.gamma() - integrate(g * conformal_factor(*o.u, bg_.n())));
    }
    say("newton: " + std::string(to_string(o.status)) + " (" + std::string(to_string(o.reason)) +
        ") after " + std::to_string(o.iterations) + " iterations, residual " + format(o.residual_sup));
    return o.converged() ? kSuccess : kNotConverged;
  }

  int sweep(ordered_json& s) {
    std::vector<ScalarField> solutions;
    const auto rows = sweep_lambdas(g0(), bg_, c_.lambdas, c_.continuation, &solutions);
    write_outcomes_csv(out("sweep.csv"), rows);
    std::size_t solved = 0;
    double max_solvable = NAN;
    double final_residual = 0.0;
    for (const auto& r : rows) {
      if (r.status != SolveStatus::Converged) continue;
      ++solved;
      if (!(r.lambda <= max_solvable)) max_solvable = r.lambda;
      final_residual = r.residual_sup;
    }
    s["status"] = "completed";
    s["lambdas"] = rows.size();
    s["solvable"] = solved;
    s["max_solvable"] = std::isnan(max_solvable) ? ordered_json(nullptr) : ordered_json(max_solvable);
    s["final_residual"] = final_residual;
    s["monitors"] = no_monitors();
    say("sweep: " + std::to_string(solved) + " of " + std::to_string(rows.size()) + " solvable");
    return kSuccess;
  }

  ContinuationReport bracket(ordered_json& s) {
    const ContinuationReport r = bisect_lambda_star(g0(), bg_, c_.continuation);
    write_outcomes_csv(out("bisect.csv"), r.outcomes);
    if (r.u_lo) save("u_lo.cyf", *r.u_lo);
    s["bracket"] = bracket_json(r);
    s["final_residual"] = lo_residual(r);
    s["monitors"] = no_monitors();
    say("bisect: lambda* in [" + format(r.lambda_lo) + ", " + format(r.lambda_hi) + "]");
    return r;
  }

  int bisect(ordered_json& s) {
    bracket(s);
    s["status"] = "completed";
    return kSuccess;
  }

  int probe(ordered_json& s) {
    const ContinuationReport r = bracket(s);
    const ProbeReport p = probe_lambda_star(g0(), bg_, r, c_.continuation);
    {
      std::ofstream csv(out("probe.csv"), std::ios::binary | std::ios::trunc);
      if (!csv) throw Error(ErrorKind::IoError, "cannot write probe.csv");
      csv << "lambda,converged,residual_sup,sup_u,exp_mass,exp_grad,laplacian_l2\n";
      for (const auto& e : p.entries) {
        csv << format(e.lambda) << ',' << (e.converged ? 1 : 0) << ',' << format(e.residual_sup) << ','
            << format(e.sup_u) << ',' << format(e.exp_mass) << ',' << format(e.exp_grad) << ','
            << format(e.laplacian_l2) << '\n';
      }
    }
    s["probe"] = {{"label", p.label},
                  {"in_hypothesis", p.in_hypothesis},
                  {"bounded", p.bounded},
                  {"worst_ratio", p.worst_ratio},
                  {"midpoint", outcome_json(p.midpoint)}};
    s["status"] = "completed";
    say("probe (" + p.label + "): worst ratio " + format(p.worst_ratio) +
        (p.bounded ? ", bounded" : ", NOT bounded"));
    return p.in_hypothesis && !p.bounded ? kMonitorViolation : kSuccess;
  }

  int diagnose(ordered_json& s) {
    const ScalarField g = target_g();
    const ScalarField u = initial();
    const DiagnosticSet d = diagnostics(u, g, bg_);
    s["status"] = "completed";
    s["final_residual"] = sup_norm(residual(u, g, bg_));
    s["diagnostics"] = {{"energy", d.energy},
                        {"c0_over_l2", d.c0_over_l2},
                        {"integral_gap", d.integral_gap},
                        {"exp_mass", d.exp_mass},
                        {"exp_grad", d.exp_grad},
                        {"laplacian_l2", d.laplacian_l2},
                        {"lower_bound_slack", d.lower_bound_slack ? ordered_json(*d.lower_bound_slack)
                                                                  : ordered_json(nullptr)}};
    s["monitors"] = no_monitors();
    return kSuccess;
  }

  const RunConfig& c_;
  std::ostream* log_;
  Background bg_;
};

}  // namespace

void write_trace_csv(std::ostream& out, const FlowTrace& trace) {
  out << "t,dt,sup_u,l2_u,sup_ut,energy,residual_sup,monitor_flags\n";
  for (const auto& r : trace.records) {
    out << format(r.t) << ',' << format(r.dt) << ',' << format(r.sup_u) << ',' << format(r.l2_u)
        << ',' << format(r.sup_ut) << ',' << format(r.energy) << ',' << format(r.residual_sup) << ','
        << r.monitor_flags << '\n';
  }
}

int execute(const RunConfig& config, std::ostream* log) {
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) {
    if (log) *log << "error: cannot create " << config.output_dir.string() << ": " << ec.message() << '\n';
    return kConfigError;
  }

  ordered_json summary;
  summary["mode"] = to_string(config.mode);
  summary["grid"] = config.grid;
  summary["n"] = config.n;
  int code = kConfigError;
  try {
    write_text(config.output_dir / "config.json", to_json(config).dump(2) + "\n");
    Run run(config, log);
    code = run.go(summary);
  } catch (const Error& e) {
    if (log) *log << "error: " << e.what() << '\n';
    if (is_config_error(e.kind())) return kConfigError;
    summary["status"] = "error";
    summary["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
    if (!summary.contains("monitors")) summary["monitors"] = no_monitors();
    code = kNotConverged;
  }
  summary["exit_code"] = code;
  write_text(config.output_dir / "summary.json", summary.dump(2) + "\n");
  return code;
}

}  // namespace cyf::cli

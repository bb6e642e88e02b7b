#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cyf/continuation.hpp"
#include "cyf/variational.hpp"
#include "support.hpp"

using namespace cyf;
using cyf::test::smooth;

namespace {

ScalarField fixture_g0(const Grid& g) {
  return ScalarField::from_function(g, [](std::span<const double> x) { return std::cos(test::kTwoPi * x[0]) - 1.0; });
}

struct Fixture {
  Grid grid = Grid::make({32, 32});
  Background bg = Background::balanced(2, ScalarField(grid, -1.0));
  ScalarField g0 = fixture_g0(grid);
};

const ContinuationReport& fixture_report() {
  static const Fixture f;
  static const ContinuationReport r = bisect_lambda_star(f.g0, f.bg);
  return r;
}

ErrorKind thrown_kind(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::IoError;
}

}  // namespace

TEST_CASE("candidates are validated") {
  const Fixture f;
  CHECK(thrown_kind([&] { validate_candidate(f.g0 - 0.5, f.bg); }) == ErrorKind::BadCandidate);
  CHECK(thrown_kind([&] { validate_candidate(ScalarField(f.grid), f.bg); }) == ErrorKind::BadCandidate);
  CHECK(thrown_kind([&] { validate_candidate(f.g0, Background::balanced(2, ScalarField(f.grid, 0.5))); }) ==
        ErrorKind::NotNegativeDegree);
  CHECK_NOTHROW(validate_candidate(f.g0, f.bg));
}

TEST_CASE("solvable at both ends of the range") {
  const Fixture f;
  const SolveOutcome zero = solvable(0.0, f.g0, f.bg);
  REQUIRE(zero.converged());
  CHECK(std::abs(f.bg.gamma() - integrate(f.g0 * conformal_factor(*zero.u, 2))) < 1e-8);

  const double beyond = -f.g0.min() + 0.1;
  CHECK_FALSE(solvable(beyond, f.g0, f.bg, ContinuationSeed{0.0, *zero.u}).converged());
}

TEST_CASE("interior lambda: newton, continuation and identity agree") {
  const Fixture f;
  const SolveOutcome zero = solvable(0.0, f.g0, f.bg);
  REQUIRE(zero.converged());
  const SolveOutcome mid = solvable(0.5, f.g0, f.bg, ContinuationSeed{0.0, *zero.u});
  REQUIRE(mid.converged());
  CHECK(mid.message == "continuation");
  const ScalarField g = f.g0 + 0.5;
  CHECK(std::abs(f.bg.gamma() - integrate(g * conformal_factor(*mid.u, 2))) < 1e-8);
  CHECK(g.min() < 0.0);

  const SolveOutcome flow_route = newton_solve(g, f.bg, run_flow(g, f.bg).u_final);
  REQUIRE(flow_route.converged());
  CHECK(sup_norm(*flow_route.u - *mid.u) < 1e-8);
}

TEST_CASE("seeded solves need no more iterations than cold starts") {
  const Fixture f;
  const SolveOutcome at_03 = solvable(0.3, f.g0, f.bg);
  REQUIRE(at_03.converged());
  const ScalarField g = f.g0 + 0.35;
  const SolveOutcome seeded = newton_solve(g, f.bg, *at_03.u);
  const SolveOutcome cold = newton_solve(g, f.bg, ScalarField(f.grid));
  REQUIRE(seeded.converged());
  REQUIRE(cold.converged());
  CHECK(seeded.iterations <= cold.iterations);
}

TEST_CASE("bisection bracket contract") {
  const Fixture f;
  const ContinuationReport& r = fixture_report();
  CHECK(r.lambda_lo < r.lambda_hi);
  CHECK(r.width() < 1e-3);
  CHECK(r.lambda_star_estimate > 0.0);
  CHECK(r.lambda_star_estimate <= 2.0);
  CHECK(r.lambda_star_estimate <= r.upper_bound + r.width());
  CHECK(r.upper_bound == doctest::Approx(2.0));
  REQUIRE(r.outcomes.size() >= 2);
  CHECK(r.outcomes[0].lambda == 0.0);
  CHECK(r.outcomes[0].status == SolveStatus::Converged);
  CHECK(r.outcomes[1].lambda == doctest::Approx(2.2));
  CHECK(r.outcomes[1].status == SolveStatus::Diverged);
  double max_ok = -1.0;
  double min_bad = 1e300;
  for (const auto& o : r.outcomes) {
    if (o.status == SolveStatus::Converged) {
      max_ok = std::max(max_ok, o.lambda);
      CHECK(o.integral_gap < 1e-8);
    } else {
      min_bad = std::min(min_bad, o.lambda);
    }
  }
  CHECK(max_ok < min_bad);
}

TEST_CASE("a looser width stops earlier") {
  const Fixture f;
  ContinuationParams p;
  p.width_tol = 0.05;
  const ContinuationReport r = bisect_lambda_star(f.g0, f.bg, p);
  CHECK(r.width() < 0.05);
  CHECK(std::abs(r.lambda_star_estimate - fixture_report().lambda_star_estimate) < 0.05);
}

TEST_CASE("sweep keeps solutions above the sub-solution") {
  const Fixture f;
  const double star = fixture_report().lambda_lo;
  const std::vector<double> lambdas{0.0, 0.25 * star, 0.5 * star, 0.75 * star, 0.95 * star};
  std::vector<ScalarField> sols;
  const auto rows = sweep_lambdas(f.g0, f.bg, lambdas, {}, &sols);
  REQUIRE(sols.size() == lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    CHECK(rows[i].status == SolveStatus::Converged);
    const Subsolution sub = build_subsolution(f.g0 + lambdas[i], f.bg);
    CHECK((sols[i] - sub.phi).min() >= -1e-8);
  }
}

TEST_CASE("probe diagnostics along the fixture branch") {
  const Fixture f;
  const ProbeReport p = probe_lambda_star(f.g0, f.bg, fixture_report());
  CHECK(p.in_hypothesis);
  CHECK(p.label == "in-hypothesis");
  REQUIRE(p.entries.size() >= 2);
  const ProbeEntry& base = p.entries.front();
  double worst = 0.0;
  for (std::size_t i = 0; i < p.entries.size(); ++i) {
    const ProbeEntry& e = p.entries[i];
    CHECK(e.converged);
    CHECK(std::isfinite(e.sup_u));
    worst = std::max({worst, e.exp_mass / base.exp_mass, e.exp_grad / base.exp_grad,
                      e.laplacian_l2 / base.laplacian_l2});
    if (i == 0) continue;
    // Monotone table: every diagnostic grows with lambda.
    CHECK(e.lambda > p.entries[i - 1].lambda);
    CHECK(e.exp_mass > p.entries[i - 1].exp_mass);
    CHECK(e.exp_grad > p.entries[i - 1].exp_grad);
    CHECK(e.laplacian_l2 > p.entries[i - 1].laplacian_l2);
  }
  CHECK(p.worst_ratio == doctest::Approx(worst).epsilon(1e-12));
  CHECK(p.bounded == (worst <= 10.0));
  // Mass and the W^{2,2} proxy stay within 10x; the gradient term is quadratic in the
  // oscillation and does not (about 140x at the fold on this grid).
  CHECK(p.entries.back().exp_mass / base.exp_mass < 10.0);
  CHECK(p.entries.back().laplacian_l2 / base.laplacian_l2 < 10.0);
}

TEST_CASE("probe with drift is exploratory") {
  const Grid g = Grid::make({16, 16});
  const Background bg = Background::make(2, ScalarField(g, -1.0), rotated_gradient(smooth(g, 5, 0.1)));
  const ScalarField g0 = fixture_g0(g);
  ContinuationParams p;
  p.width_tol = 0.05;
  const ContinuationReport r = bisect_lambda_star(g0, bg, p);
  const ProbeReport probe = probe_lambda_star(g0, bg, r, p);
  CHECK_FALSE(probe.in_hypothesis);
  CHECK(probe.label == "exploratory");
}

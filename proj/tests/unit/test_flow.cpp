#include <doctest.h>

#include <cmath>

#include "cyf/elliptic.hpp"
#include "cyf/flow.hpp"
#include "support.hpp"

using namespace cyf;
using cyf::test::noise;
using cyf::test::smooth;

namespace {

struct Constant {
  Grid grid = Grid::make({16, 16});
  Background bg = Background::balanced(2, ScalarField(grid, -2.0));
  ScalarField g = ScalarField(grid, -1.0);
};

}  // namespace

TEST_CASE("step_imex keeps the fixed point") {
  const Grid g = Grid::make({16, 16});
  const ScalarField minus_one(g, -1.0);
  const ScalarField u = step_imex(ScalarField(g), 0.25, minus_one, Background::balanced(2, minus_one));
  CHECK(sup_norm(u) == 0.0);
}

TEST_CASE("step_imex on constant data is the reaction ODE step") {
  const Constant c;
  for (double u0 : {0.0, 0.3, -0.7}) {
    for (double dt : {1e-3, 0.1}) {
      const ScalarField u = step_imex(ScalarField(c.grid, u0), dt, c.g, c.bg);
      const double expect = u0 + dt * (2.0 - std::exp(u0));
      CHECK(sup_norm(u - expect) < 1e-14);
    }
  }
}

TEST_CASE("step_imex is consistent with explicit Euler to second order") {
  const Grid g = Grid::make({32, 32});
  const Background bg = Background::make(2, smooth(g, 1, 0.02) - 1.0, rotated_gradient(smooth(g, 2, 0.02, 1)));
  const ScalarField gg = smooth(g, 3, 0.02) - 1.0;
  const ScalarField u = smooth(g, 4, 0.02, 1);
  auto gap = [&](double dt) {
    const ScalarField euler = u + dt * flow_velocity(u, gg, bg);
    return sup_norm(step_imex(u, dt, gg, bg) - euler);
  };
  const double d1 = gap(1e-6);
  CHECK(d1 < 1e-10);
  const double d_big = gap(1e-3);
  const double d_half = gap(5e-4);
  CHECK(d_big / d_half == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("flow converges to the constant solution") {
  const Constant c;
  const FlowResult r = run_flow(c.g, c.bg);
  REQUIRE(r.status == FlowStatus::Converged);
  CHECK(sup_norm(r.u_final - std::log(2.0)) < 1e-7);
  CHECK(r.trace.records.front().sup_ut == doctest::Approx(1.0));
  CHECK(r.time_derivative.passed);
  CHECK(r.decay.passed);
  CHECK(r.dissipation.passed);
  for (std::size_t i = 1; i < r.trace.records.size(); ++i) {
    CHECK(r.trace.records[i].t > r.trace.records[i - 1].t);
  }
}

TEST_CASE("flow from a stationary start converges immediately") {
  const Grid g = Grid::make({16, 16});
  const ScalarField minus_one(g, -1.0);
  const FlowResult r = run_flow(minus_one, Background::balanced(2, minus_one));
  CHECK(r.status == FlowStatus::Converged);
  CHECK(r.trace.records.size() == 1);
  CHECK(sup_norm(r.u_final) == 0.0);
}

TEST_CASE("flow preserves an exact fixed point") {
  const Constant c;
  const ScalarField u0(c.grid, std::log(2.0));
  REQUIRE(sup_norm(residual(u0, c.g, c.bg)) < 1e-15);
  FlowParams p;
  p.eps_stop = 1e-300;
  p.t_max = 1.0;
  p.monitors = false;
  const FlowResult r = run_flow_from(u0, c.g, c.bg, p);
  CHECK(sup_norm(r.u_final - u0) < 1e-12);
}

TEST_CASE("flow limit matches newton for nonconstant data, with monitors") {
  const Grid g = Grid::make({32, 32});
  const Background bg = Background::balanced(2, smooth(g, 11, 0.8) - 1.2);
  const ScalarField gg = smooth(g, 12, 0.4) - 0.6;
  REQUIRE(gg.max() <= 0.0);
  const FlowResult r = run_flow(gg, bg);
  REQUIRE(r.status == FlowStatus::Converged);
  CHECK(r.time_derivative.passed);
  CHECK(r.decay.passed);
  CHECK(r.dissipation.passed);
  CHECK(r.trace.records.back().residual_sup < 10 * FlowParams{}.eps_stop);
  CHECK(std::abs(bg.gamma() - integrate(gg * conformal_factor(r.u_final, 2))) < 1e-6);

  const SolveOutcome n = newton_solve(gg, bg, ScalarField(g));
  REQUIRE(n.converged());
  CHECK(sup_norm(r.u_final - *n.u) < 1e-6);
}

TEST_CASE("time-derivative bound over random g <= 0 instances") {
  const Grid g = Grid::make({16, 16});
  FlowParams p;
  p.defect_tol = 0.0;  // the bound is independent of step control
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Background bg = Background::make(2, smooth(g, 500 + seed, 0.8) - 1.0,
                                           rotated_gradient(smooth(g, 600 + seed, 0.3)));
    ScalarField gg = smooth(g, 700 + seed, 1.0);
    gg += -gg.max() - 0.05 * static_cast<double>(seed % 3);
    const FlowResult r = run_flow(gg, bg, p);
    CHECK(r.status == FlowStatus::Converged);
    CHECK(monitor_time_derivative_bound(r.trace, gg, bg).passed);
  }
}

TEST_CASE("time-derivative bound closed forms") {
  const Grid g = Grid::make({8, 8});
  const ScalarField minus_one(g, -1.0);
  const Background b1 = Background::balanced(2, minus_one);
  const FlowResult r1 = run_flow(minus_one, b1);
  CHECK(r1.trace.records.front().sup_ut == 0.0);
  CHECK(monitor_time_derivative_bound(r1.trace, minus_one, b1).passed);

  const Constant c;
  const FlowResult r2 = run_flow(c.g, c.bg);
  const auto check = monitor_time_derivative_bound(r2.trace, c.g, c.bg);
  CHECK(check.applicable);
  CHECK(check.worst_ratio == doctest::Approx(1.0 / 3.0));  // sup|u_t|(0) = 1, C1 = 3
  for (std::size_t i = 1; i < r2.trace.records.size(); ++i) {
    CHECK(r2.trace.records[i].sup_ut <= r2.trace.records[i - 1].sup_ut);
  }
}

TEST_CASE("decay constant") {
  const Grid g = Grid::make({8, 8});
  const ScalarField minus_one(g, -1.0);
  CHECK(decay_constant(minus_one, 0.0, 2) == doctest::Approx(2.0));
  // Lower bound on u enters as e^{-2 sup|u| / n}.
  CHECK(decay_constant(minus_one, std::log(2.0), 2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(decay_constant(ScalarField(g, 0.0), 0.0, 2), Error);
}

TEST_CASE("monitors flag a fabricated violation") {
  const Constant c;
  FlowTrace t;
  FlowRecord r0;
  r0.sup_ut = 1.0;
  FlowRecord r1 = r0;
  r1.t = 0.1;
  r1.sup_ut = 3.5;  // C1 = 3
  t.records = {r0, r1};
  const MonitorCheck m = monitor_time_derivative_bound(t, c.g, c.bg);
  CHECK_FALSE(m.passed);
  REQUIRE(m.first_violation.has_value());
  CHECK(*m.first_violation == 1);
  CHECK_FALSE(monitor_decay_envelope(t, c.g, c.bg).passed);
}

TEST_CASE("flow energy decreases along the balanced flow") {
  const Grid g = Grid::make({32, 32});
  const Background bg = Background::balanced(2, smooth(g, 71, 0.5) - 1.0);
  const ScalarField gg = smooth(g, 72, 0.8) - 0.3;  // sign-changing, still solvable
  const FlowResult r = run_flow(gg, bg);
  CHECK(r.dissipation.applicable);
  CHECK(r.dissipation.passed);
  for (std::size_t i = 1; i < r.trace.records.size(); ++i) {
    CHECK(r.trace.records[i].energy <= r.trace.records[i - 1].energy + 1e-14);
  }
}

TEST_CASE("dissipation monitor is not applicable with drift") {
  const Grid g = Grid::make({16, 16});
  const Background bg = Background::make(2, ScalarField(g, -1.0), rotated_gradient(smooth(g, 81, 0.2)));
  const FlowResult r = run_flow(ScalarField(g, -2.0), bg);
  CHECK(r.status == FlowStatus::Converged);
  CHECK_FALSE(r.dissipation.applicable);
}

TEST_CASE("flow parameters are validated") {
  const Constant c;
  FlowParams p;
  p.dt_init = 1.0;
  p.dt_max = 0.5;
  CHECK_THROWS_AS(run_flow(c.g, c.bg, p), Error);
  CHECK_THROWS_AS(step_imex(ScalarField(c.grid), 0.0, c.g, c.bg), Error);
}

#include <doctest.h>

#include <cmath>

#include "cyf/elliptic.hpp"
#include "cyf/flow.hpp"
#include "cyf/oracle.hpp"
#include "support.hpp"

using namespace cyf;
using cyf::test::discrete_eigenvalue;
using cyf::test::noise;
using cyf::test::sin_x;
using cyf::test::smooth;

namespace {

ScalarField fixture_g0(const Grid& g) {
  return ScalarField::from_function(g, [](std::span<const double> x) { return std::cos(test::kTwoPi * x[0]) - 1.0; });
}

ScalarField zero_mean(ScalarField f) { return f - mean(f); }

ErrorKind thrown_kind(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::IoError;
}

}  // namespace

TEST_CASE("solve_poisson") {
  const Grid g = Grid::make({64, 64});
  const Background flat = Background::balanced(2, ScalarField(g, -1.0));
  CHECK(sup_norm(solve_poisson(flat, ScalarField(g))) == 0.0);

  const ScalarField s = sin_x(g);
  CHECK(sup_norm(solve_poisson(flat, s) - (1.0 / discrete_eigenvalue(64)) * s) < 1e-12);

  CHECK(thrown_kind([&] { solve_poisson(flat, ScalarField(g, 1.0)); }) == ErrorKind::NonZeroMean);

  const Grid small = Grid::make({8, 8});
  const Background drift = Background::make(2, ScalarField(small, -1.0), test::noise_vector(small, 3));
  REQUIRE_FALSE(drift.is_balanced());
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const ScalarField rhs = zero_mean(noise(small, 50 + seed));
    const ScalarField f = solve_poisson(drift, rhs);
    CHECK(std::abs(integrate(f)) < 1e-12);
    CHECK(sup_norm(chern_laplacian(f, drift) - rhs) < 1e-9);
    CHECK(sup_norm(f - oracle::dense_solve_poisson(drift, rhs)) < 1e-9);
  }
}

TEST_CASE("residual closed forms") {
  const Grid g = Grid::make({16, 16});
  const ScalarField minus_one(g, -1.0);
  CHECK(sup_norm(residual(ScalarField(g), minus_one, Background::balanced(2, minus_one))) == 0.0);
  for (int n : {2, 3}) {
    const Background bg = Background::balanced(n, ScalarField(g, -2.0));
    const ScalarField u(g, 0.5 * n * std::log(2.0));
    CHECK(sup_norm(residual(u, minus_one, bg)) < 1e-15);
  }
}

TEST_CASE("apply_linearization") {
  const Grid g = Grid::make({16, 16});
  const Background bg = Background::make(2, smooth(g, 1, 0.3) - 1.0, rotated_gradient(smooth(g, 2, 0.2)));
  const ScalarField u = smooth(g, 3, 0.5);
  const ScalarField gg = smooth(g, 4, 0.5) - 1.0;
  CHECK(sup_norm(apply_linearization(u, ScalarField(g), gg, bg)) == 0.0);

  const ScalarField v = noise(g, 5);
  CHECK(sup_norm(apply_linearization(u, v, ScalarField(g), bg) + chern_laplacian(v, bg)) == 0.0);

  const double eps = 1e-6;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ScalarField dir = smooth(g, 100 + seed, 1.0);
    const ScalarField fd = (1.0 / (2.0 * eps)) * (residual(u + eps * dir, gg, bg) - residual(u - eps * dir, gg, bg));
    const ScalarField exact = apply_linearization(u, dir, gg, bg);
    CHECK(sup_norm(fd - exact) <= 1e-6 * sup_norm(exact));
  }
}

TEST_CASE("solve_linearized") {
  const Grid g = Grid::make({64, 64});
  const Background flat = Background::balanced(2, ScalarField(g, -1.0));
  const ScalarField minus_one(g, -1.0);
  const ScalarField zero(g);
  CHECK(sup_norm(solve_linearized(zero, minus_one, flat, zero)) == 0.0);

  // -laplacian + 2/n on the sine mode.
  const ScalarField s = sin_x(g);
  const double eig = -discrete_eigenvalue(64);
  CHECK(eig == doctest::Approx(39.4467).epsilon(1e-5));
  CHECK(sup_norm(solve_linearized(zero, minus_one, flat, s) - (1.0 / (eig + 1.0)) * s) < 1e-11);

  const Grid small = Grid::make({8, 8});
  const Background drift = Background::make(2, ScalarField(small, -1.0), test::noise_vector(small, 9));
  const ScalarField u = noise(small, 10, -0.5, 0.5);
  const ScalarField gg = noise(small, 11, -2.0, -0.1);
  const ScalarField rhs = noise(small, 12);
  const ScalarField v = solve_linearized(u, gg, drift, rhs);
  CHECK(sup_norm(v - oracle::dense_solve_linearized(u, gg, drift, rhs)) < 1e-9);

  // Round trip on random v for g <= 0.
  const ScalarField w = noise(small, 13);
  CHECK(sup_norm(solve_linearized(u, gg, drift, apply_linearization(u, w, gg, drift)) - w) < 1e-9);
}

TEST_CASE("newton closed forms") {
  const Grid g = Grid::make({32, 32});
  const ScalarField minus_one(g, -1.0);
  SolveOutcome out = newton_solve(minus_one, Background::balanced(2, minus_one), ScalarField(g));
  REQUIRE(out.converged());
  CHECK(out.iterations <= 1);
  CHECK(sup_norm(*out.u) == 0.0);

  out = newton_solve(minus_one, Background::balanced(2, ScalarField(g, -2.0)), ScalarField(g));
  REQUIRE(out.converged());
  CHECK(sup_norm(*out.u - std::log(2.0)) < 1e-10);
  CHECK(out.residual_sup <= 1e-10);
}

TEST_CASE("newton reports divergence instead of throwing") {
  const Grid g = Grid::make({16, 16});
  // Gamma > 0 with g < 0 constant: the integrated equation has no solution.
  const SolveOutcome out =
      newton_solve(ScalarField(g, -1.0), Background::balanced(2, ScalarField(g, 1.0)), ScalarField(g));
  CHECK_FALSE(out.converged());
  CHECK(out.reason != DivergeReason::None);
  CHECK_FALSE(out.u.has_value());

  const SolveOutcome huge =
      newton_solve(ScalarField(g, -1.0), Background::balanced(2, ScalarField(g, -1.0)), ScalarField(g, 800.0));
  CHECK(huge.reason == DivergeReason::Overflow);
}

TEST_CASE("newton agrees with the flow limit for nonconstant s0") {
  const Grid g = Grid::make({64, 64});
  const ScalarField s0 = smooth(g, 21, 0.6) - 1.0;  // mean -1
  const Background bg = Background::balanced(2, s0);
  CHECK(bg.gamma() == doctest::Approx(-1.0).epsilon(1e-12));
  const ScalarField gg(g, -1.0);
  const SolveOutcome out = newton_solve(gg, bg, ScalarField(g));
  REQUIRE(out.converged());
  const FlowResult flow = run_flow(gg, bg);
  REQUIRE(flow.status == FlowStatus::Converged);
  CHECK(sup_norm(flow.u_final - *out.u) < 1e-6);
}

TEST_CASE("solutions satisfy the integral identity and are unique for g < 0") {
  const Grid g = Grid::make({32, 32});
  const Background bg = Background::make(2, smooth(g, 31, 0.5) - 1.5, rotated_gradient(smooth(g, 32, 0.3)));
  const ScalarField gg = smooth(g, 33, 0.3) - 1.0;
  REQUIRE(gg.max() < 0.0);

  std::vector<ScalarField> sols;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SolveOutcome out = newton_solve(gg, bg, noise(g, 300 + seed, -2.0, 2.0));
    REQUIRE(out.converged());
    CHECK(std::abs(bg.gamma() - integrate(gg * conformal_factor(*out.u, 2))) < 1e-8);
    sols.push_back(*out.u);
  }
  for (std::size_t i = 0; i < sols.size(); ++i) {
    for (std::size_t j = i + 1; j < sols.size(); ++j) CHECK(sup_norm(sols[i] - sols[j]) < 1e-8);
  }
}

TEST_CASE("build_subsolution closed forms") {
  const Grid g = Grid::make({16, 16});
  Subsolution sub = build_subsolution(ScalarField(g, -1.0), Background::balanced(2, ScalarField(g, -1.0)));
  CHECK(sup_norm(sub.f) == 0.0);
  CHECK(sub.t0 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sup_norm(sub.phi + 1.0) < 1e-15);

  sub = build_subsolution(ScalarField(g, -4.0), Background::balanced(2, ScalarField(g, -1.0)));
  CHECK(sub.t0 == doctest::Approx(std::log(4.0) + 1.0).epsilon(1e-14));
  CHECK(sup_norm(sub.phi + (std::log(4.0) + 1.0)) < 1e-14);
  // -1 + 4 e^{-(ln 4 + 1)} = -1 + e^{-1}
  CHECK(residual(sub.phi, ScalarField(g, -4.0), Background::balanced(2, ScalarField(g, -1.0)))[0] ==
        doctest::Approx(-1.0 + std::exp(-1.0)).epsilon(1e-13));

  CHECK(thrown_kind([&] {
          build_subsolution(ScalarField(g, -1.0), Background::balanced(2, ScalarField(g, 0.5)));
        }) == ErrorKind::NotNegativeDegree);
}

TEST_CASE("sub-solution bounds solutions for sign-changing data") {
  const Grid g = Grid::make({32, 32});
  const Background bg = Background::balanced(2, smooth(g, 41, 0.3) - 1.0);
  const ScalarField cand = fixture_g0(g) + 0.4;  // lambda = 0.4, below the threshold
  REQUIRE(cand.max() > 0.0);
  const Subsolution sub = build_subsolution(cand, bg);
  CHECK(residual(sub.phi, cand, bg).max() < 0.0);
  const SolveOutcome out = newton_solve(cand, bg, ScalarField(g));
  REQUIRE(out.converged());
  CHECK((*out.u - sub.phi).min() >= -1e-8);
}

TEST_CASE("build_supersolution") {
  const Grid g = Grid::make({32, 32});
  const Background flat = Background::balanced(2, ScalarField(g, -1.0));

  // Constant case: g0 = -2, lambda1 = 0.5 gives g = -1.5 and u = ln(2/3) with s0 = -1.
  const SolveOutcome c = build_supersolution(ScalarField(g, -2.0), 0.0, 0.5, flat);
  REQUIRE(c.converged());
  CHECK(sup_norm(*c.u - std::log(1.0 / 1.5)) < 1e-10);

  const ScalarField g0 = fixture_g0(g);
  const SolveOutcome u2 = build_supersolution(g0, 0.2, 0.5, flat);
  REQUIRE(u2.converged());
  CHECK(residual(*u2.u, g0 + 0.2, flat).min() >= -1e-10);

  CHECK_FALSE(build_supersolution(g0, 0.2, 1.5, flat).converged());
  CHECK(thrown_kind([&] { build_supersolution(g0, 0.5, 0.5, flat); }) == ErrorKind::InvalidArgument);
}

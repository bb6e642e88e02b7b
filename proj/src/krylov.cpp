#include "cyf/krylov.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace cyf {
namespace {

double dot(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const ScalarField& a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, const ScalarField& x, ScalarField& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace

GmresResult gmres(const LinearMap& op, const LinearMap& precond, const ScalarField& b,
                  ScalarField& x, const GmresOptions& options) {
  GmresResult result;
  const double b_norm = norm(b);
  if (b_norm == 0.0) {
    x = ScalarField(b.grid());
    result.converged = true;
    return result;
  }
  const int m = options.restart;
  double previous_cycle_residual = std::numeric_limits<double>::infinity();

  while (result.iterations < options.max_iterations) {
    ScalarField r = b - op(x);
    double beta = norm(r);
    result.relative_residual = beta / b_norm;
    if (result.relative_residual <= options.relative_tol) {
      result.converged = true;
      return result;
    }
    // Stagnation across a full cycle means the operator is (nearly) singular
    // on the current Krylov space or we sit at the rounding floor.
    if (beta > 0.999 * previous_cycle_residual) break;
    previous_cycle_residual = beta;

    std::vector<ScalarField> basis;
    basis.reserve(static_cast<std::size_t>(m) + 1);
    basis.push_back((1.0 / beta) * r);
    std::vector<std::vector<double>> hess(static_cast<std::size_t>(m) + 1,
                                          std::vector<double>(static_cast<std::size_t>(m), 0.0));
    std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
    g[0] = beta;

    int k = 0;
    for (; k < m && result.iterations < options.max_iterations; ++k) {
      ++result.iterations;
      ScalarField w = op(precond(basis[k]));
      // Modified Gram-Schmidt, two passes.
      for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j <= k; ++j) {
          const double h = dot(w, basis[j]);
          hess[j][k] += h;
          axpy(-h, basis[j], w);
        }
      }
      const double h_next = norm(w);
      hess[k + 1][k] = h_next;
      for (int j = 0; j < k; ++j) {
        const double t = cs[j] * hess[j][k] + sn[j] * hess[j + 1][k];
        hess[j + 1][k] = -sn[j] * hess[j][k] + cs[j] * hess[j + 1][k];
        hess[j][k] = t;
      }
      const double denom = std::hypot(hess[k][k], hess[k + 1][k]);
      cs[k] = denom == 0.0 ? 1.0 : hess[k][k] / denom;
      sn[k] = denom == 0.0 ? 0.0 : hess[k + 1][k] / denom;
      hess[k][k] = denom;
      hess[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (h_next == 0.0 || std::abs(g[k + 1]) <= 0.1 * options.relative_tol * b_norm) {
        ++k;
        break;
      }
      basis.push_back((1.0 / h_next) * w);
    }

    // Back substitution for the least-squares coefficients.
    std::vector<double> y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= hess[i][j] * y[j];
      y[i] = hess[i][i] == 0.0 ? 0.0 : s / hess[i][i];
    }
    ScalarField z(b.grid());
    for (int j = 0; j < k; ++j) axpy(y[j], basis[j], z);
    x += precond(z);
  }

  ScalarField r = b - op(x);
  result.relative_residual = norm(r) / b_norm;
  result.converged = result.relative_residual <= options.relative_tol;
  return result;
}

}  // namespace cyf

#include "cyf/oracle.hpp"

#include <cmath>
#include <string>

#include "cyf/variational.hpp"

namespace cyf::oracle {
namespace {

void check_size(const Grid& grid) {
  if (grid.point_count() > kMaxPoints) {
    throw Error(ErrorKind::TooLarge, "dense oracle limited to 4096 points, grid has " +
                                         std::to_string(grid.point_count()));
  }
}

Eigen::VectorXd to_vector(const ScalarField& u) {
  return Eigen::Map<const Eigen::VectorXd>(u.values().data(), static_cast<Eigen::Index>(u.size()));
}

ScalarField to_field(const Grid& grid, const Eigen::VectorXd& v) {
  return ScalarField(grid, std::vector<double>(v.data(), v.data() + v.size()));
}

// Flat index of the periodic neighbour of `index` shifted by `offset` along `axis`.
std::size_t shifted(const Grid& grid, std::size_t index, int axis, int offset) {
  const int n = grid.size(axis);
  const int c = grid.coordinate(index, axis);
  const int moved = ((c + offset) % n + n) % n;
  return index + static_cast<std::size_t>(moved - c) * grid.stride(axis);
}

Eigen::MatrixXd plain_laplacian_matrix(const Grid& grid) {
  const auto p = static_cast<Eigen::Index>(grid.point_count());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t i = 0; i < grid.point_count(); ++i) {
    for (int a = 0; a < grid.dims(); ++a) {
      const double w = 1.0 / (grid.spacing(a) * grid.spacing(a));
      const auto row = static_cast<Eigen::Index>(i);
      m(row, static_cast<Eigen::Index>(shifted(grid, i, a, +1))) += w;
      m(row, static_cast<Eigen::Index>(shifted(grid, i, a, -1))) += w;
      m(row, row) -= 2.0 * w;
    }
  }
  return m;
}

Eigen::MatrixXd jacobian(const ScalarField& u, const ScalarField& g, const Background& bg,
                         const Eigen::MatrixXd& L) {
  Eigen::MatrixXd J = -L;
  const double k = 2.0 / bg.n();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto d = static_cast<Eigen::Index>(i);
    J(d, d) -= k * g[i] * std::exp(k * u[i]);
  }
  return J;
}

Eigen::VectorXd dense_residual(const Eigen::VectorXd& u, const ScalarField& g,
                               const Background& bg, const Eigen::MatrixXd& L) {
  Eigen::VectorXd F = -(L * u);
  const double k = 2.0 / bg.n();
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const auto s = static_cast<std::size_t>(i);
    F(i) += bg.s0()[s] - g[s] * std::exp(k * u(i));
  }
  return F;
}

}  // namespace

ScalarField DenseOperator::apply(const ScalarField& u) const {
  if (u.size() != size) throw Error(ErrorKind::GridMismatch, "operator size mismatch");
  return to_field(u.grid(), entries * to_vector(u));
}

DenseOperator dense_chern_laplacian(const Background& bg) {
  const Grid& grid = bg.grid();
  check_size(grid);
  DenseOperator op;
  op.size = grid.point_count();
  op.entries = plain_laplacian_matrix(grid);
  // Drift: -theta_a(x) (u(x + e_a) - u(x)) / h_a.
  for (std::size_t i = 0; i < grid.point_count(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (int a = 0; a < grid.dims(); ++a) {
      const double c = bg.theta()[a][i] / grid.spacing(a);
      op.entries(row, static_cast<Eigen::Index>(shifted(grid, i, a, +1))) -= c;
      op.entries(row, row) += c;
    }
  }
  return op;
}

ScalarField dense_solve_poisson(const Background& bg, const ScalarField& rhs) {
  const DenseOperator L = dense_chern_laplacian(bg);
  const auto p = static_cast<Eigen::Index>(L.size);
  // [L 1; 1^T 0] [f; c] = [rhs; 0]
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p + 1, p + 1);
  A.topLeftCorner(p, p) = L.entries;
  A.col(p).head(p).setOnes();
  A.row(p).head(p).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p + 1);
  b.head(p) = to_vector(rhs);
  const Eigen::VectorXd x = A.fullPivLu().solve(b);
  return to_field(rhs.grid(), x.head(p));
}

ScalarField dense_helmholtz(const ScalarField& f, double a) {
  check_size(f.grid());
  const Eigen::MatrixXd L = plain_laplacian_matrix(f.grid());
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(L.rows(), L.cols()) - a * L;
  return to_field(f.grid(), A.partialPivLu().solve(to_vector(f)));
}

ScalarField dense_solve_linearized(const ScalarField& u, const ScalarField& g, const Background& bg,
                                   const ScalarField& rhs) {
  const DenseOperator L = dense_chern_laplacian(bg);
  const Eigen::MatrixXd J = jacobian(u, g, bg, L.entries);
  return to_field(u.grid(), J.fullPivLu().solve(to_vector(rhs)));
}

SolveOutcome dense_solve_elliptic(const ScalarField& g, const Background& bg, const ScalarField& u0,
                                  const NewtonParams& params) {
  const DenseOperator L = dense_chern_laplacian(bg);
  const Grid& grid = bg.grid();
  const int n = bg.n();
  auto in_range = [n](const Eigen::VectorXd& v) {
    return v.allFinite() && 2.0 * v.cwiseAbs().maxCoeff() / n <= 700.0;
  };

  SolveOutcome out;
  Eigen::VectorXd u = to_vector(u0);
  if (!in_range(u)) {
    out.reason = DivergeReason::Overflow;
    return out;
  }
  Eigen::VectorXd F = dense_residual(u, g, bg, L.entries);
  double r = F.cwiseAbs().maxCoeff();
  for (int it = 0;; ++it) {
    out.iterations = it;
    out.residual_sup = r;
    if (r <= params.tol_residual) {
      out.status = SolveStatus::Converged;
      out.u = to_field(grid, u);
      return out;
    }
    if (it >= params.max_iter) {
      out.reason = DivergeReason::MaxIter;
      return out;
    }
    const Eigen::MatrixXd J = jacobian(to_field(grid, u), g, bg, L.entries);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (!lu.isInvertible() || lu.rcond() < 1e-14) {
      out.reason = DivergeReason::NearSingular;
      return out;
    }
    const Eigen::VectorXd step = lu.solve(-F);
    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h <= params.max_halvings; ++h, alpha *= params.damping) {
      const Eigen::VectorXd trial = u + alpha * step;
      if (!in_range(trial)) continue;
      const Eigen::VectorXd F_trial = dense_residual(trial, g, bg, L.entries);
      const double r_trial = F_trial.cwiseAbs().maxCoeff();
      if (r_trial < r) {
        u = trial;
        F = F_trial;
        r = r_trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.reason = DivergeReason::LineSearchStall;
      return out;
    }
  }
}

double fd_energy_gradient(const ScalarField& u, const ScalarField& g, const Background& bg,
                          const ScalarField& phi, double eps) {
  if (!(eps >= 1e-8 && eps <= 1e-4)) {
    throw Error(ErrorKind::InvalidArgument, "finite-difference step must lie in [1e-8, 1e-4]");
  }
  return (energy(u + eps * phi, g, bg) - energy(u - eps * phi, g, bg)) / (2.0 * eps);
}

}  // namespace cyf::oracle

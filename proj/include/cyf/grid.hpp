#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "cyf/error.hpp"

namespace cyf {

/// Periodic lattice on the unit torus [0,1)^d with d in 1..4.
///
/// Points are stored row-major (last axis fastest). Spacing along axis i is
/// 1/N_i, so the cell measures sum to one. Grid is a cheap value handle over
/// immutable shared data; two grids compare equal when their sizes match.
class Grid {
 public:
  static constexpr int kMaxDims = 4;

  /// Throws Error(InvalidSize) unless 1 <= sizes.size() <= 4 and every size is even and >= 4.
  static Grid make(std::vector<int> sizes);

  int dims() const { return static_cast<int>(data_->sizes.size()); }
  std::span<const int> sizes() const { return data_->sizes; }
  int size(int axis) const { return data_->sizes[axis]; }
  double spacing(int axis) const { return data_->spacing[axis]; }
  std::size_t stride(int axis) const { return data_->strides[axis]; }
  double cell_measure() const { return data_->cell_measure; }
  std::size_t point_count() const { return data_->points; }

  /// Integer coordinate of a flat index along one axis.
  int coordinate(std::size_t index, int axis) const {
    return static_cast<int>((index / data_->strides[axis]) % data_->sizes[axis]);
  }
  /// Physical coordinate x_i = j_i * h_i of a flat index.
  double position(std::size_t index, int axis) const {
    return coordinate(index, axis) * data_->spacing[axis];
  }

  bool operator==(const Grid& other) const {
    return data_ == other.data_ || data_->sizes == other.data_->sizes;
  }

 private:
  struct Data {
    std::vector<int> sizes;
    std::vector<double> spacing;
    std::vector<std::size_t> strides;
    double cell_measure = 1.0;
    std::size_t points = 1;
  };
  explicit Grid(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

  std::shared_ptr<const Data> data_;
};

/// One real value per grid point.
class ScalarField {
 public:
  explicit ScalarField(Grid grid, double value = 0.0)
      : grid_(std::move(grid)), values_(grid_.point_count(), value) {}
  ScalarField(Grid grid, std::vector<double> values);

  /// Samples f(x) where x holds the physical coordinates of each point.
  template <class F>
  static ScalarField from_function(const Grid& grid, F&& f) {
    ScalarField out(grid);
    double x[Grid::kMaxDims] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < grid.point_count(); ++i) {
      for (int a = 0; a < grid.dims(); ++a) x[a] = grid.position(i, a);
      out.values_[i] = f(std::span<const double>(x, static_cast<std::size_t>(grid.dims())));
    }
    return out;
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  bool is_finite() const;
  double max() const;
  double min() const;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(const ScalarField& other);
  ScalarField& operator+=(double c);
  ScalarField& operator*=(double c);

 private:
  Grid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(ScalarField a, const ScalarField& b);
ScalarField operator+(ScalarField a, double c);
ScalarField operator-(ScalarField a, double c);
ScalarField operator*(double c, ScalarField a);
ScalarField operator*(ScalarField a, double c);
ScalarField operator-(ScalarField a);

/// Pointwise map.
template <class F>
ScalarField map(const ScalarField& u, F&& f) {
  ScalarField out(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = f(u[i]);
  return out;
}

/// One scalar component per grid axis.
class VectorField {
 public:
  explicit VectorField(const Grid& grid);
  explicit VectorField(std::vector<ScalarField> components);

  const Grid& grid() const { return grid_; }
  int dims() const { return static_cast<int>(components_.size()); }
  const ScalarField& operator[](int axis) const { return components_[axis]; }
  ScalarField& operator[](int axis) { return components_[axis]; }

  bool is_zero() const;
  bool is_finite() const;

 private:
  Grid grid_;
  std::vector<ScalarField> components_;
};

VectorField operator-(VectorField a, const VectorField& b);

void require_same_grid(const Grid& a, const Grid& b);
void require_finite(const ScalarField& u, const char* what);

// Discrete calculus. gradient is the forward difference and divergence the
// backward difference, so that divergence(gradient(u)) == laplacian(u) and the
// pair is exactly adjoint under integrate().

ScalarField laplacian(const ScalarField& u);
VectorField gradient(const ScalarField& u);
ScalarField divergence(const VectorField& v);
/// gradient(u) . theta, pointwise.
ScalarField advect(const ScalarField& u, const VectorField& theta);
/// Divergence-free 2-D field from a stream function: (D2^- psi, -D1^- psi).
VectorField rotated_gradient(const ScalarField& psi);

/// Pairwise-tree sum of values times the cell measure.
double integrate(const ScalarField& u);
double integrate_dot(const VectorField& a, const VectorField& b);
double pairwise_sum(std::span<const double> values);

double sup_norm(const ScalarField& u);
double sup_norm(const VectorField& v);
double l2_norm(const ScalarField& u);
double mean(const ScalarField& u);

/// Solves (I - a*laplacian) u = f spectrally. Throws SolverFailure if the
/// sup-norm residual exceeds 1e-10 * max(1, sup|f|).
ScalarField helmholtz_solve(const ScalarField& f, double a);

}  // namespace cyf

#include "cyf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cyf/spectral.hpp"

namespace cyf {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidSize: return "InvalidSize";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::ProjectionFailure: return "ProjectionFailure";
    case ErrorKind::NonZeroMean: return "NonZeroMean";
    case ErrorKind::NearSingular: return "NearSingular";
    case ErrorKind::NotNegativeDegree: return "NotNegativeDegree";
    case ErrorKind::VerificationFailure: return "VerificationFailure";
    case ErrorKind::RequiresNegativeG: return "RequiresNegativeG";
    case ErrorKind::BadCandidate: return "BadCandidate";
    case ErrorKind::InconsistentThreshold: return "InconsistentThreshold";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Grid Grid::make(std::vector<int> sizes) {
  if (sizes.empty() || sizes.size() > static_cast<std::size_t>(kMaxDims)) {
    throw Error(ErrorKind::InvalidSize,
                "grid must have 1 to 4 axes, got " + std::to_string(sizes.size()));
  }
  for (int n : sizes) {
    if (n < 4 || n % 2 != 0) {
      throw Error(ErrorKind::InvalidSize,
                  "axis size must be even and >= 4, got " + std::to_string(n));
    }
  }
  auto data = std::make_shared<Data>();
  data->sizes = std::move(sizes);
  const std::size_t d = data->sizes.size();
  data->spacing.resize(d);
  data->strides.resize(d);
  std::size_t stride = 1;
  for (std::size_t a = d; a-- > 0;) {
    data->strides[a] = stride;
    stride *= static_cast<std::size_t>(data->sizes[a]);
    data->spacing[a] = 1.0 / data->sizes[a];
    data->cell_measure *= data->spacing[a];
  }
  data->points = stride;
  return Grid(std::move(data));
}

// ---------------------------------------------------------------------------
// Fields

ScalarField::ScalarField(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.point_count()) {
    throw Error(ErrorKind::GridMismatch, "value count " + std::to_string(values_.size()) +
                                             " does not match grid point count " +
                                             std::to_string(grid_.point_count()));
  }
}

bool ScalarField::is_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}
ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}
ScalarField& ScalarField::operator*=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= other.values_[i];
  return *this;
}
ScalarField& ScalarField::operator+=(double c) {
  for (double& v : values_) v += c;
  return *this;
}
ScalarField& ScalarField::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
ScalarField operator+(ScalarField a, double c) { return a += c; }
ScalarField operator-(ScalarField a, double c) { return a += -c; }
ScalarField operator*(double c, ScalarField a) { return a *= c; }
ScalarField operator*(ScalarField a, double c) { return a *= c; }
ScalarField operator-(ScalarField a) { return a *= -1.0; }

VectorField::VectorField(const Grid& grid) : grid_(grid) {
  components_.assign(static_cast<std::size_t>(grid.dims()), ScalarField(grid));
}

VectorField::VectorField(std::vector<ScalarField> components)
    : grid_(components.empty() ? throw Error(ErrorKind::InvalidArgument, "empty vector field")
                               : components.front().grid()),
      components_(std::move(components)) {
  if (static_cast<int>(components_.size()) != grid_.dims()) {
    throw Error(ErrorKind::GridMismatch, "vector field needs one component per axis");
  }
  for (const auto& c : components_) require_same_grid(grid_, c.grid());
}

bool VectorField::is_zero() const {
  return std::all_of(components_.begin(), components_.end(), [](const ScalarField& c) {
    return std::all_of(c.values().begin(), c.values().end(), [](double v) { return v == 0.0; });
  });
}

bool VectorField::is_finite() const {
  return std::all_of(components_.begin(), components_.end(),
                     [](const ScalarField& c) { return c.is_finite(); });
}

VectorField operator-(VectorField a, const VectorField& b) {
  require_same_grid(a.grid(), b.grid());
  for (int i = 0; i < a.dims(); ++i) a[i] -= b[i];
  return a;
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw Error(ErrorKind::GridMismatch, "fields live on different grids");
}

void require_finite(const ScalarField& u, const char* what) {
  if (!u.is_finite()) throw Error(ErrorKind::NonFinite, std::string(what) + " has non-finite values");
}

// ---------------------------------------------------------------------------
// Stencils

namespace {

// Calls f(i, i_plus, i_minus) for every point, with the periodic neighbours
// along `axis`. Each axis splits the array into contiguous blocks of N*stride.
template <class F>
void for_each_neighbor(const Grid& grid, int axis, F&& f) {
  const std::size_t s = grid.stride(axis);
  const std::size_t block = s * static_cast<std::size_t>(grid.size(axis));
  const std::size_t total = grid.point_count();
  for (std::size_t base = 0; base < total; base += block) {
    for (std::size_t k = 0; k < block; ++k) {
      const std::size_t plus = k + s < block ? k + s : k + s - block;
      const std::size_t minus = k >= s ? k - s : k + block - s;
      f(base + k, base + plus, base + minus);
    }
  }
}

}  // namespace

ScalarField laplacian(const ScalarField& u) {
  require_finite(u, "laplacian input");
  const Grid& grid = u.grid();
  ScalarField out(grid);
  auto in = u.values();
  auto res = out.values();
  for (int a = 0; a < grid.dims(); ++a) {
    const double w = 1.0 / (grid.spacing(a) * grid.spacing(a));
    for_each_neighbor(grid, a, [&](std::size_t i, std::size_t p, std::size_t m) {
      res[i] += w * ((in[p] - in[i]) - (in[i] - in[m]));
    });
  }
  return out;
}

VectorField gradient(const ScalarField& u) {
  require_finite(u, "gradient input");
  const Grid& grid = u.grid();
  VectorField out(grid);
  auto in = u.values();
  for (int a = 0; a < grid.dims(); ++a) {
    const double inv_h = 1.0 / grid.spacing(a);
    auto res = out[a].values();
    for_each_neighbor(grid, a, [&](std::size_t i, std::size_t p, std::size_t) {
      res[i] = (in[p] - in[i]) * inv_h;
    });
  }
  return out;
}

ScalarField divergence(const VectorField& v) {
  const Grid& grid = v.grid();
  ScalarField out(grid);
  auto res = out.values();
  for (int a = 0; a < grid.dims(); ++a) {
    require_finite(v[a], "divergence input");
    const double inv_h = 1.0 / grid.spacing(a);
    auto in = v[a].values();
    for_each_neighbor(grid, a, [&](std::size_t i, std::size_t, std::size_t m) {
      res[i] += (in[i] - in[m]) * inv_h;
    });
  }
  return out;
}

ScalarField advect(const ScalarField& u, const VectorField& theta) {
  require_same_grid(u.grid(), theta.grid());
  const Grid& grid = u.grid();
  ScalarField out(grid);
  auto in = u.values();
  auto res = out.values();
  for (int a = 0; a < grid.dims(); ++a) {
    const double inv_h = 1.0 / grid.spacing(a);
    auto th = theta[a].values();
    for_each_neighbor(grid, a, [&](std::size_t i, std::size_t p, std::size_t) {
      res[i] += th[i] * (in[p] - in[i]) * inv_h;
    });
  }
  return out;
}

VectorField rotated_gradient(const ScalarField& psi) {
  const Grid& grid = psi.grid();
  if (grid.dims() != 2) {
    throw Error(ErrorKind::InvalidArgument, "stream functions are defined on 2-D grids only");
  }
  VectorField out(grid);
  auto in = psi.values();
  // component 0 gets D_2^- psi, component 1 gets -D_1^- psi
  for (int a = 0; a < 2; ++a) {
    const int target = 1 - a;
    const double sign = a == 1 ? 1.0 : -1.0;
    const double inv_h = 1.0 / grid.spacing(a);
    auto res = out[target].values();
    for_each_neighbor(grid, a, [&](std::size_t i, std::size_t, std::size_t m) {
      res[i] = sign * (in[i] - in[m]) * inv_h;
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reductions

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 16;
  if (values.size() <= kLeaf) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double integrate(const ScalarField& u) { return pairwise_sum(u.values()) * u.grid().cell_measure(); }

double integrate_dot(const VectorField& a, const VectorField& b) {
  require_same_grid(a.grid(), b.grid());
  ScalarField acc(a.grid());
  for (int i = 0; i < a.dims(); ++i) acc += a[i] * b[i];
  return integrate(acc);
}

double mean(const ScalarField& u) { return integrate(u); }

double sup_norm(const ScalarField& u) {
  double m = 0.0;
  for (double v : u.values()) m = std::max(m, std::abs(v));
  return m;
}

double sup_norm(const VectorField& v) {
  double m = 0.0;
  for (int a = 0; a < v.dims(); ++a) m = std::max(m, sup_norm(v[a]));
  return m;
}

double l2_norm(const ScalarField& u) { return std::sqrt(integrate(u * u)); }

ScalarField helmholtz_solve(const ScalarField& f, double a) {
  if (!(a >= 0.0) || !std::isfinite(a)) {
    throw Error(ErrorKind::InvalidArgument, "helmholtz coefficient must be finite and >= 0");
  }
  require_finite(f, "helmholtz right-hand side");
  if (a == 0.0) return f;
  ScalarField u = spectral::apply_multiplier(f, [a](double mu) { return 1.0 / (1.0 + a * mu); });
  ScalarField r = u - a * laplacian(u) - f;
  const double tol = 1e-10 * std::max(1.0, sup_norm(f));
  if (sup_norm(r) > tol) {
    throw Error(ErrorKind::SolverFailure,
                "helmholtz residual " + std::to_string(sup_norm(r)) + " above tolerance");
  }
  return u;
}

}  // namespace cyf

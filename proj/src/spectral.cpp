#include "cyf/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace cyf::spectral {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
class Plan {
 public:
  explicit Plan(const Grid& grid) : real_count_(grid.point_count()) {
    const int rank = grid.dims();
    std::vector<int> n(grid.sizes().begin(), grid.sizes().end());
    complex_count_ = real_count_ / n.back() * (n.back() / 2 + 1);

    std::vector<double> real(real_count_);
    std::vector<std::complex<double>> spec(complex_count_);
    auto* spec_ptr = reinterpret_cast<fftw_complex*>(spec.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_r2c(rank, n.data(), real.data(), spec_ptr, flags);
    backward_ = fftw_plan_dft_c2r(rank, n.data(), spec_ptr, real.data(), flags);

    // Eigenvalues of -laplacian in the r2c half-spectrum layout.
    symbol_.resize(complex_count_);
    std::vector<int> half = n;
    half.back() = n.back() / 2 + 1;
    for (std::size_t idx = 0; idx < complex_count_; ++idx) {
      std::size_t rest = idx;
      double mu = 0.0;
      for (int a = rank - 1; a >= 0; --a) {
        const int k = static_cast<int>(rest % half[a]);
        rest /= half[a];
        const double h = grid.spacing(a);
        const double s = std::sin(std::numbers::pi * k / n[a]);
        mu += 4.0 * s * s / (h * h);
      }
      symbol_[idx] = mu;
    }
  }
  ~Plan() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  ScalarField apply(const ScalarField& f, const std::function<double(double)>& m) const {
    std::vector<double> real(f.values().begin(), f.values().end());
    std::vector<std::complex<double>> spec(complex_count_);
    auto* spec_ptr = reinterpret_cast<fftw_complex*>(spec.data());
    fftw_execute_dft_r2c(forward_, real.data(), spec_ptr);
    const double scale = 1.0 / static_cast<double>(real_count_);
    for (std::size_t i = 0; i < complex_count_; ++i) spec[i] *= m(symbol_[i]) * scale;
    fftw_execute_dft_c2r(backward_, spec_ptr, real.data());
    return ScalarField(f.grid(), std::move(real));
  }

 private:
  std::size_t real_count_;
  std::size_t complex_count_ = 0;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
  std::vector<double> symbol_;
};

const Plan& plan_for(const Grid& grid) {
  static std::mutex mutex;
  static std::map<std::vector<int>, std::unique_ptr<Plan>> cache;
  std::lock_guard lock(mutex);
  std::vector<int> key(grid.sizes().begin(), grid.sizes().end());
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<Plan>(grid)).first;
  return *it->second;
}

}  // namespace

ScalarField apply_multiplier(const ScalarField& f, const std::function<double(double)>& multiplier) {
  return plan_for(f.grid()).apply(f, multiplier);
}

ScalarField inverse_laplacian(const ScalarField& f) {
  return apply_multiplier(f, [](double mu) { return mu > 0.0 ? -1.0 / mu : 0.0; });
}

ScalarField shifted_inverse(const ScalarField& f, double c) {
  return apply_multiplier(f, [c](double mu) { return 1.0 / (c + mu); });
}

double symbol(const Grid& grid, int axis, int k) {
  const double h = grid.spacing(axis);
  const double s = std::sin(std::numbers::pi * k / grid.size(axis));
  return 4.0 * s * s / (h * h);
}

}  // namespace cyf::spectral

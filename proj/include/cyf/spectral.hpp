#pragma once

#include <functional>

#include "cyf/grid.hpp"

namespace cyf::spectral {

/// Applies a Fourier multiplier m(mu) to f, where mu >= 0 is the eigenvalue of
/// -laplacian for each discrete mode (mu = 0 for the constant mode).
ScalarField apply_multiplier(const ScalarField& f, const std::function<double(double)>& multiplier);

/// Zero-mean solution of laplacian(u) = f - mean(f).
ScalarField inverse_laplacian(const ScalarField& f);

/// Solves (c - laplacian) u = f for c > 0.
ScalarField shifted_inverse(const ScalarField& f, double c);

/// Eigenvalue of -laplacian for the mode sin(2 pi k x_axis).
double symbol(const Grid& grid, int axis, int k);

}  // namespace cyf::spectral

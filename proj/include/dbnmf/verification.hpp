#pragma once

// Independent oracles for the tests: brute-force 1-D minimization and a
// two-sided majorizer check. Nothing here reuses the solver kernels.

#include <functional>
#include <random>

#include "dbnmf/matrix.hpp"

namespace dbnmf::verify {

/// Argmin of a unimodal objective on [lo, hi]: `points`-point grid, zoomed
/// around the best node `levels` times, then a parabolic vertex step.
/// Throws NumericalError if the objective is non-finite on a grid node.
double brute_force_scalar_min(const std::function<double(double)>& objective, double lo, double hi,
                              int levels = 6, int points = 1000);

struct MajorizerReport {
    double tangency_error = 0.0; ///< |u(x_ref) - f(x_ref)|
    double worst_margin = 0.0;   ///< min over samples of u(y) - f(y)
    int samples = 0;
    double tol = 0.0;            ///< 1e-9 scaled by max(1, |f(x_ref)|)
    bool passed = false;
};

/// Tangency at x_ref and domination u(y) >= f(y) - tol on `samples` draws of y.
/// `u` is the surrogate already built at x_ref.
MajorizerReport check_majorizer(const std::function<double(const DenseMatrix&)>& f,
                                const std::function<double(const DenseMatrix&)>& u, const DenseMatrix& x_ref,
                                int samples, const std::function<DenseMatrix(std::mt19937_64&)>& sampler,
                                std::uint64_t seed = 1, double tol = 1e-9);

} // namespace dbnmf::verify

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "dbnmf/matrix.hpp"

namespace dbnmf {

/// The beta values with closed-form updates. Every kernel is beta-specific,
/// so beta is a closed set rather than a free real.
enum class Beta { zero, half, one, three_halves, two };

double beta_value(Beta beta) noexcept;

/// Maps 0, 0.5, 1, 1.5, 2 to the enumeration; anything else is a ConfigError.
Beta beta_from_value(double value);

std::string to_string(Beta beta);

/// Saturating stand-in for an infinite divergence. Finite, so sums and
/// traces stay totally ordered.
inline constexpr double kInfiniteDivergence = std::numeric_limits<double>::max();

inline double saturating_add(double a, double b) noexcept
{
    const double s = a + b;
    return (s > kInfiniteDivergence) ? kInfiniteDivergence : s;
}

/// d_beta(x, y) for x >= 0, y > 0.
template <class Real>
Real beta_div_scalar(Real x, Real y, Beta beta)
{
    if (x == y) return Real(0);
    switch (beta) {
    case Beta::zero: {
        if (!(x > Real(0)) || !(y > Real(0))) return Real(kInfiniteDivergence);
        const Real r = x / y;
        return std::max(Real(0), r - std::log(r) - Real(1));
    }
    case Beta::one: {
        if (!(y > Real(0))) return Real(kInfiniteDivergence);
        if (x == Real(0)) return y;
        return std::max(Real(0), x * std::log(x / y) - x + y);
    }
    case Beta::half: {
        if (!(y > Real(0))) return Real(kInfiniteDivergence);
        // -4 (sqrt x - sqrt y / 2 - x / (2 sqrt y)) without cancellation
        const Real d = std::sqrt(x) - std::sqrt(y);
        return Real(2) * d * d / std::sqrt(y);
    }
    case Beta::three_halves: {
        if (y < Real(0)) return Real(kInfiniteDivergence);
        // (4/3) (x^1.5 + y^1.5 / 2 - 1.5 x sqrt y) in factored form
        const Real sx = std::sqrt(x);
        const Real sy = std::sqrt(y);
        return Real(2) / Real(3) * (sx - sy) * (sx - sy) * (Real(2) * sx + sy);
    }
    case Beta::two: {
        const Real d = x - y;
        return Real(0.5) * d * d;
    }
    }
    return Real(kInfiniteDivergence);
}

/// D_beta(A, B) = sum_ij d_beta(A_ij, B_ij). Accepts expressions such as W * H.
template <class DerivedA, class DerivedB>
double beta_div_matrix(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                       Beta beta)
{
    require_same_shape(a, b, "beta_div_matrix");
    const Matrix<double> av = a.template cast<double>();
    const Matrix<double> bv = b.template cast<double>();
    double total = 0.0;
    for (Index i = 0; i < av.rows(); ++i) {
        double row = 0.0;
        for (Index j = 0; j < av.cols(); ++j) row = saturating_add(row, beta_div_scalar(av(i, j), bv(i, j), beta));
        total = saturating_add(total, row);
    }
    return total;
}

/// Convex / concave / constant split d = check + hat + bar used by the
/// auxiliary-function majorizers. `check` is convex in u, `hat` concave in u,
/// `bar` independent of u.
struct DecompositionTerms {
    std::function<double(double, double)> check;
    std::function<double(double, double)> hat;
    std::function<double(double)> bar;
    std::function<double(double, double)> check_prime; ///< d check / du
    std::function<double(double, double)> hat_prime;   ///< d hat / du
};

DecompositionTerms decomposition_terms(Beta beta);

} // namespace dbnmf

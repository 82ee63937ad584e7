#pragma once

// Scalar kernels behind the closed-form updates: principal-branch Lambert W,
// the one-real-root depressed cubic, and a bracketed Newton solver.

#include <cmath>
#include <limits>
#include <type_traits>
#include <utility>

#include "dbnmf/errors.hpp"

namespace dbnmf {

struct Bracket {
    double lo;
    double hi;
};

/// Value and derivative of a scalar function at one point.
struct ValueSlope {
    double value;
    double slope;
};

/// Principal branch W0 on [0, inf): returns w >= 0 with w e^w = x.
/// Halley iteration from log1p(x) (x <= e) or log x - log log x (x > e).
template <class Real>
Real lambert_w0(Real x)
{
    if (std::isnan(x) || x < Real(0)) throw DomainError("lambert_w0: argument must be >= 0");
    if (x == Real(0)) return Real(0);
    if (std::isinf(x)) return x;

    Real w;
    if (x <= Real(2.718281828459045)) {
        w = std::log1p(x);
    } else {
        const Real l1 = std::log(x);
        const Real l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }
    for (int it = 0; it < 64; ++it) {
        const Real ew = std::exp(w);
        const Real f = w * ew - x;
        const Real wp1 = w + Real(1);
        const Real denom = ew * wp1 - (w + Real(2)) * f / (Real(2) * wp1);
        const Real step = f / denom;
        w -= step;
        if (!(std::abs(step) > Real(4) * std::numeric_limits<Real>::epsilon() * (Real(1) + std::abs(w)))) break;
    }
    return w;
}

/// W0(exp(log_x)) without forming exp(log_x); solves w + log w = log_x.
/// Used when the Lambert argument would overflow a double.
template <class Real>
Real lambert_w0_from_log(Real log_x)
{
    if (std::isnan(log_x)) throw DomainError("lambert_w0_from_log: NaN argument");
    if (log_x == -std::numeric_limits<Real>::infinity()) return Real(0);
    if (std::isinf(log_x)) return log_x;
    if (log_x < Real(1)) return lambert_w0(std::exp(log_x));

    Real w = log_x - std::log(log_x);
    if (w < Real(0.5)) w = Real(0.5);
    for (int it = 0; it < 64; ++it) {
        const Real f = w + std::log(w) - log_x;
        const Real d1 = Real(1) + Real(1) / w;
        const Real d2 = -Real(1) / (w * w);
        const Real step = f / (d1 - f * d2 / (Real(2) * d1));
        w -= step;
        if (!(std::abs(step) > Real(4) * std::numeric_limits<Real>::epsilon() * (Real(1) + std::abs(w)))) break;
    }
    return w;
}

/// Unique real root of z^3 + a z + b = 0 when b^2/4 + a^3/27 > 0.
/// Cardano with the larger-magnitude cube root taken first, so the second
/// root term is formed as -a/(3u) and never by subtraction.
template <class Real>
Real cubic_one_real_root(Real a, Real b)
{
    const Real disc = b * b / Real(4) + a * a * a / Real(27);
    if (!(disc > Real(0))) {
        throw PreconditionError("cubic_one_real_root: discriminant must be positive");
    }
    const Real q = -b / Real(2);
    const Real s = std::sqrt(disc);
    const Real u = std::cbrt(q + std::copysign(s, q));
    Real z = (u != Real(0)) ? u - a / (Real(3) * u) : Real(0);
    // one Newton polish on the cubic itself
    const Real d = Real(3) * z * z + a;
    if (d != Real(0)) {
        const Real corr = (z * z * z + a * z + b) / d;
        if (std::isfinite(corr)) z -= corr;
    }
    return z;
}

namespace detail {

template <class F>
ValueSlope evaluate(F& f, double x, double lo, double hi)
{
    using R = std::invoke_result_t<F&, double>;
    if constexpr (std::is_same_v<std::decay_t<R>, ValueSlope>) {
        return f(x);
    } else {
        // value-only callable: central secant slope, falling back to bisection
        const double v = f(x);
        const double h = std::max(1e-7 * (hi - lo), 1e-12 * (1.0 + std::abs(x)));
        const double slope = (f(x + h) - f(x - h)) / (2.0 * h);
        return {v, slope};
    }
}

} // namespace detail

/// Root of a continuous, strictly monotone f on [lo, hi] with a sign change.
/// Newton steps are taken only when they stay inside the current bracket and
/// shrink it fast enough; otherwise the step is a bisection. `f` returns
/// either a double or a ValueSlope.
template <class F>
double solve_monotone_scalar(F&& f, Bracket bracket, double tol,
                             double guess = std::numeric_limits<double>::quiet_NaN())
{
    if (!(tol > 0.0)) throw ConfigError("solve_monotone_scalar: tol must be positive");
    if (!(bracket.lo < bracket.hi)) throw ConfigError("solve_monotone_scalar: empty bracket");

    double lo = bracket.lo;
    double hi = bracket.hi;
    const ValueSlope flo = detail::evaluate(f, lo, lo, hi);
    const ValueSlope fhi = detail::evaluate(f, hi, lo, hi);
    if (std::abs(flo.value) <= tol) return lo;
    if (std::abs(fhi.value) <= tol) return hi;
    if ((flo.value > 0.0) == (fhi.value > 0.0)) {
        throw NoRootError("solve_monotone_scalar: no sign change on bracket");
    }
    const bool increasing = fhi.value > 0.0;

    double x = (std::isfinite(guess) && guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
    double best_x = x;
    double best_abs = std::numeric_limits<double>::infinity();
    double prev_width = hi - lo;

    for (int it = 0; it < 400; ++it) {
        const ValueSlope fx = detail::evaluate(f, x, lo, hi);
        if (!std::isfinite(fx.value)) throw NumericalError("solve_monotone_scalar: non-finite value");
        if (std::abs(fx.value) < best_abs) {
            best_abs = std::abs(fx.value);
            best_x = x;
        }
        if (best_abs <= tol) break;

        if ((fx.value > 0.0) == increasing) hi = x;
        else lo = x;
        if (!(hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) ||
            hi - lo <= std::numeric_limits<double>::denorm_min()) {
            break;
        }

        double next = std::numeric_limits<double>::quiet_NaN();
        if (fx.slope != 0.0 && std::isfinite(fx.slope)) next = x - fx.value / fx.slope;
        const double width = hi - lo;
        if (!(next > lo && next < hi) || width > 0.5 * prev_width) {
            next = 0.5 * (lo + hi);
        }
        prev_width = width;
        if (next == x) next = 0.5 * (lo + hi);
        x = next;
    }
    return best_x;
}

/// Grows a bracket from `from` in the direction of `step` until f changes
/// sign relative to f(from). With a finite `limit` the probes approach the
/// limit geometrically instead of doubling the step (for functions with a
/// pole at `limit`).
template <class F>
Bracket expand_bracket(F&& f, double from, double step,
                       double limit = std::numeric_limits<double>::quiet_NaN(),
                       int max_probes = 1100)
{
    auto value = [&](double x) {
        using R = std::invoke_result_t<F&, double>;
        if constexpr (std::is_same_v<std::decay_t<R>, ValueSlope>) return f(x).value;
        else return static_cast<double>(f(x));
    };
    const double f0 = value(from);
    if (f0 == 0.0) return {from, from + std::abs(step)};
    const bool positive = f0 > 0.0;
    double prev = from;
    double s = step;
    for (int k = 1; k <= max_probes; ++k) {
        double probe;
        if (std::isfinite(limit)) {
            probe = limit + (from - limit) * std::ldexp(1.0, -k);
            if (probe == limit || probe == prev) break;
        } else {
            probe = prev + s;
            s *= 2.0;
            if (!std::isfinite(probe)) break;
        }
        const double fp = value(probe);
        if ((fp > 0.0) != positive || fp == 0.0) {
            return probe < prev ? Bracket{probe, prev} : Bracket{prev, probe};
        }
        prev = probe;
    }
    throw NoRootError("expand_bracket: no sign change found");
}

} // namespace dbnmf

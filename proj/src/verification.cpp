#include "dbnmf/verification.hpp"

#include <cmath>
#include <limits>

namespace dbnmf::verify {

double brute_force_scalar_min(const std::function<double(double)>& objective, double lo, double hi, int levels,
                              int points)
{
    if (!(lo < hi) || points < 3 || levels < 1) throw ConfigError("brute_force_scalar_min: bad grid");
    double a = lo;
    double b = hi;
    double best_x = lo;
    for (int level = 0; level < levels; ++level) {
        const double h = (b - a) / (points - 1);
        double best_f = std::numeric_limits<double>::infinity();
        int best_i = 0;
        for (int i = 0; i < points; ++i) {
            const double x = (i == points - 1) ? b : a + i * h;
            const double fx = objective(x);
            if (!std::isfinite(fx)) throw NumericalError("brute_force_scalar_min: non-finite objective on grid");
            if (fx < best_f) {
                best_f = fx;
                best_i = i;
            }
        }
        best_x = a + best_i * h;
        const double na = std::max(lo, best_x - h);
        const double nb = std::min(hi, best_x + h);
        a = na;
        b = nb;
        if (!(a < b)) break;
    }

    // parabola through three nearby points
    const double h = 1e-4 * std::max(1.0, std::abs(best_x));
    if (best_x - h >= lo && best_x + h <= hi) {
        const double fm = objective(best_x - h);
        const double f0 = objective(best_x);
        const double fp = objective(best_x + h);
        const double curv = fp - 2.0 * f0 + fm;
        if (curv > 0.0 && std::isfinite(curv)) {
            const double step = 0.5 * h * (fm - fp) / curv;
            if (std::abs(step) <= h) {
                const double x = best_x + step;
                if (objective(x) <= f0 + 1e-15 * std::abs(f0)) best_x = x;
            }
        }
    }
    return best_x;
}

MajorizerReport check_majorizer(const std::function<double(const DenseMatrix&)>& f,
                                const std::function<double(const DenseMatrix&)>& u, const DenseMatrix& x_ref,
                                int samples, const std::function<DenseMatrix(std::mt19937_64&)>& sampler,
                                std::uint64_t seed, double tol)
{
    MajorizerReport r;
    const double f_ref = f(x_ref);
    r.tol = tol * std::max(1.0, std::abs(f_ref));
    r.tangency_error = std::abs(u(x_ref) - f_ref);
    r.worst_margin = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(seed);
    for (int s = 0; s < samples; ++s) {
        const DenseMatrix y = sampler(rng);
        r.worst_margin = std::min(r.worst_margin, u(y) - f(y));
        ++r.samples;
    }
    r.passed = r.tangency_error <= r.tol && r.worst_margin >= -r.tol;
    return r;
}

} // namespace dbnmf::verify

#include "dbnmf/updates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dbnmf/parallel.hpp"
#include "dbnmf/scalar.hpp"

namespace dbnmf {

namespace {

/// Entrywise M^(beta - 2) and M^(beta - 1) without a generic pow.
DenseMatrix pow_beta_minus_two(const DenseMatrix& m, Beta beta)
{
    switch (beta) {
    case Beta::zero: return m.array().square().inverse().matrix();
    case Beta::half: return (m.array() * m.array().sqrt()).inverse().matrix();
    case Beta::one: return m.array().inverse().matrix();
    case Beta::three_halves: return m.array().sqrt().inverse().matrix();
    case Beta::two: return DenseMatrix::Ones(m.rows(), m.cols());
    }
    return {};
}

DenseMatrix pow_beta_minus_one(const DenseMatrix& m, Beta beta)
{
    switch (beta) {
    case Beta::zero: return m.array().inverse().matrix();
    case Beta::half: return m.array().sqrt().inverse().matrix();
    case Beta::one: return DenseMatrix::Ones(m.rows(), m.cols());
    case Beta::three_halves: return m.array().sqrt().matrix();
    case Beta::two: return m;
    }
    return {};
}

/// Exponent of the standard MU: 1/(2 - beta) below 1, 1 on [1, 2].
double mu_exponent(Beta beta)
{
    switch (beta) {
    case Beta::zero: return 0.5;
    case Beta::half: return 2.0 / 3.0;
    default: return 1.0;
    }
}

/// One entry of the row-simplex H update as a function of the row multiplier.
/// Returns h(mu) = max(floor, h_tilde * t(mu)) and dh/dmu.
struct SimplexEntry {
    double h_tilde;
    double num;
    double den;

    ValueSlope at(double mu, Beta beta, double floor) const
    {
        double h = 0.0;
        double slope = 0.0;
        switch (beta) {
        case Beta::zero:
        case Beta::half: {
            const double p = (beta == Beta::zero) ? 0.5 : 2.0 / 3.0;
            const double shifted = den + mu;
            if (num > 0.0) {
                h = h_tilde * std::pow(num / shifted, p);
                slope = -p * h / shifted;
            }
            break;
        }
        case Beta::one: {
            const double shifted = den + mu;
            h = h_tilde * num / shifted;
            slope = -h / shifted;
            break;
        }
        case Beta::three_halves: {
            const double root = std::sqrt(mu * mu + 4.0 * den * num);
            const double s = (mu >= 0.0) ? ((root + mu > 0.0) ? 2.0 * num / (mu + root) : 0.0)
                                         : (root - mu) / (2.0 * den);
            h = h_tilde * s * s;
            slope = (root > 0.0) ? -2.0 * h / root : 0.0;
            break;
        }
        case Beta::two: {
            const double t = (num - mu) / den;
            if (t > 0.0) {
                h = h_tilde * t;
                slope = -h_tilde / den;
            }
            break;
        }
        }
        if (h < floor) return {floor, 0.0};
        return {h, slope};
    }
};

bool has_pole(Beta beta) { return beta == Beta::zero || beta == Beta::half || beta == Beta::one; }

/// Solves sum_j h_j(mu) = 1 for one row and writes the normalized row.
bool solve_simplex_row(const std::vector<SimplexEntry>& entries, Beta beta, double floor,
                       Eigen::Ref<RowVector<double>> out)
{
    auto row_sum = [&](double mu) {
        ValueSlope acc{-1.0, 0.0};
        for (const auto& e : entries) {
            const ValueSlope v = e.at(mu, beta, floor);
            acc.value += v.value;
            acc.slope += v.slope;
        }
        return acc;
    };

    double min_den = std::numeric_limits<double>::infinity();
    double max_den = 0.0;
    for (const auto& e : entries) {
        min_den = std::min(min_den, e.den);
        max_den = std::max(max_den, e.den);
    }
    const double step = std::max(1.0, max_den);

    Bracket bracket{};
    const double g0 = row_sum(0.0).value;
    if (g0 == 0.0) {
        bracket = {-step, step};
    } else if (g0 > 0.0) {
        bracket = expand_bracket(row_sum, 0.0, step);
    } else if (has_pole(beta)) {
        bracket = expand_bracket(row_sum, 0.0, -step, -min_den);
    } else {
        bracket = expand_bracket(row_sum, 0.0, -step);
    }
    const double mu = (g0 == 0.0) ? 0.0 : solve_monotone_scalar(row_sum, bracket, 1e-15);

    double total = 0.0;
    for (std::size_t j = 0; j < entries.size(); ++j) {
        out(static_cast<Index>(j)) = entries[j].at(mu, beta, floor).value;
        total += out(static_cast<Index>(j));
    }
    if (!(total > 0.0) || !std::isfinite(total)) return false;
    out /= total;
    return true;
}

} // namespace

DenseMatrix update_h_simplex(const DenseMatrix& W, const DenseMatrix& Y, const DenseMatrix& H_tilde, Beta beta,
                             double floor, KernelDiagnostics* diag)
{
    if (W.cols() != H_tilde.rows() || W.rows() != Y.rows() || H_tilde.cols() != Y.cols()) {
        throw DimensionError("update_h_simplex: W " + shape_string(W.rows(), W.cols()) + ", H " +
                             shape_string(H_tilde.rows(), H_tilde.cols()) + ", Y " +
                             shape_string(Y.rows(), Y.cols()) + " do not chain");
    }
    const DenseMatrix V = W * H_tilde;
    const DenseMatrix num = W.transpose() * (Y.array() * pow_beta_minus_two(V, beta).array()).matrix();
    const DenseMatrix den = W.transpose() * pow_beta_minus_one(V, beta);

    DenseMatrix H = H_tilde;
    const Index r = H_tilde.rows();
    const Index n = H_tilde.cols();
    std::vector<char> locked(static_cast<std::size_t>(r), 0);
    std::vector<char> unsolved(static_cast<std::size_t>(r), 0);
    std::vector<char> fallback(static_cast<std::size_t>(r), 0);

    parallel_rows(r, [&](Index k) {
        const auto k_ = static_cast<std::size_t>(k);
        if (!(num.row(k).array() > 0.0).any()) {
            locked[k_] = 1;
            return;
        }
        if (beta == Beta::one) {
            // den is row-constant (column sums of W), so the multiplier only
            // rescales: normalize the MU numerator.
            const RowVector<double> scaled = H_tilde.row(k).array() * num.row(k).array();
            const double s = scaled.sum();
            if (s > 0.0 && std::isfinite(s) && (floor <= 0.0 || (scaled.array() / s).minCoeff() >= floor)) {
                H.row(k) = scaled / s;
                return;
            }
            fallback[k_] = 1;
        }
        std::vector<SimplexEntry> entries(static_cast<std::size_t>(n));
        for (Index j = 0; j < n; ++j) entries[static_cast<std::size_t>(j)] = {H_tilde(k, j), num(k, j), den(k, j)};
        try {
            if (!solve_simplex_row(entries, beta, floor, H.row(k))) {
                H.row(k) = H_tilde.row(k);
                unsolved[k_] = 1;
            }
        } catch (const NoRootError&) {
            H.row(k) = H_tilde.row(k);
            unsolved[k_] = 1;
        }
    });

    if (diag != nullptr) {
        for (Index k = 0; k < r; ++k) {
            diag->locked_rows += locked[static_cast<std::size_t>(k)];
            diag->unsolved_rows += unsolved[static_cast<std::size_t>(k)];
            diag->fallback_entries += fallback[static_cast<std::size_t>(k)];
        }
    }
    return H;
}

namespace closed_form {

double kl_entry(double a, double b, double lambda)
{
    if (!(b > 0.0)) return std::exp(-a / lambda);
    const double log_arg = std::log(b / lambda) + a / lambda;
    double w;
    if (log_arg > 700.0) {
        w = lambert_w0_from_log(log_arg);
    } else {
        w = lambert_w0(std::exp(log_arg));
    }
    if (!(w > 0.0)) return std::exp(-a / lambda);
    return b / (lambda * w);
}

double three_halves_entry(double a, double b, double c)
{
    const double x = (c + std::sqrt(c * c + 4.0 * a * b)) / (2.0 * a);
    return x * x;
}

double itakura_saito_entry(double a, double c, double lambda)
{
    return (lambda + std::sqrt(lambda * lambda + 4.0 * a * c)) / (2.0 * c);
}

double half_entry(double a, double b, double c, bool* used_fallback)
{
    // x = sqrt(w) solves c x^3 - b x^2 - a = 0
    auto f = [&](double x) { return ValueSlope{c * x * x * x - b * x * x - a, 3.0 * c * x * x - 2.0 * b * x}; };

    double x = std::numeric_limits<double>::quiet_NaN();
    try {
        const double p = -b / c;
        const double r = -a / c;
        const double depressed_a = -p * p / 3.0;
        const double depressed_b = (2.0 * p * p * p + 27.0 * r) / 27.0;
        x = cubic_one_real_root(depressed_a, depressed_b) - p / 3.0;
        for (int it = 0; it < 2; ++it) {
            const ValueSlope v = f(x);
            if (v.slope > 0.0) x -= v.value / v.slope;
        }
    } catch (const PreconditionError&) {
        x = std::numeric_limits<double>::quiet_NaN();
    }

    const double lo = b / c;
    if (!(x >= lo) || !std::isfinite(x)) {
        if (used_fallback != nullptr) *used_fallback = true;
        x = lo;
        if (a > 0.0 && f(lo).value < 0.0) {
            double hi = lo + std::cbrt(a / c);
            while (!(f(hi).value > 0.0)) hi = 2.0 * hi + std::numeric_limits<double>::min();
            x = solve_monotone_scalar(f, {lo, hi}, std::numeric_limits<double>::min());
        }
    }
    return x * x;
}

} // namespace closed_form

DenseMatrix update_w_inner(const InnerWContext& ctx, Beta beta, double floor, KernelDiagnostics* diag)
{
    const DenseMatrix& Y = ctx.Y;
    const DenseMatrix& Wt = ctx.W_tilde;
    const DenseMatrix& H = ctx.H;
    if (Wt.cols() != H.rows() || Wt.rows() != Y.rows() || H.cols() != Y.cols()) {
        throw DimensionError("update_w_inner: W, H, Y do not chain");
    }
    require_same_shape(Wt, ctx.W_bar, "update_w_inner");
    if (beta == Beta::two) throw ConfigError("inner-layer W update is not available for beta = 2");
    const double lambda = ctx.lambda_ratio;
    if (!(lambda > 0.0)) throw ConfigError("update_w_inner: lambda ratio must be positive");

    const DenseMatrix V = Wt * H;
    const DenseMatrix num = (Y.array() * pow_beta_minus_two(V, beta).array()).matrix() * H.transpose();
    const DenseMatrix den = pow_beta_minus_one(V, beta) * H.transpose();

    DenseMatrix W(Wt.rows(), Wt.cols());
    std::vector<Index> fallbacks(static_cast<std::size_t>(Wt.rows()), 0);
    parallel_rows(Wt.rows(), [&](Index i) {
        for (Index k = 0; k < Wt.cols(); ++k) {
            const double wt = Wt(i, k);
            const double wb = ctx.W_bar(i, k);
            double w = 0.0;
            switch (beta) {
            case Beta::one:
                w = closed_form::kl_entry(den(i, k) - lambda * std::log(wb), wt * num(i, k), lambda);
                break;
            case Beta::three_halves:
                w = closed_form::three_halves_entry(den(i, k) / std::sqrt(wt) + 2.0 * lambda,
                                                    std::sqrt(wt) * num(i, k), 2.0 * lambda * std::sqrt(wb));
                break;
            case Beta::zero:
                w = closed_form::itakura_saito_entry(num(i, k) * wt * wt, den(i, k) + lambda / wb, lambda);
                break;
            case Beta::half: {
                bool fb = false;
                w = closed_form::half_entry(num(i, k) * wt * std::sqrt(wt), 2.0 * lambda,
                                            den(i, k) + 2.0 * lambda / std::sqrt(wb), &fb);
                fallbacks[static_cast<std::size_t>(i)] += fb ? 1 : 0;
                break;
            }
            case Beta::two: break;
            }
            W(i, k) = std::max(floor, w);
        }
    });
    if (diag != nullptr) {
        for (Index f : fallbacks) diag->fallback_entries += f;
    }
    return W;
}

DenseMatrix update_w_terminal(const DenseMatrix& Y, const DenseMatrix& W_tilde, const DenseMatrix& H, Beta beta,
                              double floor)
{
    if (W_tilde.cols() != H.rows() || W_tilde.rows() != Y.rows() || H.cols() != Y.cols()) {
        throw DimensionError("update_w_terminal: W " + shape_string(W_tilde.rows(), W_tilde.cols()) + ", H " +
                             shape_string(H.rows(), H.cols()) + ", Y " + shape_string(Y.rows(), Y.cols()) +
                             " do not chain");
    }
    const DenseMatrix V = W_tilde * H;
    const DenseMatrix num = (Y.array() * pow_beta_minus_two(V, beta).array()).matrix() * H.transpose();
    const DenseMatrix den = pow_beta_minus_one(V, beta) * H.transpose();
    const double gamma = mu_exponent(beta);

    DenseMatrix W(W_tilde.rows(), W_tilde.cols());
    parallel_rows(W.rows(), [&](Index i) {
        for (Index k = 0; k < W.cols(); ++k) {
            double w = W_tilde(i, k);
            if (den(i, k) > 0.0) {
                const double ratio = num(i, k) / den(i, k);
                w *= (gamma == 1.0) ? ratio : std::pow(ratio, gamma);
            }
            W(i, k) = std::max(floor, w);
        }
    });
    return W;
}

DenseMatrix update_h_mu(const DenseMatrix& W, const DenseMatrix& Y, const DenseMatrix& H_tilde, Beta beta,
                        double floor)
{
    const DenseMatrix Yt = Y.transpose();
    const DenseMatrix Ht = H_tilde.transpose();
    const DenseMatrix Wt = W.transpose();
    return update_w_terminal(Yt, Ht, Wt, beta, floor).transpose();
}

double beta_majorizer_w(const DenseMatrix& Y, const DenseMatrix& W, const DenseMatrix& W_tilde,
                        const DenseMatrix& H, Beta beta)
{
    require_same_shape(W, W_tilde, "beta_majorizer_w");
    if (W.cols() != H.rows() || W.rows() != Y.rows() || H.cols() != Y.cols()) {
        throw DimensionError("beta_majorizer_w: W, H, Y do not chain");
    }
    const DecompositionTerms terms = decomposition_terms(beta);
    const DenseMatrix V = W_tilde * H;
    double total = 0.0;
    for (Index i = 0; i < Y.rows(); ++i) {
        for (Index j = 0; j < Y.cols(); ++j) {
            const double y = Y(i, j);
            const double v = V(i, j);
            double convex_part = 0.0;
            double linear = 0.0;
            for (Index k = 0; k < W.cols(); ++k) {
                const double weight = W_tilde(i, k) * H(k, j) / v;
                if (weight > 0.0) convex_part += weight * terms.check(y, v * W(i, k) / W_tilde(i, k));
                linear += H(k, j) * (W(i, k) - W_tilde(i, k));
            }
            total += convex_part + terms.hat_prime(y, v) * linear + terms.hat(y, v) + terms.bar(y);
        }
    }
    return total;
}

double beta_majorizer_h(const DenseMatrix& Y, const DenseMatrix& W, const DenseMatrix& H,
                        const DenseMatrix& H_tilde, Beta beta)
{
    // D(Y, W H) = D(Y^T, H^T W^T)
    return beta_majorizer_w(Y.transpose(), H.transpose(), H_tilde.transpose(), W.transpose(), beta);
}

} // namespace dbnmf

#include "dbnmf/divergence.hpp"

#include <cmath>

namespace dbnmf {

double beta_value(Beta beta) noexcept
{
    switch (beta) {
    case Beta::zero: return 0.0;
    case Beta::half: return 0.5;
    case Beta::one: return 1.0;
    case Beta::three_halves: return 1.5;
    case Beta::two: return 2.0;
    }
    return 1.0;
}

Beta beta_from_value(double value)
{
    if (value == 0.0) return Beta::zero;
    if (value == 0.5) return Beta::half;
    if (value == 1.0) return Beta::one;
    if (value == 1.5) return Beta::three_halves;
    if (value == 2.0) return Beta::two;
    throw ConfigError("unsupported beta " + std::to_string(value) + " (expected 0, 0.5, 1, 1.5 or 2)");
}

std::string to_string(Beta beta)
{
    switch (beta) {
    case Beta::zero: return "0";
    case Beta::half: return "0.5";
    case Beta::one: return "1";
    case Beta::three_halves: return "1.5";
    case Beta::two: return "2";
    }
    return "?";
}

DecompositionTerms decomposition_terms(Beta beta)
{
    DecompositionTerms t;
    switch (beta) {
    case Beta::zero:
        t.check = [](double v, double u) { return v / u; };
        t.hat = [](double, double u) { return std::log(u); };
        // The u-independent remainder of v/u - log(v/u) - 1.
        t.bar = [](double v) { return -std::log(v) - 1.0; };
        t.check_prime = [](double v, double u) { return -v / (u * u); };
        t.hat_prime = [](double, double u) { return 1.0 / u; };
        return t;
    case Beta::half:
        // beta in (-inf, 1) \ {0}: v u^(b-1)/(1-b), u^b/b, v^b/(b(b-1))
        t.check = [](double v, double u) { return 2.0 * v / std::sqrt(u); };
        t.hat = [](double, double u) { return 2.0 * std::sqrt(u); };
        t.bar = [](double v) { return -4.0 * std::sqrt(v); };
        t.check_prime = [](double v, double u) { return -v / (u * std::sqrt(u)); };
        t.hat_prime = [](double, double u) { return 1.0 / std::sqrt(u); };
        return t;
    case Beta::one:
    case Beta::three_halves:
    case Beta::two: {
        const double b = beta_value(beta);
        t.check = [beta](double v, double u) { return beta_div_scalar(v, u, beta); };
        t.hat = [](double, double) { return 0.0; };
        t.bar = [](double) { return 0.0; };
        t.check_prime = [b](double v, double u) { return std::pow(u, b - 1.0) - v * std::pow(u, b - 2.0); };
        t.hat_prime = [](double, double) { return 0.0; };
        return t;
    }
    }
    throw ConfigError("decomposition_terms: unsupported beta");
}

} // namespace dbnmf

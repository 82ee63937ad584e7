#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "dbnmf/divergence.hpp"
#include "dbnmf/model.hpp"

namespace dbnmf::testing {

inline DenseMatrix uniform_matrix(Index rows, Index cols, std::mt19937_64& rng, double lo = 0.1, double hi = 1.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    DenseMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// X = W_1 H_1, W_1 = W_2 H_2, ... with row-simplex H and positive factors.
inline DeepState exact_chain(Index m, Index n, const std::vector<Index>& ranks, std::mt19937_64& rng)
{
    DeepState s;
    const Index L = static_cast<Index>(ranks.size());
    s.W.resize(ranks.size());
    s.H.resize(ranks.size());
    for (Index l = 0; l < L; ++l) {
        const Index cols = (l == 0) ? n : ranks[static_cast<std::size_t>(l - 1)];
        DenseMatrix H = uniform_matrix(ranks[static_cast<std::size_t>(l)], cols, rng, 0.2, 1.0);
        normalize_rows(H);
        s.H[static_cast<std::size_t>(l)] = H;
    }
    s.W.back() = uniform_matrix(m, ranks.back(), rng, 0.5, 2.0);
    for (Index l = L - 2; l >= 0; --l) {
        s.W[static_cast<std::size_t>(l)] = s.W[static_cast<std::size_t>(l + 1)] * s.H[static_cast<std::size_t>(l + 1)];
    }
    s.X = s.W[0] * s.H[0];
    return s;
}

/// Scalar objectives whose minimizers the entrywise inner W updates return.
/// Derivatives: a - b/w + lambda log w; a sqrt w - b/sqrt w - c;
/// c - lambda/w - a/w^2; c - b/sqrt w - a w^(-3/2).
inline double kl_scalar_objective(double w, double a, double b, double lambda)
{
    return a * w - b * std::log(w) + lambda * (w * std::log(w) - w);
}

inline double three_halves_scalar_objective(double w, double a, double b, double c)
{
    return 2.0 / 3.0 * a * w * std::sqrt(w) - 2.0 * b * std::sqrt(w) - c * w;
}

inline double itakura_saito_scalar_objective(double w, double a, double c, double lambda)
{
    return c * w - lambda * std::log(w) + a / w;
}

inline double half_scalar_objective(double w, double a, double b, double c)
{
    return c * w - 2.0 * b * std::sqrt(w) + 2.0 * a / std::sqrt(w);
}

/// Grows hi from 1 until a convex objective increases between hi/2 and hi.
template <class F>
double upper_bracket(F&& f)
{
    double hi = 1.0;
    while (!(f(hi) > f(0.5 * hi)) && hi < 1e12) hi *= 2.0;
    return hi;
}

} // namespace dbnmf::testing

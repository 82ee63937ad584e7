#include "doctest.h"

#include <cmath>

#include "dbnmf/divergence.hpp"

using namespace dbnmf;

namespace {
const Beta all_betas[] = {Beta::zero, Beta::half, Beta::one, Beta::three_halves, Beta::two};
}

TEST_CASE("scalar divergence values")
{
    CHECK(beta_div_scalar(2.0, 2.0, Beta::one) == 0.0);
    CHECK(beta_div_scalar(3.0, 1.0, Beta::two) == doctest::Approx(2.0));
    CHECK(beta_div_scalar(1.0, 2.0, Beta::zero) == doctest::Approx(0.1931471805599453).epsilon(1e-12));
    CHECK(beta_div_scalar(0.0, 2.0, Beta::one) == doctest::Approx(2.0));
}

TEST_CASE("matrix divergence values")
{
    DenseMatrix a(1, 2), b(1, 2);
    a << 2, 1;
    b << 1, 1;
    CHECK(beta_div_matrix(a, b, Beta::one) == doctest::Approx(0.386294361119891).epsilon(1e-12));
    DenseMatrix c(1, 1), d(1, 1);
    c << 4;
    d << 1;
    CHECK(beta_div_matrix(c, d, Beta::three_halves) == doctest::Approx(10.0 / 3.0).epsilon(1e-12));
    for (Beta beta : all_betas) CHECK(beta_div_matrix(a, a, beta) == 0.0);
}

TEST_CASE("matrix divergence accepts products and checks shapes")
{
    DenseMatrix W = DenseMatrix::Constant(3, 2, 0.5);
    DenseMatrix H = DenseMatrix::Constant(2, 4, 1.0);
    DenseMatrix X = W * H;
    CHECK(beta_div_matrix(X, W * H, Beta::one) == 0.0);
    CHECK_THROWS_AS(beta_div_matrix(X, W, Beta::one), DimensionError);
}

TEST_CASE("divergence is nonnegative and vanishes only on the diagonal")
{
    for (Beta beta : all_betas) {
        for (int i = 1; i <= 20; ++i) {
            for (int j = 1; j <= 20; ++j) {
                const double x = 0.25 * i;
                const double y = 0.25 * j;
                const double d = beta_div_scalar(x, y, beta);
                if (i == j) CHECK(d == doctest::Approx(0.0).epsilon(1e-14));
                else CHECK(d > 0.0);
            }
        }
    }
}

TEST_CASE("decomposition terms sum to the divergence")
{
    for (Beta beta : {Beta::zero, Beta::half, Beta::one, Beta::three_halves}) {
        const DecompositionTerms t = decomposition_terms(beta);
        for (int i = 1; i <= 20; ++i) {
            for (int j = 1; j <= 20; ++j) {
                const double v = 0.3 * i;
                const double u = 0.3 * j;
                const double sum = t.check(v, u) + t.hat(v, u) + t.bar(v);
                CHECK(sum == doctest::Approx(beta_div_scalar(v, u, beta)).epsilon(1e-10).scale(1.0));
            }
        }
    }
}

TEST_CASE("decomposition terms per beta")
{
    const DecompositionTerms kl = decomposition_terms(Beta::one);
    CHECK(kl.hat(2.0, 3.0) == 0.0);
    CHECK(kl.bar(2.0) == 0.0);
    CHECK(kl.check(2.0, 3.0) == doctest::Approx(beta_div_scalar(2.0, 3.0, Beta::one)));

    const DecompositionTerms is = decomposition_terms(Beta::zero);
    CHECK(is.check(2.0, 3.0) == doctest::Approx(2.0 / 3.0));
    CHECK(is.hat(2.0, 3.0) == doctest::Approx(std::log(3.0)));

    const DecompositionTerms half = decomposition_terms(Beta::half);
    CHECK(half.check(4.0, 1.0) == doctest::Approx(8.0));
    CHECK(half.hat(4.0, 1.0) == doctest::Approx(2.0));
    CHECK(half.check(4.0, 1.0) + half.hat(4.0, 1.0) + half.bar(4.0) ==
          doctest::Approx(beta_div_scalar(4.0, 1.0, Beta::half)));
}

TEST_CASE("convex and concave parts by midpoint inequality")
{
    for (Beta beta : {Beta::zero, Beta::half, Beta::one, Beta::three_halves}) {
        const DecompositionTerms t = decomposition_terms(beta);
        for (double v : {0.1, 1.0, 5.0}) {
            for (double u1 : {0.2, 1.0, 3.0}) {
                for (double u2 : {0.5, 2.0, 7.0}) {
                    const double m = 0.5 * (u1 + u2);
                    CHECK(t.check(v, m) <= 0.5 * (t.check(v, u1) + t.check(v, u2)) + 1e-12);
                    CHECK(t.hat(v, m) >= 0.5 * (t.hat(v, u1) + t.hat(v, u2)) - 1e-12);
                }
            }
        }
    }
}

TEST_CASE("beta values round trip and unknown values are rejected")
{
    for (Beta beta : all_betas) CHECK(beta_from_value(beta_value(beta)) == beta);
    CHECK_THROWS_AS(beta_from_value(0.7), ConfigError);
}

#include "doctest.h"

#include <cmath>
#include <random>

#include "dbnmf/scalar.hpp"
#include "dbnmf/updates.hpp"
#include "dbnmf/verification.hpp"
#include "support.hpp"

using namespace dbnmf;
using namespace dbnmf::testing;

namespace {

const Beta inner_betas[] = {Beta::zero, Beta::half, Beta::one, Beta::three_halves};

double relative_gap(const DenseMatrix& a, const DenseMatrix& b)
{
    return ((a - b).array().abs() / b.array().abs()).maxCoeff();
}

} // namespace

TEST_CASE("simplex H step reduces to a normalized MU for KL")
{
    DenseMatrix W(2, 1), Ht(1, 2), Y(2, 2);
    W << 1, 1;
    Ht << 0.5, 0.5;
    Y << 0.6, 0.4, 0.6, 0.4;
    const DenseMatrix H = update_h_simplex(W, Y, Ht, Beta::one);
    CHECK(H(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(H(0, 1) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("simplex H step keeps exact factors")
{
    std::mt19937_64 rng(4);
    for (Beta beta : inner_betas) {
        const DeepState s = exact_chain(6, 5, {3}, rng);
        const DenseMatrix H = update_h_simplex(s.W[0], s.X, s.H[0], beta);
        CHECK((H - s.H[0]).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("simplex H step matches a brute-force minimizer of its majorizer")
{
    std::mt19937_64 rng(15);
    const DenseMatrix W = uniform_matrix(3, 2, rng, 0.2, 1.0);
    const DenseMatrix Y = uniform_matrix(3, 2, rng, 0.2, 1.0);
    DenseMatrix Ht = uniform_matrix(2, 2, rng, 0.2, 1.0);
    normalize_rows(Ht);
    const DenseMatrix H = update_h_simplex(W, Y, Ht, Beta::three_halves);
    for (Index k = 0; k < 2; ++k) {
        auto surrogate = [&](double t) {
            DenseMatrix probe = H;
            probe(k, 0) = t;
            probe(k, 1) = 1.0 - t;
            return beta_majorizer_h(Y, W, probe, Ht, Beta::three_halves);
        };
        const double t = verify::brute_force_scalar_min(surrogate, 1e-9, 1.0 - 1e-9);
        CHECK(std::abs(H(k, 0) - t) <= 1e-5);
    }
}

TEST_CASE("simplex H rows sum to one and never raise the divergence")
{
    std::mt19937_64 rng(8);
    for (Beta beta : inner_betas) {
        for (int trial = 0; trial < 20; ++trial) {
            const DenseMatrix Y = uniform_matrix(7, 6, rng);
            const DenseMatrix W = uniform_matrix(7, 3, rng);
            DenseMatrix Ht = uniform_matrix(3, 6, rng);
            normalize_rows(Ht);
            const DenseMatrix H = update_h_simplex(W, Y, Ht, beta);
            CHECK((H.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-10);
            CHECK(H.minCoeff() >= 0.0);
            CHECK(beta_majorizer_h(Y, W, H, Ht, beta) <= beta_majorizer_h(Y, W, Ht, Ht, beta) + 1e-10);
            CHECK(beta_div_matrix(Y, W * H, beta) <= beta_div_matrix(Y, W * Ht, beta) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("KL inner entry at a=0, b=1, lambda=1")
{
    const double w = closed_form::kl_entry(0.0, 1.0, 1.0);
    CHECK(w == doctest::Approx(1.0 / 0.5671432904097838).epsilon(1e-12));
    CHECK(std::abs(1.0 / w - std::log(w)) <= 1e-12);
}

TEST_CASE("KL inner entry tends to exp(-a/lambda) as b vanishes")
{
    CHECK(closed_form::kl_entry(2.0, 1e-300, 0.5) == doctest::Approx(std::exp(-4.0)).epsilon(1e-9));
    CHECK(closed_form::kl_entry(2.0, 0.0, 0.5) == doctest::Approx(std::exp(-4.0)).epsilon(1e-12));
}

TEST_CASE("KL inner entry survives overflowing Lambert arguments")
{
    const double w = closed_form::kl_entry(900.0, 1.0, 1.0);
    CHECK(w > 0.0);
    CHECK(std::abs(900.0 - (1.0 / w - std::log(w))) <= 1e-12 * 900.0);
}

TEST_CASE("closed-form entries match brute-force scalar minimization")
{
    std::mt19937_64 rng(33);
    for (int k = 0; k < 50; ++k) {
        const double a = uniform(rng, 0.1, 3.0);
        const double b = uniform(rng, 0.1, 3.0);
        const double c = uniform(rng, 0.1, 3.0);
        const double lam = uniform(rng, 0.1, 3.0);

        auto kl = [&](double w) { return kl_scalar_objective(w, a, b, lam); };
        CHECK(closed_form::kl_entry(a, b, lam) ==
              doctest::Approx(verify::brute_force_scalar_min(kl, 1e-12, upper_bracket(kl))).epsilon(1e-6));

        auto th = [&](double w) { return three_halves_scalar_objective(w, a, b, c); };
        CHECK(closed_form::three_halves_entry(a, b, c) ==
              doctest::Approx(verify::brute_force_scalar_min(th, 1e-12, upper_bracket(th))).epsilon(1e-6));

        auto is = [&](double w) { return itakura_saito_scalar_objective(w, a, c, lam); };
        CHECK(closed_form::itakura_saito_entry(a, c, lam) ==
              doctest::Approx(verify::brute_force_scalar_min(is, 1e-12, upper_bracket(is))).epsilon(1e-6));

        auto hf = [&](double w) { return half_scalar_objective(w, a, b, c); };
        CHECK(closed_form::half_entry(a, b, c) ==
              doctest::Approx(verify::brute_force_scalar_min(hf, 1e-12, upper_bracket(hf))).epsilon(1e-6));
    }
}

TEST_CASE("inner W step is a fixed point at exact factorizations")
{
    std::mt19937_64 rng(12);
    for (Beta beta : inner_betas) {
        const DeepState s = exact_chain(6, 5, {3}, rng);
        const InnerWContext ctx{s.X, s.W[0], s.H[0], s.W[0], 0.7};
        CHECK(relative_gap(update_w_inner(ctx, beta), s.W[0]) <= 1e-8);
    }
}

TEST_CASE("inner W step never raises the block objective")
{
    std::mt19937_64 rng(19);
    for (Beta beta : inner_betas) {
        for (int trial = 0; trial < 20; ++trial) {
            const DenseMatrix Y = uniform_matrix(6, 5, rng);
            const DenseMatrix Wt = uniform_matrix(6, 3, rng);
            DenseMatrix H = uniform_matrix(3, 5, rng);
            normalize_rows(H);
            const DenseMatrix Wbar = uniform_matrix(6, 3, rng);
            const double lam = uniform(rng, 0.1, 2.0);
            const DenseMatrix W = update_w_inner({Y, Wt, H, Wbar, lam}, beta);
            CHECK(W.minCoeff() > 0.0);
            auto block = [&](const DenseMatrix& M) {
                return beta_div_matrix(Y, M * H, beta) + lam * beta_div_matrix(M, Wbar, beta);
            };
            auto surrogate = [&](const DenseMatrix& M) {
                return beta_majorizer_w(Y, M, Wt, H, beta) + lam * beta_div_matrix(M, Wbar, beta);
            };
            CHECK(surrogate(W) <= surrogate(Wt) + 1e-10);
            CHECK(block(W) <= block(Wt) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("inner W step rejects beta = 2")
{
    const DenseMatrix M = DenseMatrix::Constant(2, 2, 0.5);
    CHECK_THROWS_AS(update_w_inner({M, M, M, M, 1.0}, Beta::two), ConfigError);
}

TEST_CASE("terminal W step")
{
    DenseMatrix Y(1, 1), W(1, 1), H(1, 1);
    Y << 2;
    W << 1;
    H << 1;
    CHECK(update_w_terminal(Y, W, H, Beta::one)(0, 0) == doctest::Approx(2.0));

    std::mt19937_64 rng(2);
    const DeepState s = exact_chain(5, 4, {2}, rng);
    CHECK(relative_gap(update_w_terminal(s.X, s.W[0], s.H[0], Beta::one), s.W[0]) <= 1e-12);

    const DenseMatrix u = uniform_matrix(4, 1, rng);
    const DenseMatrix v = uniform_matrix(1, 3, rng);
    CHECK(relative_gap(update_w_terminal(u * v, u, v, Beta::two), u) <= 1e-12);
}

TEST_CASE("terminal W and MU H steps never raise the divergence")
{
    std::mt19937_64 rng(27);
    for (Beta beta : {Beta::zero, Beta::half, Beta::one, Beta::three_halves, Beta::two}) {
        const DenseMatrix Y = uniform_matrix(6, 5, rng);
        const DenseMatrix W = uniform_matrix(6, 3, rng);
        const DenseMatrix H = uniform_matrix(3, 5, rng);
        const DenseMatrix W2 = update_w_terminal(Y, W, H, beta);
        CHECK(beta_div_matrix(Y, W2 * H, beta) <= beta_div_matrix(Y, W * H, beta) * (1.0 + 1e-12));
        const DenseMatrix H2 = update_h_mu(W, Y, H, beta);
        CHECK(beta_div_matrix(Y, W * H2, beta) <= beta_div_matrix(Y, W * H, beta) * (1.0 + 1e-12));
    }
}

TEST_CASE("floor is respected")
{
    DenseMatrix W(2, 1), Ht(1, 2), Y(2, 2);
    W << 1, 1;
    Ht << 0.5, 0.5;
    Y << 1.0, 0.0, 1.0, 0.0;
    const DenseMatrix H = update_h_simplex(W, Y, Ht, Beta::one, 1e-6);
    CHECK(H.minCoeff() >= 1e-6 * (1.0 - 1e-12));
    CHECK(H.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

#include "doctest.h"

#include <cmath>
#include <random>

#include "dbnmf/minvol.hpp"
#include "dbnmf/verification.hpp"
#include "support.hpp"

using namespace dbnmf;
using namespace dbnmf::testing;

namespace {

DenseMatrix simplex_cols(Index m, Index r, std::mt19937_64& rng)
{
    DenseMatrix W = uniform_matrix(m, r, rng, 0.1, 1.0);
    normalize_cols(W);
    return W;
}

struct Instance {
    DenseMatrix Y, W_ref, H, W_bar, Z, U;
};

Instance random_instance(Index m, Index r, Index n, std::mt19937_64& rng)
{
    Instance in;
    in.Y = uniform_matrix(m, n, rng);
    in.W_ref = simplex_cols(m, r, rng);
    in.H = uniform_matrix(r, n, rng);
    in.W_bar = simplex_cols(m, r, rng);
    in.Z = simplex_cols(m, r, rng);
    in.U = uniform_matrix(m, r, rng, -0.05, 0.05);
    return in;
}

} // namespace

TEST_CASE("log-det majorizer is tangent at the reference")
{
    std::mt19937_64 rng(1);
    const DenseMatrix W_ref = uniform_matrix(5, 3, rng);
    const LogDetContext ctx = make_logdet_context(W_ref, 0.1);
    CHECK(logdet_majorizer(W_ref, ctx, W_ref) == doctest::Approx(log_det_gram(W_ref, 0.1)).epsilon(1e-10));
}

TEST_CASE("log-det majorizer dominates nearby points")
{
    std::mt19937_64 rng(2);
    const DenseMatrix W_ref = uniform_matrix(5, 3, rng);
    const LogDetContext ctx = make_logdet_context(W_ref, 0.1);
    for (int k = 0; k < 50; ++k) {
        const DenseMatrix W = (W_ref + uniform_matrix(5, 3, rng, -0.3, 0.3)).cwiseMax(0.0);
        CHECK(logdet_majorizer(W, ctx, W_ref) >= log_det_gram(W, 0.1) - 1e-8);
    }
}

TEST_CASE("log-det of orthonormal columns through the context")
{
    DenseMatrix Q = DenseMatrix::Zero(4, 2);
    Q(0, 0) = Q(3, 1) = 1.0;
    CHECK(make_logdet_context(Q, 0.1).logdet_ref == doctest::Approx(2.0 * std::log(1.1)).epsilon(1e-12));
}

TEST_CASE("W step entries decrease in the column multiplier")
{
    std::mt19937_64 rng(3);
    const Instance in = random_instance(4, 2, 6, rng);
    const LogDetContext ld = make_logdet_context(in.W_ref, 0.1);
    const WStepTerms t = make_w_step_terms(in.Y, in.W_ref, in.H, ld, 0.3, 5.0);
    for (Index k = 0; k < 2; ++k) {
        double prev = std::numeric_limits<double>::infinity();
        for (double mu = -2.0; mu <= 50.0; mu += 0.5) {
            const ValueSlope v = w_step_column_sum(t, in.W_ref, in.Z, in.U, 5.0, k, mu);
            CHECK(v.value < prev);
            CHECK(v.slope < 0.0);
            prev = v.value;
        }
    }
}

TEST_CASE("W step output is on the column simplex")
{
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const Instance in = random_instance(6, 3, 8, rng);
        const LogDetContext ld = make_logdet_context(in.W_ref, 0.1);
        const WStepTerms t = make_w_step_terms(in.Y, in.W_ref, in.H, ld, 0.5, 10.0);
        const DenseMatrix W = admm_w_step(t, in.W_ref, in.Z, in.U, 10.0);
        CHECK(W.minCoeff() >= 0.0);
        CHECK((W.colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("W step without penalties matches the constrained KL step")
{
    std::mt19937_64 rng(5);
    const Instance in = random_instance(5, 3, 7, rng);
    const LogDetContext ld = make_logdet_context(in.W_ref, 0.1);
    const WStepTerms t = make_w_step_terms(in.Y, in.W_ref, in.H, ld, 1e-10, 1e-10);
    const DenseMatrix W = admm_w_step(t, in.W_ref, in.Z, in.U, 1e-10);
    DenseMatrix oracle = (in.W_ref.array() * ((in.Y.array() / (in.W_ref * in.H).array()).matrix() *
                                              in.H.transpose()).array()).matrix();
    normalize_cols(oracle);
    CHECK((W - oracle).cwiseAbs().maxCoeff() <= 1e-4);
}

TEST_CASE("Z step closed form")
{
    const DenseMatrix one = DenseMatrix::Constant(1, 1, 1.0);
    CHECK(z_min_step(one, one, 1.0)(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    const DenseMatrix e = DenseMatrix::Constant(1, 1, std::exp(1.0));
    const DenseMatrix zero = DenseMatrix::Zero(1, 1);
    CHECK(z_min_step(e, zero, 1.0)(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(z_min_step(one, one, 0.0), ConfigError);
}

TEST_CASE("Z step satisfies its stationarity equation and matches a scalar oracle")
{
    std::mt19937_64 rng(6);
    for (int k = 0; k < 100; ++k) {
        const double wb = uniform(rng, 0.01, 3.0);
        const double v = uniform(rng, -1.0, 3.0);
        const double nu = uniform(rng, 0.1, 200.0);
        const double z = z_min_step(DenseMatrix::Constant(1, 1, wb), DenseMatrix::Constant(1, 1, v), nu)(0, 0);
        CHECK(std::abs(std::log(z / wb) + nu * (z - v)) <= 1e-10);
        auto obj = [&](double x) { return beta_div_scalar(x, wb, Beta::one) + 0.5 * nu * (x - v) * (x - v); };
        CHECK(z == doctest::Approx(verify::brute_force_scalar_min(obj, 1e-12, 10.0)).epsilon(1e-6));
    }
}

TEST_CASE("Z step handles overflowing Lambert arguments")
{
    const double z = z_min_step(DenseMatrix::Constant(1, 1, 1.0), DenseMatrix::Constant(1, 1, 10.0), 500.0)(0, 0);
    CHECK(std::isfinite(z));
    CHECK(std::abs(std::log(z) + 500.0 * (z - 10.0)) <= 1e-9);
}

TEST_CASE("ADMM reaches its tolerance and is deterministic")
{
    std::mt19937_64 rng(7);
    const Instance in = random_instance(6, 3, 9, rng);
    const InnerWContext ctx{in.Y, in.W_ref, in.H, in.W_bar, 1.0};
    AdmmOptions opt;
    const AdmmResult a = admm_solve_w(ctx, 0.1, opt);
    CHECK(a.converged);
    CHECK(a.iterations <= 50);
    CHECK(a.residuals.size() == static_cast<std::size_t>(a.iterations));
    CHECK(a.best_residual <= 1e-6);
    CHECK((a.W.colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);

    const AdmmResult b = admm_solve_w(ctx, 0.1, opt);
    CHECK(a.residuals == b.residuals);
    CHECK(a.W == b.W);
}

TEST_CASE("ADMM single iteration starts from W = Z and U = 0")
{
    std::mt19937_64 rng(8);
    const Instance in = random_instance(5, 2, 6, rng);
    const InnerWContext ctx{in.Y, in.W_ref, in.H, in.W_bar, 1.0};
    AdmmOptions opt;
    opt.max_iter = 1;
    const AdmmResult r = admm_solve_w(ctx, 0.1, opt);
    REQUIRE(r.iterations == 1);
    const DenseMatrix W_expected = admm_w_step(
        make_w_step_terms(in.Y, in.W_ref, in.H, make_logdet_context(in.W_ref, 0.1), 0.1, opt.rho), in.W_ref,
        in.W_ref, DenseMatrix::Zero(5, 2), opt.rho);
    CHECK((r.U - (W_expected - r.Z)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("terminal min-vol W is on the column simplex")
{
    std::mt19937_64 rng(9);
    const Instance in = random_instance(6, 3, 8, rng);
    const DenseMatrix W = minvol_terminal_w(in.Y, in.W_ref, in.H, 0.2, 0.1);
    CHECK((W.colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-9);
}

TEST_CASE("min-vol run keeps constraints and monotonicity")
{
    std::mt19937_64 rng(10);
    const DenseMatrix W = simplex_cols(12, 3, rng);
    DenseMatrix A = uniform_matrix(3, 40, rng);
    normalize_cols(A);
    const DenseMatrix X = 10.0 * W * A;
    SolverConfig c;
    c.layers = {{3, 1.0, 0.05}, {2, 0.1, 0.05}};
    c.auto_lambda = false;
    c.max_sweeps = 40;
    c.record_wall_time = false;
    const MinvolRunResult run = minvol_factorize(X, c);
    CHECK(run.minvol.monotonicity_violations == 0);
    for (const auto& rec : run.trace.records) {
        CHECK(rec.max_residual <= 1e-6);
        for (double ld : rec.logdet) CHECK(std::isfinite(ld));
    }
    for (std::size_t k = 1; k < run.trace.size(); ++k) {
        CHECK(run.trace.records[k].total <= run.trace.records[k - 1].total + run.slack);
    }
}

TEST_CASE("min-vol requires KL")
{
    SolverConfig c;
    c.beta = Beta::half;
    c.layers = {{2, 1.0, 0.1}};
    CHECK_THROWS_AS(minvol_factorize(DenseMatrix::Constant(3, 3, 1.0), c), ConfigError);
}

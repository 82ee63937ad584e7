#include "dbnmf/minvol.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "dbnmf/parallel.hpp"
#include "dbnmf/scalar.hpp"

namespace dbnmf {

LogDetContext make_logdet_context(const DenseMatrix& W_ref, double delta)
{
    if (!(delta > 0.0)) throw ConfigError("make_logdet_context: delta must be positive");
    const Index r = W_ref.cols();
    const Eigen::MatrixXd gram = W_ref.transpose() * W_ref + delta * Eigen::MatrixXd::Identity(r, r);
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) throw NumericalError("make_logdet_context: Gram matrix not positive definite");

    LogDetContext ctx;
    ctx.delta = delta;
    const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(r, r));
    ctx.A = 0.5 * (inv + inv.transpose());
    ctx.A_plus = ctx.A.cwiseMax(0.0);
    ctx.A_minus = (-ctx.A).cwiseMax(0.0);
    ctx.logdet_ref = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return ctx;
}

double logdet_majorizer(const DenseMatrix& W, const LogDetContext& ctx, const DenseMatrix& W_ref)
{
    require_same_shape(W, W_ref, "logdet_majorizer");
    if (W_ref.cols() != ctx.A.rows()) throw DimensionError("logdet_majorizer: context built for another rank");
    if (!(W_ref.array() > 0.0).all()) throw DomainError("logdet_majorizer: reference must be entrywise positive");

    const DenseMatrix delta_w = W - W_ref;
    const DenseMatrix grad = 2.0 * W_ref * ctx.A;
    const DenseMatrix P = W_ref * (ctx.A_plus + ctx.A_minus);
    const double linear = (delta_w.array() * grad.array()).sum();
    const double quad = (P.array() / W_ref.array() * delta_w.array().square()).sum();
    return ctx.logdet_ref + linear + quad;
}

WStepTerms make_w_step_terms(const DenseMatrix& Y, const DenseMatrix& W_ref, const DenseMatrix& H,
                             const LogDetContext& ld, double alpha_ratio, double rho)
{
    if (W_ref.cols() != H.rows() || W_ref.rows() != Y.rows() || H.cols() != Y.cols()) {
        throw DimensionError("make_w_step_terms: W, H, Y do not chain");
    }
    const DenseMatrix V = W_ref * H;
    WStepTerms t;
    t.R = (Y.array() / V.array()).matrix() * H.transpose();
    const RowVector<double> h_sums = H.rowwise().sum().transpose();
    t.base_c = h_sums.replicate(W_ref.rows(), 1) - 4.0 * alpha_ratio * (W_ref * ld.A_minus);
    t.T = 4.0 * alpha_ratio * (W_ref * (ld.A_plus + ld.A_minus)) + 2.0 * rho * W_ref;
    return t;
}

namespace {

/// Entry of the W step at linear coefficient c, with dw/dc.
ValueSlope w_entry(double w_ref, double c, double T, double R)
{
    if (T > 0.0) {
        const double S = 2.0 * T * R;
        const double root = std::sqrt(c * c + S);
        double w;
        if (c >= 0.0) w = (root + c > 0.0) ? 2.0 * w_ref * R / (c + root) : 0.0;
        else w = w_ref * (root - c) / T;
        return {w, root > 0.0 ? -w / root : 0.0};
    }
    if (R <= 0.0) return {0.0, 0.0};
    if (!(c > 0.0)) return {std::numeric_limits<double>::infinity(), 0.0};
    const double w = w_ref * R / c;
    return {w, -w / c};
}

double coupling(const DenseMatrix& Z, const DenseMatrix& U, double rho, Index i, Index k)
{
    return rho > 0.0 ? rho * (Z(i, k) - U(i, k)) : 0.0;
}

} // namespace

ValueSlope w_step_column_sum(const WStepTerms& terms, const DenseMatrix& W_ref, const DenseMatrix& Z,
                             const DenseMatrix& U, double rho, Index col, double mu, double floor)
{
    ValueSlope acc{-1.0, 0.0};
    for (Index i = 0; i < W_ref.rows(); ++i) {
        const double c = terms.base_c(i, col) - coupling(Z, U, rho, i, col) + mu;
        ValueSlope e = w_entry(W_ref(i, col), c, terms.T(i, col), terms.R(i, col));
        if (e.value < floor) e = {floor, 0.0};
        acc.value += e.value;
        acc.slope += e.slope;
    }
    return acc;
}

DenseMatrix admm_w_step(const WStepTerms& terms, const DenseMatrix& W_ref, const DenseMatrix& Z,
                        const DenseMatrix& U, double rho, double floor)
{
    if (rho > 0.0) {
        require_same_shape(W_ref, Z, "admm_w_step");
        require_same_shape(W_ref, U, "admm_w_step");
    }
    const Index m = W_ref.rows();
    const Index r = W_ref.cols();
    DenseMatrix W(m, r);

    for (Index k = 0; k < r; ++k) {
        auto column_sum = [&](double mu) { return w_step_column_sum(terms, W_ref, Z, U, rho, k, mu, floor); };

        // entries without a quadratic term put a pole at mu = -min c
        double limit = std::numeric_limits<double>::quiet_NaN();
        double scale = 1.0;
        for (Index i = 0; i < m; ++i) {
            const double c = terms.base_c(i, k) - coupling(Z, U, rho, i, k);
            scale = std::max(scale, std::abs(c));
            if (!(terms.T(i, k) > 0.0) && terms.R(i, k) > 0.0) {
                limit = std::isnan(limit) ? -c : std::max(limit, -c);
            }
        }

        const double g0 = column_sum(0.0).value;
        double mu = 0.0;
        try {
            if (g0 != 0.0) {
                Bracket b{};
                if (g0 > 0.0) {
                    b = expand_bracket(column_sum, 0.0, scale);
                } else if (std::isfinite(limit) && limit < 0.0) {
                    b = expand_bracket(column_sum, 0.0, -scale, limit);
                } else {
                    b = expand_bracket(column_sum, 0.0, -scale);
                }
                mu = solve_monotone_scalar(column_sum, b, 1e-15);
            }
        } catch (const NoRootError&) {
            throw NumericalError("admm_w_step: no multiplier bracket for column " + std::to_string(k + 1));
        }

        double total = 0.0;
        for (Index i = 0; i < m; ++i) {
            const double c = terms.base_c(i, k) - coupling(Z, U, rho, i, k) + mu;
            W(i, k) = std::max(floor, w_entry(W_ref(i, k), c, terms.T(i, k), terms.R(i, k)).value);
            total += W(i, k);
        }
        if (!(total > 0.0) || !std::isfinite(total)) {
            throw NumericalError("admm_w_step: degenerate column " + std::to_string(k + 1));
        }
        W.col(k) /= total;
    }
    return W;
}

DenseMatrix z_min_step(const DenseMatrix& W_bar, const DenseMatrix& V, double nu)
{
    require_same_shape(W_bar, V, "z_min_step");
    if (!(nu > 0.0)) throw ConfigError("z_min_step: nu must be positive");
    DenseMatrix Z(V.rows(), V.cols());
    parallel_rows(V.rows(), [&](Index i) {
        for (Index j = 0; j < V.cols(); ++j) {
            const double log_arg = std::log(nu) + std::log(W_bar(i, j)) + nu * V(i, j);
            const double w = (log_arg > 700.0) ? lambert_w0_from_log(log_arg) : lambert_w0(std::exp(log_arg));
            Z(i, j) = w / nu;
        }
    });
    return Z;
}

AdmmResult admm_solve_w(const InnerWContext& ctx, double alpha_ratio, const AdmmOptions& options)
{
    require_same_shape(ctx.W_tilde, ctx.W_bar, "admm_solve_w");
    if (!(options.rho > 0.0)) throw ConfigError("admm_solve_w: rho must be positive");
    if (!(ctx.lambda_ratio > 0.0)) throw ConfigError("admm_solve_w: lambda ratio must be positive");
    if (options.max_iter < 1) throw ConfigError("admm_solve_w: iteration budget must be >= 1");

    const LogDetContext ld = make_logdet_context(ctx.W_tilde, options.delta);
    const WStepTerms terms = make_w_step_terms(ctx.Y, ctx.W_tilde, ctx.H, ld, alpha_ratio, options.rho);
    const double nu = options.rho / ctx.lambda_ratio;

    AdmmResult out;
    out.Z = ctx.W_tilde;
    out.U = DenseMatrix::Zero(ctx.W_tilde.rows(), ctx.W_tilde.cols());
    DenseMatrix best = ctx.W_tilde;
    out.best_residual = std::numeric_limits<double>::infinity();

    for (int i = 1; i <= options.max_iter; ++i) {
        const DenseMatrix W = admm_w_step(terms, ctx.W_tilde, out.Z, out.U, options.rho, options.floor);
        out.Z = z_min_step(ctx.W_bar, W + out.U, nu);
        out.U += W - out.Z;
        const double res = (W - out.Z).norm();
        out.residuals.push_back(res);
        out.iterations = i;
        if (res < out.best_residual) {
            out.best_residual = res;
            best = W;
        }
        if (res <= options.tol) {
            out.converged = true;
            break;
        }
    }
    out.W = epsilon_floor(best, options.floor > 0.0 ? options.floor : 0.0);
    normalize_cols(out.W);
    return out;
}

DenseMatrix minvol_terminal_w(const DenseMatrix& Y, const DenseMatrix& W_tilde, const DenseMatrix& H,
                              double alpha_ratio, double delta, double floor)
{
    const LogDetContext ld = make_logdet_context(W_tilde, delta);
    const WStepTerms terms = make_w_step_terms(Y, W_tilde, H, ld, alpha_ratio, 0.0);
    return admm_w_step(terms, W_tilde, W_tilde, W_tilde, 0.0, floor);
}

namespace {

/// Exact block objective of W_l after dividing by lambda_l.
double block_objective(const DenseMatrix& Y, const DenseMatrix& W, const DenseMatrix& H, double alpha_ratio,
                       double delta, const DenseMatrix* W_bar, double lambda_ratio)
{
    double f = beta_div_matrix(Y, W * H, Beta::one);
    if (alpha_ratio > 0.0) f += alpha_ratio * log_det_gram(W, delta);
    if (W_bar != nullptr) f += lambda_ratio * beta_div_matrix(W, *W_bar, Beta::one);
    return f;
}

} // namespace

MinvolRunResult minvol_factorize(const DenseMatrix& X, const SolverConfig& config,
                                 const std::optional<DeepState>& warm)
{
    config.validate();
    if (config.beta != Beta::one) {
        throw ConfigError("min-vol deep NMF requires beta = 1 (KL divergence)");
    }
    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    auto elapsed = [&] {
        return config.record_wall_time ? std::chrono::duration<double>(Clock::now() - start).count() : 0.0;
    };

    MinvolRunResult out;
    if (warm) {
        out.state = *warm;
        out.state.X = X;
        check_dimensions(out.state);
        if (out.state.layers() != static_cast<Index>(config.layers.size())) {
            throw DimensionError("minvol_factorize: warm state and config differ in layer count");
        }
    } else {
        out.state = init_random(X, config.layers, config.seed, Constraint::column_simplex_w, config.eps_floor);
        // match the column masses of each layer input
        for (Index l = 0; l < out.state.layers(); ++l) {
            const auto lu = static_cast<std::size_t>(l);
            const RowVector<double> target = out.state.input(l).colwise().sum();
            const RowVector<double> current = out.state.product(l).colwise().sum();
            for (Index j = 0; j < target.size(); ++j) {
                if (current(j) > 0.0 && target(j) > 0.0) out.state.H[lu].col(j) *= target(j) / current(j);
            }
            out.state.H[lu] = epsilon_floor(out.state.H[lu], config.eps_floor);
        }
    }
    DeepState& s = out.state;
    const Index L = s.layers();

    SolverConfig weighted = config;
    if (config.auto_lambda) {
        const BalancedWeights bw = auto_balance_weights(s, Beta::one);
        out.lambda = bw.lambda;
        out.lambda_degenerate = bw.degenerate;
    } else {
        for (const auto& spec : config.layers) out.lambda.push_back(spec.lambda);
        out.lambda_degenerate.assign(config.layers.size(), false);
    }
    double weight_sum = 0.0;
    for (Index l = 0; l < L; ++l) {
        const auto lu = static_cast<std::size_t>(l);
        weighted.layers[lu].lambda = out.lambda[lu];
        weight_sum += out.lambda[lu] + config.layers[lu].alpha;
    }
    out.slack = 10.0 * config.admm_tol * weight_sum;

    auto record = [&](int sweep, const ObjectiveValue& obj) {
        TraceRecord r;
        r.sweep = sweep;
        r.total = obj.total;
        r.layer_error = obj.divergence;
        r.logdet = obj.logdet;
        r.max_residual = simplex_residual(s, Constraint::column_simplex_w);
        r.seconds = elapsed();
        out.trace.records.push_back(std::move(r));
    };

    ObjectiveValue prev = eval_objective(s, weighted, Model::minvol);
    record(0, prev);

    AdmmOptions admm;
    admm.delta = config.delta;
    admm.rho = config.rho;
    admm.max_iter = config.admm_max_iter;
    admm.tol = config.admm_tol;
    admm.floor = config.eps_floor;

    for (int k = 1; k <= config.max_sweeps; ++k) {
        for (Index l = 0; l < L; ++l) {
            const auto lu = static_cast<std::size_t>(l);
            const DenseMatrix& Y = s.input(l);
            s.H[lu] = update_h_mu(s.W[lu], Y, s.H[lu], Beta::one, config.eps_floor);

            const double alpha_ratio = config.layers[lu].alpha / out.lambda[lu];
            DenseMatrix candidate;
            double before = 0.0;
            double after = 0.0;
            if (l + 1 < L) {
                const DenseMatrix W_bar = s.product(l + 1);
                const double lambda_ratio = out.lambda[lu + 1] / out.lambda[lu];
                const InnerWContext ctx{Y, s.W[lu], s.H[lu], W_bar, lambda_ratio};
                AdmmOptions layer_admm = admm;
                layer_admm.rho = config.rho / out.lambda[lu];
                AdmmResult res = admm_solve_w(ctx, alpha_ratio, layer_admm);
                if (!res.converged) ++out.minvol.admm_unconverged;
                candidate = std::move(res.W);
                before = block_objective(Y, s.W[lu], s.H[lu], alpha_ratio, config.delta, &W_bar, lambda_ratio);
                after = block_objective(Y, candidate, s.H[lu], alpha_ratio, config.delta, &W_bar, lambda_ratio);
            } else {
                candidate = minvol_terminal_w(Y, s.W[lu], s.H[lu], alpha_ratio, config.delta, config.eps_floor);
                before = block_objective(Y, s.W[lu], s.H[lu], alpha_ratio, config.delta, nullptr, 0.0);
                after = block_objective(Y, candidate, s.H[lu], alpha_ratio, config.delta, nullptr, 0.0);
            }
            if (after <= before) s.W[lu] = std::move(candidate);
            else ++out.minvol.rejected_steps;
        }

        const ObjectiveValue obj = eval_objective(s, weighted, Model::minvol);
        record(k, obj);
        const double increase = obj.total - prev.total;
        if (increase > out.minvol.worst_increase) out.minvol.worst_increase = increase;
        if (increase > out.slack) ++out.minvol.monotonicity_violations;
        const bool small_change = std::abs(increase) <= config.rel_obj_tol * std::max(1.0, std::abs(prev.total));
        prev = obj;
        if (config.early_stop && small_change) {
            out.stopped_early = true;
            break;
        }
    }
    return out;
}

} // namespace dbnmf

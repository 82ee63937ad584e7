#include "dbnmf/deep.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace dbnmf {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(const SolverConfig& config, Clock::time_point start)
{
    if (!config.record_wall_time) return 0.0;
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void accumulate(KernelDiagnostics& into, const KernelDiagnostics& d)
{
    into.locked_rows += d.locked_rows;
    into.fallback_entries += d.fallback_entries;
    into.unsolved_rows += d.unsolved_rows;
}

TraceRecord make_record(int sweep, const ObjectiveValue& obj, double residual, double seconds)
{
    TraceRecord r;
    r.sweep = sweep;
    r.total = obj.total;
    r.layer_error = obj.divergence;
    r.logdet = obj.logdet;
    r.max_residual = residual;
    r.seconds = seconds;
    return r;
}

} // namespace

RunResult multilayer_factorize(const DenseMatrix& X, const SolverConfig& config)
{
    config.validate();
    const auto start = Clock::now();
    RunResult out;
    out.state = init_random(X, config.layers, config.seed, Constraint::row_simplex_h, config.eps_floor);
    DeepState& s = out.state;

    SolverConfig unit = config;
    for (auto& spec : unit.layers) spec.lambda = 1.0;
    out.lambda.assign(config.layers.size(), 1.0);
    out.lambda_degenerate.assign(config.layers.size(), false);

    int sweep = 0;
    for (Index l = 0; l < s.layers(); ++l) {
        const auto lu = static_cast<std::size_t>(l);
        for (int k = 0; k < config.max_sweeps; ++k) {
            const DenseMatrix& Y = s.input(l);
            KernelDiagnostics diag;
            s.H[lu] = update_h_simplex(s.W[lu], Y, s.H[lu], config.beta, config.eps_floor, &diag);
            s.W[lu] = update_w_terminal(Y, s.W[lu], s.H[lu], config.beta, config.eps_floor);
            accumulate(out.kernels, diag);

            const ObjectiveValue obj = eval_objective(s, unit, Model::plain);
            out.trace.records.push_back(make_record(++sweep, obj, simplex_residual(s, Constraint::row_simplex_h),
                                                    elapsed(config, start)));
        }
    }
    return out;
}

RunResult deep_factorize(const DenseMatrix& X, const SolverConfig& config, const std::optional<DeepState>& warm)
{
    config.validate();
    if (config.beta == Beta::two) {
        throw ConfigError("deep beta-NMF: beta = 2 is supported for multilayer only");
    }
    const auto start = Clock::now();
    RunResult out;

    if (warm) {
        out.state = *warm;
        if (out.state.X.rows() != X.rows() || out.state.X.cols() != X.cols()) {
            throw DimensionError("deep_factorize: warm state built for a different input shape");
        }
        out.state.X = X;
        check_dimensions(out.state);
        if (out.state.layers() != static_cast<Index>(config.layers.size())) {
            throw DimensionError("deep_factorize: warm state and config differ in layer count");
        }
    } else {
        SolverConfig ml = config;
        ml.max_sweeps = config.warm_start_sweeps;
        RunResult pre = multilayer_factorize(X, ml);
        out.state = std::move(pre.state);
        out.kernels = pre.kernels;
    }
    DeepState& s = out.state;
    const Index L = s.layers();

    SolverConfig weighted = config;
    if (config.auto_lambda) {
        const BalancedWeights bw = auto_balance_weights(s, config.beta);
        out.lambda = bw.lambda;
        out.lambda_degenerate = bw.degenerate;
    } else {
        for (const auto& spec : config.layers) out.lambda.push_back(spec.lambda);
        out.lambda_degenerate.assign(config.layers.size(), false);
    }
    for (Index l = 0; l < L; ++l) weighted.layers[static_cast<std::size_t>(l)].lambda = out.lambda[static_cast<std::size_t>(l)];

    // roundoff allowance for objectives near zero (exact factorizations)
    double scale = 0.0;
    for (Index l = 0; l < L; ++l) {
        scale += out.lambda[static_cast<std::size_t>(l)] * (s.input(l).sum() + static_cast<double>(s.input(l).size()));
    }
    const double abs_slack = 64.0 * std::numeric_limits<double>::epsilon() * scale;

    ObjectiveValue prev = eval_objective(s, weighted, Model::plain);
    out.trace.records.push_back(make_record(0, prev, simplex_residual(s, Constraint::row_simplex_h),
                                            elapsed(config, start)));

    for (int k = 1; k <= config.max_sweeps; ++k) {
        for (Index l = 0; l < L; ++l) {
            const auto lu = static_cast<std::size_t>(l);
            const DenseMatrix& Y = s.input(l);
            KernelDiagnostics diag;
            s.H[lu] = update_h_simplex(s.W[lu], Y, s.H[lu], config.beta, config.eps_floor, &diag);
            if (l + 1 < L) {
                const DenseMatrix W_bar = s.product(l + 1);
                const InnerWContext ctx{Y, s.W[lu], s.H[lu], W_bar, out.lambda[lu + 1] / out.lambda[lu]};
                s.W[lu] = update_w_inner(ctx, config.beta, config.eps_floor, &diag);
            } else {
                s.W[lu] = update_w_terminal(Y, s.W[lu], s.H[lu], config.beta, config.eps_floor);
            }
            accumulate(out.kernels, diag);
        }

        const ObjectiveValue obj = eval_objective(s, weighted, Model::plain);
        out.trace.records.push_back(make_record(k, obj, simplex_residual(s, Constraint::row_simplex_h),
                                                elapsed(config, start)));
        if (obj.total > prev.total * (1.0 + 1e-10) + abs_slack) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "deep_factorize: objective increased at sweep " << k << " from " << prev.total << " to "
                << obj.total;
            throw ConsistencyError(msg.str());
        }
        const bool small_change = std::abs(obj.total - prev.total) <= config.rel_obj_tol * std::max(1.0, prev.total);
        prev = obj;
        if (config.early_stop && small_change) {
            out.stopped_early = true;
            break;
        }
    }
    return out;
}

} // namespace dbnmf

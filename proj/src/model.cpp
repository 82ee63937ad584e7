#include "dbnmf/model.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace dbnmf {

void SolverConfig::validate() const
{
    if (layers.empty()) throw ConfigError("at least one layer is required");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (layers[l].rank < 1) throw ConfigError("layer ranks must be >= 1");
        if (l > 0 && layers[l].rank >= layers[l - 1].rank) {
            throw ConfigError("layer ranks must strictly decrease");
        }
        if (!(layers[l].lambda > 0.0)) throw ConfigError("lambda must be positive");
        if (!(layers[l].alpha >= 0.0)) throw ConfigError("alpha must be nonnegative");
    }
    if (!(delta > 0.0)) throw ConfigError("delta must be positive");
    if (!(rho > 0.0)) throw ConfigError("rho must be positive");
    if (!(admm_tol > 0.0)) throw ConfigError("admm tolerance must be positive");
    if (admm_max_iter < 1) throw ConfigError("admm iteration budget must be >= 1");
    if (max_sweeps < 0 || warm_start_sweeps < 0) throw ConfigError("sweep budgets must be >= 0");
    if (!(eps_floor > 0.0)) throw ConfigError("eps floor must be positive");
    if (!(rel_obj_tol >= 0.0)) throw ConfigError("relative objective tolerance must be >= 0");
}

std::vector<Index> DeepState::ranks() const
{
    std::vector<Index> r;
    r.reserve(W.size());
    for (const auto& w : W) r.push_back(w.cols());
    return r;
}

void check_dimensions(const DeepState& state)
{
    if (state.W.size() != state.H.size()) throw DimensionError("W and H lists differ in length");
    Index prev_cols = state.X.cols();
    for (Index l = 0; l < state.layers(); ++l) {
        const auto& w = state.W[static_cast<std::size_t>(l)];
        const auto& h = state.H[static_cast<std::size_t>(l)];
        if (w.rows() != state.X.rows() || h.rows() != w.cols() || h.cols() != prev_cols) {
            throw DimensionError("layer " + std::to_string(l + 1) + ": W " + shape_string(w.rows(), w.cols()) +
                                 ", H " + shape_string(h.rows(), h.cols()) + " do not chain");
        }
        prev_cols = w.cols();
    }
}

DeepState init_random(const DenseMatrix& X, const std::vector<LayerSpec>& layers, std::uint64_t seed,
                      Constraint constraint, double eps)
{
    if (X.size() == 0 || !(X.array() > 0.0).any()) throw DegenerateInputError("input matrix is all zero");
    if ((X.array() < 0.0).any()) throw DegenerateInputError("input matrix has negative entries");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (layers[l].rank < 1 || (l > 0 && layers[l].rank >= layers[l - 1].rank)) {
            throw ConfigError("layer ranks must be >= 1 and strictly decreasing");
        }
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    // uniform on (eps, 1]: 1 - U with U in [0, 1), then floored
    auto draw = [&](Index rows, Index cols) {
        DenseMatrix m(rows, cols);
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) m(i, j) = std::max(eps, 1.0 - unit(rng));
        return m;
    };

    DeepState s;
    s.X = X;
    Index prev = X.cols();
    for (const auto& spec : layers) {
        s.W.push_back(draw(X.rows(), spec.rank));
        s.H.push_back(draw(spec.rank, prev));
        prev = spec.rank;
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (constraint == Constraint::row_simplex_h) normalize_rows(s.H[l]);
        else normalize_cols(s.W[l]);
    }
    return s;
}

BalancedWeights auto_balance_weights(const DeepState& state, Beta beta)
{
    check_dimensions(state);
    BalancedWeights out;
    for (Index l = 0; l < state.layers(); ++l) {
        const double d = beta_div_matrix(state.input(l), state.product(l), beta);
        if (d > 0.0 && std::isfinite(d) && d < kInfiniteDivergence) {
            out.lambda.push_back(1.0 / d);
            out.degenerate.push_back(false);
        } else {
            out.lambda.push_back(1.0);
            out.degenerate.push_back(true);
        }
    }
    return out;
}

double log_det_gram(const DenseMatrix& W, double delta)
{
    const Index r = W.cols();
    const Eigen::MatrixXd gram = W.transpose() * W + delta * Eigen::MatrixXd::Identity(r, r);
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) throw NumericalError("log_det_gram: Gram matrix not positive definite");
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

ObjectiveValue eval_objective(const DeepState& state, const SolverConfig& config, Model model)
{
    check_dimensions(state);
    if (config.layers.size() != state.W.size()) throw DimensionError("config and state differ in layer count");
    const Beta beta = (model == Model::minvol) ? Beta::one : config.beta;

    ObjectiveValue v;
    for (Index l = 0; l < state.layers(); ++l) {
        const auto& spec = config.layers[static_cast<std::size_t>(l)];
        const double d = beta_div_matrix(state.input(l), state.product(l), beta);
        double ld = 0.0;
        double weighted = spec.lambda * d;
        if (model == Model::minvol) {
            ld = log_det_gram(state.W[static_cast<std::size_t>(l)], config.delta);
            weighted += spec.alpha * ld;
        }
        v.divergence.push_back(d);
        v.logdet.push_back(ld);
        v.weighted.push_back(weighted);
        v.total = saturating_add(v.total, weighted);
    }
    return v;
}

double simplex_residual(const DeepState& state, Constraint constraint)
{
    double worst = 0.0;
    for (Index l = 0; l < state.layers(); ++l) {
        if (constraint == Constraint::row_simplex_h) {
            const auto sums = state.H[static_cast<std::size_t>(l)].rowwise().sum();
            worst = std::max(worst, (sums.array() - 1.0).abs().maxCoeff());
        } else {
            const auto sums = state.W[static_cast<std::size_t>(l)].colwise().sum();
            worst = std::max(worst, (sums.array() - 1.0).abs().maxCoeff());
        }
    }
    return worst;
}

StateReport validate_state(const DeepState& state, Constraint constraint, double tol)
{
    StateReport r;
    std::ostringstream msg;
    try {
        check_dimensions(state);
    } catch (const DimensionError& e) {
        r.dimensions_ok = false;
        r.ok = false;
        r.message = e.what();
        return r;
    }

    double min_entry = std::numeric_limits<double>::infinity();
    auto scan = [&](const DenseMatrix& m) {
        if (m.size() > 0) min_entry = std::min(min_entry, m.minCoeff());
    };
    for (const auto& w : state.W) scan(w);
    for (const auto& h : state.H) scan(h);
    if (!std::isfinite(min_entry)) min_entry = 0.0;
    r.min_entry = min_entry;
    r.max_negative = min_entry < 0.0 ? -min_entry : 0.0;
    r.max_simplex_residual = simplex_residual(state, constraint);
    r.ok = r.max_negative <= tol && r.max_simplex_residual <= tol;
    msg << "max_negative=" << r.max_negative << " max_simplex_residual=" << r.max_simplex_residual;
    r.message = msg.str();
    return r;
}

} // namespace dbnmf

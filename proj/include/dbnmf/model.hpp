#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "dbnmf/divergence.hpp"
#include "dbnmf/matrix.hpp"

namespace dbnmf {

struct LayerSpec {
    Index rank = 1;
    double lambda = 1.0; ///< weight of D(W_{l-1}, W_l H_l)
    double alpha = 0.0;  ///< weight of logdet(W_l^T W_l + delta I), min-vol model only
};

/// Which normalization the model enforces.
enum class Constraint {
    row_simplex_h,    ///< H_l e = e, plain deep beta-NMF
    column_simplex_w, ///< W_l^T e = e, min-vol deep KL-NMF
};

enum class Model { plain, minvol };

struct SolverConfig {
    Beta beta = Beta::one;
    std::vector<LayerSpec> layers;
    bool auto_lambda = true;  ///< balance lambda_l so every initial weighted term is 1
    double delta = 0.1;
    double rho = 100.0;
    int admm_max_iter = 50;
    double admm_tol = 1e-6;
    int max_sweeps = 200;
    int warm_start_sweeps = 500;
    double eps_floor = std::numeric_limits<double>::epsilon();
    std::uint64_t seed = 1;
    bool early_stop = false;  ///< stop when |F_k - F_{k-1}| <= rel_obj_tol * max(1, F_{k-1})
    double rel_obj_tol = 1e-9;
    bool record_wall_time = true;

    void validate() const;
};

/// The chain X = W_0 ~ W_1 H_1, W_1 ~ W_2 H_2, ... stored zero-based:
/// W[l] and H[l] are the factors of layer l+1.
struct DeepState {
    DenseMatrix X;
    std::vector<DenseMatrix> W;
    std::vector<DenseMatrix> H;

    Index layers() const noexcept { return static_cast<Index>(W.size()); }

    /// W_{l-1} for zero-based layer l (X for the first layer).
    const DenseMatrix& input(Index l) const { return l == 0 ? X : W[static_cast<std::size_t>(l - 1)]; }

    /// W_l H_l for zero-based layer l.
    DenseMatrix product(Index l) const
    {
        return W[static_cast<std::size_t>(l)] * H[static_cast<std::size_t>(l)];
    }

    std::vector<Index> ranks() const;
};

struct TraceRecord {
    int sweep = 0;
    double total = 0.0;
    std::vector<double> layer_error;  ///< unweighted D_beta(W_{l-1}, W_l H_l)
    std::vector<double> logdet;       ///< unweighted logdet terms (zeros for the plain model)
    double max_residual = 0.0;        ///< worst simplex residual after the sweep
    double seconds = 0.0;             ///< elapsed since the run started
};

struct ConvergenceTrace {
    std::vector<TraceRecord> records;

    bool empty() const noexcept { return records.empty(); }
    std::size_t size() const noexcept { return records.size(); }
    const TraceRecord& back() const { return records.back(); }
};

/// Uniform(eps, 1] factors, then the constraint enforced by normalization.
DeepState init_random(const DenseMatrix& X, const std::vector<LayerSpec>& layers, std::uint64_t seed,
                      Constraint constraint, double eps = std::numeric_limits<double>::epsilon());

struct BalancedWeights {
    std::vector<double> lambda;
    std::vector<bool> degenerate; ///< layer had zero divergence; weight left at 1
};

/// lambda_l = 1 / D_beta(W_{l-1}, W_l H_l) at the given state.
BalancedWeights auto_balance_weights(const DeepState& state, Beta beta);

struct ObjectiveValue {
    double total = 0.0;
    std::vector<double> divergence; ///< unweighted per layer
    std::vector<double> weighted;   ///< lambda_l * divergence + alpha_l * logdet
    std::vector<double> logdet;     ///< unweighted per layer (zeros for the plain model)
};

/// Plain: sum_l lambda_l D_beta(W_{l-1}, W_l H_l).
/// Min-vol: sum_l lambda_l D_KL(W_{l-1}, W_l H_l) + alpha_l logdet(W_l^T W_l + delta I).
ObjectiveValue eval_objective(const DeepState& state, const SolverConfig& config, Model model);

/// logdet(W^T W + delta I) through a Cholesky factor.
double log_det_gram(const DenseMatrix& W, double delta);

struct StateReport {
    bool dimensions_ok = true;
    double max_negative = 0.0;       ///< magnitude of the most negative entry, 0 if none
    double max_simplex_residual = 0.0;
    double min_entry = 0.0;
    bool ok = true;                  ///< all of the above within tol
    std::string message;
};

StateReport validate_state(const DeepState& state, Constraint constraint, double tol);

/// Largest |sum - 1| over the rows of H_l (row simplex) or columns of W_l.
double simplex_residual(const DeepState& state, Constraint constraint);

void check_dimensions(const DeepState& state);

} // namespace dbnmf

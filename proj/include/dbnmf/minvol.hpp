#pragma once

// Minimum-volume deep KL-NMF: column-simplex W, logdet(W^T W + delta I)
// penalty per layer, inner scaled ADMM for the coupled W subproblem.

#include <optional>
#include <vector>

#include "dbnmf/deep.hpp"
#include "dbnmf/scalar.hpp"

namespace dbnmf {

struct LogDetContext {
    Eigen::MatrixXd A;       ///< (W_ref^T W_ref + delta I)^{-1}, symmetrized
    Eigen::MatrixXd A_plus;  ///< max(A, 0)
    Eigen::MatrixXd A_minus; ///< max(-A, 0)
    double delta = 0.1;
    double logdet_ref = 0.0; ///< logdet(W_ref^T W_ref + delta I)
};

LogDetContext make_logdet_context(const DenseMatrix& W_ref, double delta);

/// Separable quadratic majorizer of W -> logdet(W^T W + delta I) tangent at
/// W_ref (linearized logdet plus diagonal bound on each row quadratic).
/// W_ref must be entrywise positive.
double logdet_majorizer(const DenseMatrix& W, const LogDetContext& ctx, const DenseMatrix& W_ref);

/// Coefficients of the per-entry quadratic in the W subproblem that do not
/// depend on Z, U or the column multiplier.
struct WStepTerms {
    DenseMatrix base_c; ///< e H^T - 4 alpha W_ref A^-
    DenseMatrix T;      ///< 4 alpha W_ref (A^+ + A^-) + 2 rho W_ref
    DenseMatrix R;      ///< (Y / (W_ref H)) H^T
};

WStepTerms make_w_step_terms(const DenseMatrix& Y, const DenseMatrix& W_ref, const DenseMatrix& H,
                             const LogDetContext& ld, double alpha_ratio, double rho);

/// Minimizer over column-simplex W >= floor of
/// G_KL(W, W_ref) + alpha g(W, W_ref) + (rho/2) ||W - Z + U||^2
/// with one multiplier per column found by safeguarded Newton.
/// rho = 0 drops the coupling term (Z and U are ignored).
DenseMatrix admm_w_step(const WStepTerms& terms, const DenseMatrix& W_ref, const DenseMatrix& Z,
                        const DenseMatrix& U, double rho, double floor = 0.0);

/// Column sum of the W step minus one as a function of the multiplier.
ValueSlope w_step_column_sum(const WStepTerms& terms, const DenseMatrix& W_ref, const DenseMatrix& Z,
                             const DenseMatrix& U, double rho, Index col, double mu, double floor = 0.0);

/// Entrywise z solving log(z / W_bar) + nu (z - V) = 0.
DenseMatrix z_min_step(const DenseMatrix& W_bar, const DenseMatrix& V, double nu);

struct AdmmResult {
    DenseMatrix W;                  ///< floored, column-renormalized best iterate
    DenseMatrix Z;
    DenseMatrix U;
    int iterations = 0;
    std::vector<double> residuals;  ///< ||W^i - Z^i||_F per iteration
    double best_residual = 0.0;
    bool converged = false;
};

struct AdmmOptions {
    double delta = 0.1;
    double rho = 100.0;
    int max_iter = 50;
    double tol = 1e-6;
    double floor = 0.0;
};

/// Scaled ADMM for min_W G_KL(W, W_tilde) + alpha g(W, W_tilde) + lambda D_KL(W, W_bar)
/// over column-simplex W, split as W = Z. ctx.lambda_ratio is lambda.
AdmmResult admm_solve_w(const InnerWContext& ctx, double alpha_ratio, const AdmmOptions& options);

/// Last-layer W: minimizer of G_KL(W, W_tilde) + alpha g(W, W_tilde) over
/// column-simplex W >= floor.
DenseMatrix minvol_terminal_w(const DenseMatrix& Y, const DenseMatrix& W_tilde, const DenseMatrix& H,
                              double alpha_ratio, double delta, double floor = 0.0);

struct MinvolDiagnostics {
    int admm_unconverged = 0;      ///< inner solves stopped at the iteration budget
    int rejected_steps = 0;        ///< W steps discarded because the block surrogate increased
    int monotonicity_violations = 0;
    double worst_increase = 0.0;   ///< largest sweep-to-sweep objective increase
};

struct MinvolRunResult : RunResult {
    MinvolDiagnostics minvol;
    double slack = 0.0; ///< 10 admm_tol (sum alpha + sum lambda)
};

/// Minimum-volume deep KL-NMF. beta must be 1. Trace record 0 is the start.
MinvolRunResult minvol_factorize(const DenseMatrix& X, const SolverConfig& config,
                                 const std::optional<DeepState>& warm = std::nullopt);

} // namespace dbnmf

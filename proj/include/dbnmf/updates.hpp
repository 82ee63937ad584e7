#pragma once

// Block updates of deep beta-NMF. Each kernel returns the exact minimizer of
// the auxiliary-function majorizer built at the current iterate, optionally
// restricted to entries >= floor (the perturbed variant).

#include "dbnmf/divergence.hpp"
#include "dbnmf/matrix.hpp"

namespace dbnmf {

struct KernelDiagnostics {
    Index locked_rows = 0;       ///< rows left unchanged because the MU numerator vanished
    Index fallback_entries = 0;  ///< entries solved by bisection instead of the closed form
    Index unsolved_rows = 0;     ///< rows whose multiplier bracket could not be found
};

/// Everything the inner-layer W update needs, named after its role:
/// Y = W_{l-1}, W_tilde = current W_l, H = H_l, W_bar = W_{l+1} H_{l+1},
/// lambda_ratio = lambda_{l+1} / lambda_l.
struct InnerWContext {
    const DenseMatrix& Y;
    const DenseMatrix& W_tilde;
    const DenseMatrix& H;
    const DenseMatrix& W_bar;
    double lambda_ratio;
};

/// Minimizer of the majorizer of H -> D_beta(Y, W H) over {H >= floor, H e = e}.
/// One Lagrange multiplier per row of H; closed form for beta = 1, safeguarded
/// Newton on the row sum otherwise.
DenseMatrix update_h_simplex(const DenseMatrix& W, const DenseMatrix& Y, const DenseMatrix& H_tilde, Beta beta,
                             double floor = 0.0, KernelDiagnostics* diag = nullptr);

/// Entrywise minimizer of G(W, W_tilde) + lambda D_beta(W, W_bar) over W >= floor.
/// beta must be 0, 1/2, 1 or 3/2.
DenseMatrix update_w_inner(const InnerWContext& ctx, Beta beta, double floor = 0.0,
                           KernelDiagnostics* diag = nullptr);

/// Standard beta-MU step on W for D_beta(Y, W H). Supports beta = 2 as well.
DenseMatrix update_w_terminal(const DenseMatrix& Y, const DenseMatrix& W_tilde, const DenseMatrix& H, Beta beta,
                              double floor = 0.0);

/// Standard (unconstrained) beta-MU step on H for D_beta(Y, W H).
DenseMatrix update_h_mu(const DenseMatrix& W, const DenseMatrix& Y, const DenseMatrix& H_tilde, Beta beta,
                        double floor = 0.0);

/// Majorizer of W -> D_beta(Y, W H) tangent at W_tilde (sum of per-row
/// auxiliary functions). Requires W_tilde > 0 and W_tilde H > 0.
double beta_majorizer_w(const DenseMatrix& Y, const DenseMatrix& W, const DenseMatrix& W_tilde,
                        const DenseMatrix& H, Beta beta);

/// Majorizer of H -> D_beta(Y, W H) tangent at H_tilde.
double beta_majorizer_h(const DenseMatrix& Y, const DenseMatrix& W, const DenseMatrix& H,
                        const DenseMatrix& H_tilde, Beta beta);

/// Scalar stationarity equations of the inner W update, one entry at a time.
namespace closed_form {

/// Positive root of a = b / w - lambda log w (beta = 1).
double kl_entry(double a, double b, double lambda);

/// Positive root of a sqrt(w) - b / sqrt(w) - c = 0 (beta = 3/2).
double three_halves_entry(double a, double b, double c);

/// Positive root of a / w^2 + lambda / w - c = 0 (beta = 0).
double itakura_saito_entry(double a, double c, double lambda);

/// Positive root of -c w^(3/2) + b w + a = 0 (beta = 1/2), via the depressed
/// cubic in sqrt(w); bisection when the one-real-root precondition fails.
double half_entry(double a, double b, double c, bool* used_fallback = nullptr);

} // namespace closed_form

} // namespace dbnmf

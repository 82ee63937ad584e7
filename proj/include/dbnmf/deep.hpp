#pragma once

#include <optional>
#include <vector>

#include "dbnmf/model.hpp"
#include "dbnmf/updates.hpp"

namespace dbnmf {

struct RunResult {
    DeepState state;
    ConvergenceTrace trace;
    std::vector<double> lambda;          ///< weights actually used
    std::vector<bool> lambda_degenerate; ///< auto-balance hit a zero divergence
    KernelDiagnostics kernels;
    bool stopped_early = false;
};

/// Greedy layer-by-layer NMF with row-simplex H: layer l is fitted for
/// max_sweeps (H, W) sweeps on W_{l-1} while earlier layers stay frozen.
/// Trace: max_sweeps records per layer, numbered globally; `total` is the
/// unweighted sum of all layer divergences.
RunResult multilayer_factorize(const DenseMatrix& X, const SolverConfig& config);

/// Deep beta-NMF with row-simplex H. Without `warm`, starts from
/// warm_start_sweeps multilayer sweeps. Trace record 0 is the starting point.
/// Throws ConsistencyError if the weighted objective increases by more than
/// 1e-10 relative, plus a roundoff allowance proportional to the data scale,
/// across a sweep.
RunResult deep_factorize(const DenseMatrix& X, const SolverConfig& config,
                         const std::optional<DeepState>& warm = std::nullopt);

} // namespace dbnmf

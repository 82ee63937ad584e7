#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dbnmf/model.hpp"

namespace dbnmf {

/// (sqrt(n) - |x|_1 / |x|_2) / (sqrt(n) - 1). NaN for an all-zero x or n < 2.
template <class Derived>
double hoyer_sparsity(const Eigen::MatrixBase<Derived>& x)
{
    const double n = static_cast<double>(x.size());
    const double l2 = x.template cast<double>().norm();
    if (n < 2.0 || !(l2 > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double l1 = x.template cast<double>().template lpNorm<1>();
    const double root_n = std::sqrt(n);
    return (root_n - l1 / l2) / (root_n - 1.0);
}

/// Mean Hoyer sparsity over the rows of M, skipping undefined rows.
double mean_row_sparsity(const DenseMatrix& M);

/// H_l H_{l-1} ... H_1 for zero-based layer l: layer-l features over the columns of X.
DenseMatrix composite_features(const DeepState& state, Index layer);

struct LayerComparison {
    Index layer = 0;                ///< one-based
    double deep_error = 0.0;
    double baseline_error = 0.0;
    double ratio = 0.0;             ///< deep_error / baseline_error
    double deep_sparsity = 0.0;     ///< mean over rows of H_l
    double baseline_sparsity = 0.0;
    double deep_feature_sparsity = 0.0;     ///< mean over rows of H_l ... H_1
    double baseline_feature_sparsity = 0.0;
};

struct ComparisonReport {
    std::vector<LayerComparison> layers;
    std::string to_csv() const;
};

/// Per-layer error ratios and sparsities of two runs on the same data and ranks.
ComparisonReport compare_runs(const DeepState& deep, const DeepState& baseline, Beta beta);

struct SscReport {
    double tol = 0.0;
    std::vector<Index> zero_counts;
    std::vector<bool> row_passes;                  ///< at least r - 1 entries <= tol
    std::vector<std::pair<Index, Index>> contained; ///< (a, b): support of row a lies inside row b (zero-based)
    bool all_pass = true;                          ///< every row passes and no containment
    std::string to_csv() const;
};

/// Necessary-condition check for the sufficiently scattered condition on the
/// rows of an r x n matrix. A negative or NaN tol selects 1e-9 * max entry.
SscReport ssc_row_zero_check(const DenseMatrix& H, double tol = std::numeric_limits<double>::quiet_NaN());

} // namespace dbnmf

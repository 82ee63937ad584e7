#include "dbnmf/metrics.hpp"

#include <iomanip>
#include <sstream>

namespace dbnmf {

double mean_row_sparsity(const DenseMatrix& M)
{
    double sum = 0.0;
    int count = 0;
    for (Index i = 0; i < M.rows(); ++i) {
        const double h = hoyer_sparsity(M.row(i));
        if (std::isfinite(h)) {
            sum += h;
            ++count;
        }
    }
    return count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

DenseMatrix composite_features(const DeepState& state, Index layer)
{
    if (layer < 0 || layer >= state.layers()) throw DimensionError("composite_features: layer out of range");
    DenseMatrix out = state.H[0];
    for (Index l = 1; l <= layer; ++l) out = state.H[static_cast<std::size_t>(l)] * out;
    return out;
}

ComparisonReport compare_runs(const DeepState& deep, const DeepState& baseline, Beta beta)
{
    check_dimensions(deep);
    check_dimensions(baseline);
    if (deep.ranks() != baseline.ranks()) throw ComparisonError("compare_runs: runs have different ranks");
    if (deep.X.rows() != baseline.X.rows() || deep.X.cols() != baseline.X.cols()) {
        throw ComparisonError("compare_runs: runs were fitted to inputs of different shapes");
    }

    ComparisonReport report;
    for (Index l = 0; l < deep.layers(); ++l) {
        const auto lu = static_cast<std::size_t>(l);
        LayerComparison c;
        c.layer = l + 1;
        c.deep_error = beta_div_matrix(deep.input(l), deep.product(l), beta);
        c.baseline_error = beta_div_matrix(baseline.input(l), baseline.product(l), beta);
        c.ratio = c.deep_error / c.baseline_error;
        c.deep_sparsity = mean_row_sparsity(deep.H[lu]);
        c.baseline_sparsity = mean_row_sparsity(baseline.H[lu]);
        c.deep_feature_sparsity = mean_row_sparsity(composite_features(deep, l));
        c.baseline_feature_sparsity = mean_row_sparsity(composite_features(baseline, l));
        report.layers.push_back(c);
    }
    return report;
}

std::string ComparisonReport::to_csv() const
{
    std::ostringstream os;
    os << std::setprecision(17);
    os << "layer,deep_error,baseline_error,error_ratio,deep_sparsity,baseline_sparsity,"
          "deep_feature_sparsity,baseline_feature_sparsity\n";
    for (const auto& c : layers) {
        os << c.layer << ',' << c.deep_error << ',' << c.baseline_error << ',' << c.ratio << ','
           << c.deep_sparsity << ',' << c.baseline_sparsity << ',' << c.deep_feature_sparsity << ','
           << c.baseline_feature_sparsity << '\n';
    }
    return os.str();
}

SscReport ssc_row_zero_check(const DenseMatrix& H, double tol)
{
    SscReport report;
    const Index r = H.rows();
    report.tol = (std::isnan(tol) || tol < 0.0) ? (H.size() > 0 ? 1e-9 * H.maxCoeff() : 0.0) : tol;
    const auto support = (H.array() > report.tol).eval();

    for (Index i = 0; i < r; ++i) {
        const Index zeros = H.cols() - support.row(i).count();
        report.zero_counts.push_back(zeros);
        const bool pass = zeros >= r - 1;
        report.row_passes.push_back(pass);
        report.all_pass = report.all_pass && pass;
    }
    for (Index a = 0; a < r; ++a) {
        for (Index b = 0; b < r; ++b) {
            if (a == b) continue;
            // support(a) inside support(b): no column where a is on and b is off
            bool inside = true;
            for (Index j = 0; j < H.cols() && inside; ++j) inside = !(support(a, j) && !support(b, j));
            if (inside) {
                report.contained.emplace_back(a, b);
                report.all_pass = false;
            }
        }
    }
    return report;
}

std::string SscReport::to_csv() const
{
    std::ostringstream os;
    os << "row,zero_count,passes_zero_count,contained_in\n";
    for (std::size_t i = 0; i < zero_counts.size(); ++i) {
        os << i + 1 << ',' << zero_counts[i] << ',' << (row_passes[i] ? 1 : 0) << ',';
        bool first = true;
        for (const auto& [a, b] : contained) {
            if (static_cast<std::size_t>(a) != i) continue;
            os << (first ? "" : ";") << b + 1;
            first = false;
        }
        os << '\n';
    }
    return os.str();
}

} // namespace dbnmf

#include "dbnmf/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "dbnmf/deep.hpp"
#include "dbnmf/io.hpp"
#include "dbnmf/metrics.hpp"
#include "dbnmf/minvol.hpp"
#include "dbnmf/parallel.hpp"

namespace dbnmf {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct FactorizeArgs {
    std::string input;
    std::string method = "deep";
    double beta = 1.0;
    std::vector<long> ranks;
    std::string lambda = "auto";
    std::vector<double> alpha;
    double delta = 0.1;
    double rho = 100.0;
    int admm_iters = 50;
    double admm_tol = 1e-6;
    int sweeps = 200;
    int warm_sweeps = 500;
    std::uint64_t seed = 1;
    double eps = std::numeric_limits<double>::epsilon();
    std::string out;
    bool transpose = false;
    bool wall_time = false;
    bool early_stop = false;
    double rel_tol = 1e-9;
};

struct CompareArgs {
    std::string deep;
    std::string baseline;
    std::string out;
};

struct RenderArgs {
    std::string factors;
    int layer = 1;
    std::string tile;
    int grid = 1;
    std::string out;
};

struct MetricsArgs {
    std::string h_file;
    double tol = -1.0;
};

std::string join(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

std::vector<double> parse_list(const std::string& text, const char* what)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError(std::string("--") + what + ": cannot parse '" + item + "'");
        }
    }
    return out;
}

DenseMatrix load_input(const std::string& path, bool transpose, std::ostream& err)
{
    ReadDiagnostics diag;
    DenseMatrix X = read_matrix(path, format_from_path(path), &diag);
    if (diag.has_negative()) {
        err << "warning: " << diag.negative_entries << " negative entries in '" << path << "'\n";
    }
    if (transpose) X.transposeInPlace();
    return X;
}

int factorize(const FactorizeArgs& a, std::ostream& out, std::ostream& err)
{
    SolverConfig cfg;
    cfg.beta = beta_from_value(a.beta);
    const bool minvol = a.method == "minvol";
    if (a.method == "deep" && cfg.beta == Beta::two) {
        throw UsageError("--beta 2 is supported for multilayer only");
    }
    if (minvol && cfg.beta != Beta::one) throw UsageError("--method minvol requires --beta 1 (KL divergence)");
    if (a.ranks.empty()) throw UsageError("--ranks must list at least one rank");
    if (!a.alpha.empty() && a.alpha.size() != a.ranks.size()) {
        throw UsageError("--alpha needs one value per layer");
    }
    if (!minvol) {
        for (double v : a.alpha) {
            if (v != 0.0) throw UsageError("--alpha applies to --method minvol only");
        }
    }
    const bool auto_lambda = a.lambda == "auto";
    std::vector<double> lambda;
    if (!auto_lambda) {
        if (a.method == "multilayer") throw UsageError("--lambda applies to deep and minvol only");
        lambda = parse_list(a.lambda, "lambda");
        if (lambda.size() != a.ranks.size()) throw UsageError("--lambda needs one value per layer");
    }

    for (std::size_t l = 0; l < a.ranks.size(); ++l) {
        LayerSpec spec;
        spec.rank = a.ranks[l];
        if (!auto_lambda) spec.lambda = lambda[l];
        if (!a.alpha.empty()) spec.alpha = a.alpha[l];
        cfg.layers.push_back(spec);
    }
    cfg.auto_lambda = auto_lambda;
    cfg.delta = a.delta;
    cfg.rho = a.rho;
    cfg.admm_max_iter = a.admm_iters;
    cfg.admm_tol = a.admm_tol;
    cfg.max_sweeps = a.sweeps;
    cfg.warm_start_sweeps = a.warm_sweeps;
    cfg.seed = a.seed;
    cfg.eps_floor = a.eps;
    cfg.early_stop = a.early_stop;
    cfg.rel_obj_tol = a.rel_tol;
    cfg.record_wall_time = a.wall_time;
    cfg.validate();

    const DenseMatrix X = load_input(a.input, a.transpose, err);

    RunResult run;
    MinvolDiagnostics mv;
    bool have_mv = false;
    if (a.method == "multilayer") {
        run = multilayer_factorize(X, cfg);
    } else if (a.method == "deep") {
        run = deep_factorize(X, cfg);
    } else {
        MinvolRunResult r = minvol_factorize(X, cfg);
        mv = r.minvol;
        have_mv = true;
        run = std::move(r);
    }

    fs::create_directories(a.out);
    const fs::path dir(a.out);
    for (Index l = 0; l < run.state.layers(); ++l) {
        const auto lu = static_cast<std::size_t>(l);
        const std::string k = std::to_string(l + 1);
        write_matrix(run.state.W[lu], (dir / ("W_" + k + ".bin")).string(), MatrixFormat::binary);
        write_matrix(run.state.H[lu], (dir / ("H_" + k + ".bin")).string(), MatrixFormat::binary);
    }
    write_trace(run.trace, (dir / "trace.csv").string(), cfg.layers.size());

    const std::string final_objective = run.trace.empty() ? "nan" : format_double(run.trace.back().total);
    std::vector<double> alpha_values;
    std::string ranks_text;
    for (std::size_t l = 0; l < cfg.layers.size(); ++l) {
        alpha_values.push_back(cfg.layers[l].alpha);
        ranks_text += (l ? "," : "") + std::to_string(cfg.layers[l].rank);
    }
    std::vector<std::pair<std::string, std::string>> manifest{
        {"input", fs::absolute(a.input).string()},
        {"input_rows", std::to_string(X.rows())},
        {"input_cols", std::to_string(X.cols())},
        {"transpose", a.transpose ? "1" : "0"},
        {"method", a.method},
        {"beta", to_string(cfg.beta)},
        {"ranks", ranks_text},
        {"lambda_mode", auto_lambda ? "auto" : "manual"},
        {"lambda", join(run.lambda)},
        {"alpha", join(alpha_values)},
        {"delta", format_double(cfg.delta)},
        {"rho", format_double(cfg.rho)},
        {"admm_iters", std::to_string(cfg.admm_max_iter)},
        {"admm_tol", format_double(cfg.admm_tol)},
        {"sweeps", std::to_string(cfg.max_sweeps)},
        {"warm_sweeps", std::to_string(cfg.warm_start_sweeps)},
        {"seed", std::to_string(cfg.seed)},
        {"eps_floor", format_double(cfg.eps_floor)},
        {"early_stop", cfg.early_stop ? "1" : "0"},
        {"rel_obj_tol", format_double(cfg.rel_obj_tol)},
        {"wall_time", cfg.record_wall_time ? "1" : "0"},
        {"threads", std::to_string(thread_count())},
        {"sweeps_run", std::to_string(run.trace.empty() ? 0 : run.trace.back().sweep)},
        {"final_objective", final_objective},
        {"locked_rows", std::to_string(run.kernels.locked_rows)},
        {"fallback_entries", std::to_string(run.kernels.fallback_entries)},
        {"unsolved_rows", std::to_string(run.kernels.unsolved_rows)},
    };
    for (std::size_t l = 0; l < run.lambda_degenerate.size(); ++l) {
        if (run.lambda_degenerate[l]) {
            err << "warning: layer " << l + 1 << " has zero divergence at the start; lambda left at 1\n";
        }
    }
    if (have_mv) {
        manifest.emplace_back("admm_unconverged", std::to_string(mv.admm_unconverged));
        manifest.emplace_back("rejected_steps", std::to_string(mv.rejected_steps));
        manifest.emplace_back("monotonicity_violations", std::to_string(mv.monotonicity_violations));
    }
    write_manifest(manifest, (dir / "manifest.txt").string());

    out << "method=" << a.method << " layers=" << cfg.layers.size()
        << " final_objective=" << final_objective << " out=" << a.out << '\n';
    return 0;
}

DeepState load_run(const std::string& dir, std::map<std::string, std::string>& manifest, std::ostream& err)
{
    const fs::path d(dir);
    manifest = read_manifest((d / "manifest.txt").string());
    for (const char* key : {"input", "ranks", "beta"}) {
        if (!manifest.count(key)) throw std::runtime_error("manifest in '" + dir + "' lacks '" + key + "'");
    }
    DeepState s;
    s.X = load_input(manifest["input"], manifest["transpose"] == "1", err);
    const auto ranks = parse_list(manifest["ranks"], "ranks");
    for (std::size_t l = 1; l <= ranks.size(); ++l) {
        s.W.push_back(read_matrix((d / ("W_" + std::to_string(l) + ".bin")).string(), MatrixFormat::binary));
        s.H.push_back(read_matrix((d / ("H_" + std::to_string(l) + ".bin")).string(), MatrixFormat::binary));
    }
    check_dimensions(s);
    return s;
}

int compare(const CompareArgs& a, std::ostream& out, std::ostream& err)
{
    std::map<std::string, std::string> md;
    std::map<std::string, std::string> mb;
    const DeepState deep = load_run(a.deep, md, err);
    const DeepState base = load_run(a.baseline, mb, err);
    if (md["beta"] != mb["beta"]) throw ComparisonError("runs use different beta");
    if (deep.X != base.X) throw ComparisonError("runs were fitted to different inputs");
    const ComparisonReport report = compare_runs(deep, base, beta_from_value(std::stod(md["beta"])));
    if (a.out.empty()) {
        out << report.to_csv();
    } else {
        std::ofstream f(a.out);
        f << report.to_csv();
        if (!f) throw std::runtime_error("write failed for '" + a.out + "'");
    }
    return 0;
}

int render(const RenderArgs& a, std::ostream& out)
{
    long th = 0;
    long tw = 0;
    char x = 0;
    std::istringstream ts(a.tile);
    if (!(ts >> th >> x >> tw) || x != 'x' || th < 1 || tw < 1 || !ts.eof()) {
        throw UsageError("--tile must look like HxW, got '" + a.tile + "'");
    }
    if (a.layer < 1) throw UsageError("--layer must be >= 1");
    if (a.grid < 1) throw UsageError("--grid must be >= 1");
    const fs::path d(a.factors);
    DeepState s;
    for (int l = 1; l <= a.layer; ++l) {
        s.H.push_back(read_matrix((d / ("H_" + std::to_string(l) + ".bin")).string(), MatrixFormat::binary));
        s.W.emplace_back();
    }
    const DenseMatrix features = composite_features(s, a.layer - 1);
    const std::string path =
        a.out.empty() ? (d / ("features_layer_" + std::to_string(a.layer) + ".pgm")).string() : a.out;
    write_mosaic_pgm(features, th, tw, a.grid, path);
    out << path << '\n';
    return 0;
}

int metrics(const MetricsArgs& a, std::ostream& out)
{
    const DenseMatrix H = read_matrix(a.h_file, format_from_path(a.h_file));
    const SscReport ssc = ssc_row_zero_check(H, a.tol >= 0.0 ? a.tol : std::numeric_limits<double>::quiet_NaN());
    out << "row,hoyer,zero_count,passes_zero_count,contained_in\n";
    for (Index i = 0; i < H.rows(); ++i) {
        out << i + 1 << ',' << format_double(hoyer_sparsity(H.row(i))) << ','
            << ssc.zero_counts[static_cast<std::size_t>(i)] << ',' << (ssc.row_passes[static_cast<std::size_t>(i)] ? 1 : 0)
            << ',';
        bool first = true;
        for (const auto& [p, q] : ssc.contained) {
            if (p != i) continue;
            out << (first ? "" : ";") << q + 1;
            first = false;
        }
        out << '\n';
    }
    out << "# tol=" << format_double(ssc.tol) << " mean_hoyer=" << format_double(mean_row_sparsity(H))
        << " all_pass=" << (ssc.all_pass ? 1 : 0) << '\n';
    return 0;
}

} // namespace

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    configure_threads_from_env();

    CLI::App app{"Multilayer, deep beta-NMF and min-vol deep KL-NMF"};
    app.require_subcommand(1);

    FactorizeArgs fa;
    auto* fz = app.add_subcommand("factorize", "Fit a multilayer, deep or min-vol factorization");
    fz->add_option("--input", fa.input, "Input matrix (.csv or .bin)")->required();
    fz->add_option("--method", fa.method)->check(CLI::IsMember({"multilayer", "deep", "minvol"}));
    fz->add_option("--beta", fa.beta, "0, 0.5, 1, 1.5 or 2");
    fz->add_option("--ranks", fa.ranks, "r1,r2,... strictly decreasing")->required()->delimiter(',');
    fz->add_option("--lambda", fa.lambda, "auto or l1,l2,...");
    fz->add_option("--alpha", fa.alpha, "a1,a2,... (minvol)")->delimiter(',');
    fz->add_option("--delta", fa.delta);
    fz->add_option("--rho", fa.rho);
    fz->add_option("--admm-iters", fa.admm_iters);
    fz->add_option("--admm-tol", fa.admm_tol);
    fz->add_option("--sweeps", fa.sweeps);
    fz->add_option("--warm-sweeps", fa.warm_sweeps);
    fz->add_option("--seed", fa.seed);
    fz->add_option("--eps", fa.eps, "Entrywise floor of every factor");
    fz->add_option("--out", fa.out, "Output directory")->required();
    fz->add_flag("--transpose", fa.transpose, "Factorize the transpose of the input");
    fz->add_flag("--wall-time", fa.wall_time, "Record elapsed seconds in the trace");
    fz->add_flag("--early-stop", fa.early_stop, "Stop when the relative objective change is below --rel-tol");
    fz->add_option("--rel-tol", fa.rel_tol);

    CompareArgs ca;
    auto* cp = app.add_subcommand("compare", "Per-layer error ratios and sparsity of two runs");
    cp->add_option("--deep", ca.deep)->required();
    cp->add_option("--baseline", ca.baseline)->required();
    cp->add_option("--out", ca.out, "CSV path (default: standard output)");

    RenderArgs ra;
    auto* rd = app.add_subcommand("render", "PGM mosaic of layer features");
    rd->add_option("--factors", ra.factors)->required();
    rd->add_option("--layer", ra.layer);
    rd->add_option("--tile", ra.tile, "HxW")->required();
    rd->add_option("--grid", ra.grid, "Tiles per mosaic row");
    rd->add_option("--out", ra.out);

    MetricsArgs ma;
    auto* mt = app.add_subcommand("metrics", "Hoyer sparsity and SSC zero-count report of a matrix");
    mt->add_option("--h-file", ma.h_file)->required();
    mt->add_option("--tol", ma.tol, "Zero threshold (default 1e-9 * max entry)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (fz->parsed()) return factorize(fa, out, err);
        if (cp->parsed()) return compare(ca, out, err);
        if (rd->parsed()) return render(ra, out);
        return metrics(ma, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace dbnmf

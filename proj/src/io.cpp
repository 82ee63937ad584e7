#include "dbnmf/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dbnmf {

static_assert(std::endian::native == std::endian::little, "binary matrix format assumes a little-endian host");

namespace {

constexpr char kMagic[6] = {'D', 'B', 'N', 'M', 'F', '1'};

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in)
{
    std::ifstream in(path, mode);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out)
{
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, std::size_t line)
{
    const std::string t = trim(field);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw ParseError("not a number: '" + t + "'", line);
    }
    return v;
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

} // namespace

MatrixFormat format_from_path(const std::string& path)
{
    return (path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0) ? MatrixFormat::binary
                                                                                 : MatrixFormat::csv;
}

std::string format_double(double value)
{
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    return std::string(buf, ptr);
}

DenseMatrix parse_csv_matrix(std::istream& in, ReadDiagnostics* diag)
{
    std::vector<double> values;
    Index cols = -1;
    Index rows = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto fields = split(t, ',');
        if (cols < 0) cols = static_cast<Index>(fields.size());
        if (static_cast<Index>(fields.size()) != cols) {
            throw ParseError("ragged row: expected " + std::to_string(cols) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        for (const auto& f : fields) {
            const double v = parse_double(f, line_no);
            if (!std::isfinite(v)) throw ParseError("non-finite entry", line_no);
            values.push_back(v);
        }
        ++rows;
    }
    DenseMatrix M(rows, std::max<Index>(cols, 0));
    if (rows > 0) M = Eigen::Map<const DenseMatrix>(values.data(), rows, cols);
    if (diag != nullptr) diag->negative_entries = static_cast<std::size_t>((M.array() < 0.0).count());
    return M;
}

DenseMatrix read_matrix(const std::string& path, MatrixFormat format, ReadDiagnostics* diag)
{
    if (format == MatrixFormat::csv) {
        auto in = open_in(path);
        return parse_csv_matrix(in, diag);
    }
    auto in = open_in(path, std::ios::binary);
    char magic[6];
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    in.read(magic, 6);
    in.read(reinterpret_cast<char*>(&rows), 8);
    in.read(reinterpret_cast<char*>(&cols), 8);
    if (!in || std::memcmp(magic, kMagic, 6) != 0) throw ParseError("'" + path + "' is not a DBNMF1 matrix", 1);
    if (cols != 0 && rows > (std::uint64_t{1} << 40) / cols) throw ParseError("implausible matrix size", 1);
    DenseMatrix M(static_cast<Index>(rows), static_cast<Index>(cols));
    in.read(reinterpret_cast<char*>(M.data()), static_cast<std::streamsize>(rows * cols * sizeof(double)));
    if (!in) throw ParseError("'" + path + "': payload shorter than header declares", 1);
    if (in.peek() != std::char_traits<char>::eof()) {
        throw ParseError("'" + path + "': payload longer than header declares", 1);
    }
    if (diag != nullptr) diag->negative_entries = static_cast<std::size_t>((M.array() < 0.0).count());
    return M;
}

void write_matrix(const DenseMatrix& M, const std::string& path, MatrixFormat format)
{
    if (format == MatrixFormat::csv) {
        auto out = open_out(path);
        for (Index i = 0; i < M.rows(); ++i) {
            for (Index j = 0; j < M.cols(); ++j) {
                if (j > 0) out << ',';
                out << format_double(M(i, j));
            }
            out << '\n';
        }
        if (!out) throw std::runtime_error("write failed for '" + path + "'");
        return;
    }
    auto out = open_out(path, std::ios::binary);
    const std::uint64_t rows = static_cast<std::uint64_t>(M.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(M.cols());
    out.write(kMagic, 6);
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&cols), 8);
    out.write(reinterpret_cast<const char*>(M.data()), static_cast<std::streamsize>(M.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

GrayImage render_mosaic(const DenseMatrix& features, Index tile_h, Index tile_w, Index grid_cols)
{
    if (tile_h < 1 || tile_w < 1 || grid_cols < 1) throw ConfigError("mosaic: tile and grid sizes must be >= 1");
    if (features.cols() != tile_h * tile_w) {
        throw DimensionError("mosaic: feature length " + std::to_string(features.cols()) + " does not match tile " +
                             shape_string(tile_h, tile_w));
    }
    const Index n = features.rows();
    const Index cols = std::min(grid_cols, std::max<Index>(n, 1));
    const Index grid_rows = (n + cols - 1) / cols;

    GrayImage img;
    img.height = std::max<Index>(grid_rows * tile_h + grid_rows - 1, 0);
    img.width = cols * tile_w + cols - 1;
    img.pixels.assign(static_cast<std::size_t>(img.height * img.width), 255);
    for (Index f = 0; f < n; ++f) {
        const Index top = (f / cols) * (tile_h + 1);
        const Index left = (f % cols) * (tile_w + 1);
        const double lo = features.row(f).minCoeff();
        const double hi = features.row(f).maxCoeff();
        for (Index y = 0; y < tile_h; ++y) {
            for (Index x = 0; x < tile_w; ++x) {
                const double v = features(f, y * tile_w + x);
                const double scaled = (hi > lo) ? std::round(255.0 * (v - lo) / (hi - lo)) : 0.0;
                img.pixels[static_cast<std::size_t>((top + y) * img.width + left + x)] =
                    static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
            }
        }
    }
    // cells past the last feature stay background
    for (Index f = n; f < grid_rows * cols; ++f) {
        const Index top = (f / cols) * (tile_h + 1);
        const Index left = (f % cols) * (tile_w + 1);
        for (Index y = 0; y < tile_h; ++y)
            for (Index x = 0; x < tile_w; ++x) img.pixels[static_cast<std::size_t>((top + y) * img.width + left + x)] = 0;
    }
    return img;
}

void write_pgm(const GrayImage& image, const std::string& path)
{
    auto out = open_out(path, std::ios::binary);
    out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_mosaic_pgm(const DenseMatrix& features, Index tile_h, Index tile_w, Index grid_cols,
                      const std::string& path)
{
    write_pgm(render_mosaic(features, tile_h, tile_w, grid_cols), path);
}

void write_trace(const ConvergenceTrace& trace, std::ostream& out, std::size_t layers)
{
    const std::size_t L = trace.empty() ? layers : trace.records.front().layer_error.size();
    out << "sweep,total_objective";
    for (std::size_t l = 1; l <= L; ++l) out << ",layer_err_" << l;
    for (std::size_t l = 1; l <= L; ++l) out << ",logdet_" << l;
    out << ",max_residual,seconds\n";
    for (const auto& r : trace.records) {
        if (r.layer_error.size() != L || (!r.logdet.empty() && r.logdet.size() != L)) {
            throw DimensionError("write_trace: records disagree on the layer count");
        }
        out << r.sweep << ',' << format_double(r.total);
        for (double v : r.layer_error) out << ',' << format_double(v);
        for (std::size_t l = 0; l < L; ++l) out << ',' << format_double(r.logdet.empty() ? 0.0 : r.logdet[l]);
        out << ',' << format_double(r.max_residual) << ',' << format_double(r.seconds) << '\n';
    }
}

void write_trace(const ConvergenceTrace& trace, const std::string& path, std::size_t layers)
{
    auto out = open_out(path);
    write_trace(trace, out, layers);
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

ConvergenceTrace read_trace(const std::string& path)
{
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty trace file", 1);
    const auto header = split(trim(line), ',');
    if (header.size() < 4 || header[0] != "sweep" || header[1] != "total_objective" ||
        header[header.size() - 1] != "seconds" || header[header.size() - 2] != "max_residual" ||
        (header.size() - 4) % 2 != 0) {
        throw ParseError("unrecognized trace header", 1);
    }
    const std::size_t L = (header.size() - 4) / 2;
    ConvergenceTrace trace;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split(trim(line), ',');
        if (f.size() != header.size()) throw ParseError("trace row has the wrong number of fields", line_no);
        TraceRecord r;
        r.sweep = static_cast<int>(parse_double(f[0], line_no));
        r.total = parse_double(f[1], line_no);
        for (std::size_t l = 0; l < L; ++l) r.layer_error.push_back(parse_double(f[2 + l], line_no));
        for (std::size_t l = 0; l < L; ++l) r.logdet.push_back(parse_double(f[2 + L + l], line_no));
        r.max_residual = parse_double(f[2 + 2 * L], line_no);
        r.seconds = parse_double(f[3 + 2 * L], line_no);
        trace.records.push_back(std::move(r));
    }
    return trace;
}

void write_manifest(const std::vector<std::pair<std::string, std::string>>& entries, const std::string& path)
{
    auto out = open_out(path);
    for (const auto& [k, v] : entries) out << k << '=' << v << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::map<std::string, std::string> read_manifest(const std::string& path)
{
    auto in = open_in(path);
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || trim(line)[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("manifest line without '='", line_no);
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

} // namespace dbnmf

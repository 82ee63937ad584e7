#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dbnmf/model.hpp"

namespace dbnmf {

enum class MatrixFormat { csv, binary };

/// ".bin" selects binary, anything else CSV.
MatrixFormat format_from_path(const std::string& path);

struct ReadDiagnostics {
    std::size_t negative_entries = 0;
    bool has_negative() const noexcept { return negative_entries > 0; }
};

/// CSV: one row per line, comma-separated reals, blank and '#' lines skipped.
DenseMatrix parse_csv_matrix(std::istream& in, ReadDiagnostics* diag = nullptr);

/// Binary: "DBNMF1", u64 rows, u64 cols, then rows*cols doubles, all little-endian, row-major.
DenseMatrix read_matrix(const std::string& path, MatrixFormat format, ReadDiagnostics* diag = nullptr);
void write_matrix(const DenseMatrix& M, const std::string& path, MatrixFormat format);

struct GrayImage {
    Index height = 0;
    Index width = 0;
    std::vector<std::uint8_t> pixels; ///< row-major
};

/// Each row of `features` becomes a tile_h x tile_w tile, min-max mapped to
/// [0, 255] (constant rows map to 0), tiled row-major over grid_cols columns
/// with 1-pixel separators of value 255.
GrayImage render_mosaic(const DenseMatrix& features, Index tile_h, Index tile_w, Index grid_cols);
void write_pgm(const GrayImage& image, const std::string& path);
void write_mosaic_pgm(const DenseMatrix& features, Index tile_h, Index tile_w, Index grid_cols,
                      const std::string& path);

/// Header: sweep,total_objective,layer_err_1..L,logdet_1..L,max_residual,seconds.
/// L comes from the first record, or from `layers` when the trace is empty.
void write_trace(const ConvergenceTrace& trace, const std::string& path, std::size_t layers = 0);
void write_trace(const ConvergenceTrace& trace, std::ostream& out, std::size_t layers = 0);
ConvergenceTrace read_trace(const std::string& path);

/// key=value lines, in the given order.
void write_manifest(const std::vector<std::pair<std::string, std::string>>& entries, const std::string& path);
std::map<std::string, std::string> read_manifest(const std::string& path);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double value);

} // namespace dbnmf

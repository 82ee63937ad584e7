#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dbnmf/io.hpp"
#include "support.hpp"

using namespace dbnmf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "dbnmf_io_tests";
    fs::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("CSV parsing")
{
    std::istringstream in("1,2\n3,4\n");
    const DenseMatrix m = parse_csv_matrix(in);
    DenseMatrix expected(2, 2);
    expected << 1, 2, 3, 4;
    CHECK(m == expected);
}

TEST_CASE("CSV comments and negative entries")
{
    std::istringstream in("# header\n1,-2\n\n3,4\n");
    ReadDiagnostics diag;
    const DenseMatrix m = parse_csv_matrix(in, &diag);
    CHECK(m.rows() == 2);
    CHECK(diag.negative_entries == 1);
}

TEST_CASE("ragged CSV reports the line")
{
    std::istringstream in("1,2\n3\n");
    try {
        parse_csv_matrix(in);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    std::istringstream bad("1,x\n");
    CHECK_THROWS_AS(parse_csv_matrix(bad), ParseError);
}

TEST_CASE("binary round trip is bitwise exact")
{
    std::mt19937_64 rng(1);
    const DenseMatrix m = testing::uniform_matrix(7, 3, rng) * 1e-7;
    const std::string path = scratch("m.bin").string();
    CHECK(format_from_path(path) == MatrixFormat::binary);
    write_matrix(m, path, MatrixFormat::binary);
    CHECK(read_matrix(path, MatrixFormat::binary) == m);
}

TEST_CASE("CSV round trip keeps every bit")
{
    std::mt19937_64 rng(2);
    const DenseMatrix m = testing::uniform_matrix(4, 5, rng) / 3.0;
    const std::string path = scratch("m.csv").string();
    CHECK(format_from_path(path) == MatrixFormat::csv);
    write_matrix(m, path, MatrixFormat::csv);
    CHECK(read_matrix(path, MatrixFormat::csv) == m);
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("empty and single-entry binary matrices round trip")
{
    const std::string path = scratch("e.bin").string();
    write_matrix(DenseMatrix(0, 3), path, MatrixFormat::binary);
    const DenseMatrix e = read_matrix(path, MatrixFormat::binary);
    CHECK(e.rows() == 0);
    CHECK(e.cols() == 3);
    write_matrix(DenseMatrix::Constant(1, 1, -0.0), path, MatrixFormat::binary);
    CHECK(std::signbit(read_matrix(path, MatrixFormat::binary)(0, 0)));
}

TEST_CASE("truncated binary file is rejected")
{
    const std::string path = scratch("t.bin").string();
    write_matrix(DenseMatrix::Constant(3, 3, 1.0), path, MatrixFormat::binary);
    fs::resize_file(path, fs::file_size(path) - 8);
    CHECK_THROWS_AS(read_matrix(path, MatrixFormat::binary), ParseError);
}

TEST_CASE("mosaic min-max mapping")
{
    DenseMatrix f(1, 4);
    f << 0, 1, 2, 3;
    const GrayImage img = render_mosaic(f, 2, 2, 1);
    CHECK(img.height == 2);
    CHECK(img.width == 2);
    CHECK(img.pixels == std::vector<std::uint8_t>{0, 85, 170, 255});

    const GrayImage flat = render_mosaic(DenseMatrix::Constant(1, 4, 7.0), 2, 2, 1);
    for (auto p : flat.pixels) CHECK(p == 0);
    CHECK_THROWS(render_mosaic(f, 3, 2, 1));
}

TEST_CASE("mosaic grid with separators")
{
    const GrayImage img = render_mosaic(DenseMatrix::Zero(4, 4), 2, 2, 2);
    REQUIRE(img.height == 5);
    REQUIRE(img.width == 5);
    for (Index k = 0; k < 5; ++k) {
        CHECK(img.pixels[static_cast<std::size_t>(2 * 5 + k)] == 255);
        CHECK(img.pixels[static_cast<std::size_t>(k * 5 + 2)] == 255);
    }
    CHECK(img.pixels[0] == 0);
}

TEST_CASE("PGM file layout")
{
    DenseMatrix f(1, 4);
    f << 0, 1, 2, 3;
    const std::string path = scratch("f.pgm").string();
    write_mosaic_pgm(f, 2, 2, 1, path);
    std::ifstream in(path, std::ios::binary);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(bytes.rfind("P5", 0) == 0);
    CHECK(bytes.substr(bytes.size() - 4) == std::string("\x00\x55\xaa\xff", 4));
}

TEST_CASE("trace files")
{
    const std::string path = scratch("trace.csv").string();
    write_trace(ConvergenceTrace{}, path, 2);
    {
        std::ifstream in(path);
        std::string line;
        int lines = 0;
        while (std::getline(in, line)) ++lines;
        CHECK(lines == 1);
    }

    ConvergenceTrace t;
    for (int k = 1; k <= 3; ++k) {
        TraceRecord r;
        r.sweep = k;
        r.total = 1.0 / (3.0 * k);
        r.layer_error = {0.1 * k, 0.2 / k};
        r.logdet = {0.0, -1.0 / 7.0};
        r.max_residual = 1e-17 * k;
        r.seconds = 0.0;
        t.records.push_back(r);
    }
    write_trace(t, path);
    std::ifstream in(path);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 4);

    const ConvergenceTrace back = read_trace(path);
    REQUIRE(back.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(back.records[k].sweep == t.records[k].sweep);
        CHECK(back.records[k].total == t.records[k].total);
        CHECK(back.records[k].layer_error == t.records[k].layer_error);
        CHECK(back.records[k].logdet == t.records[k].logdet);
        CHECK(back.records[k].max_residual == t.records[k].max_residual);
    }
}

TEST_CASE("manifest round trip")
{
    const std::string path = scratch("manifest.txt").string();
    write_manifest({{"rho", "100"}, {"ranks", "8,4"}}, path);
    const auto m = read_manifest(path);
    CHECK(m.at("rho") == "100");
    CHECK(m.at("ranks") == "8,4");
}

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "mfgabs/error.hpp"
#include "mfgabs/io.hpp"
#include "mfgabs/mfg.hpp"
#include "mfgabs/reference_models.hpp"

using namespace mfgabs;
namespace fs = std::filesystem;

namespace {

std::size_t line_count(const std::string& s)
{
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

fs::path scratch_dir(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("mfgabs_unit_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("format_double round-trips")
{
    for (double v : {0.0, 1.0, -2.5, 0.1, 1e-300, 123456789.123, std::nextafter(1.0, 2.0)})
        CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("chaos and nash CSV tables")
{
    ChaosTable t(3);
    for (std::size_t i = 0; i < 3; ++i)
        t[i].N = 50 << i;
    const std::string csv = chaos_csv(t);
    CHECK(line_count(csv) == 4);
    CHECK(first_line(csv) == "N,reps,w1_mean,w1_se,massgap_mean");

    const std::string empty = nash_gap_csv({});
    CHECK(line_count(empty) == 1);
    CHECK(first_line(empty).rfind("N,", 0) == 0);
    NashGapRow row;
    row.N = 7;
    row.gap = 0.25;
    const std::string one = nash_gap_csv({row});
    CHECK(line_count(one) == 2);
    CHECK(one.find("\n7,") != std::string::npos);
}

TEST_CASE("flow and absorption CSV shapes")
{
    const ModelSpec model(brownian_benchmark());
    const Grid grid = default_grid(model, 20, 10);
    const SubProbFlow flow = uncontrolled_flow(model, grid);
    CHECK(line_count(flow_csv(flow)) == grid.time_points() + 1);

    EmpiricalRecord r;
    r.particles = 2;
    r.steps = 4;
    r.tau = {0.5, std::numeric_limits<double>::infinity()};
    const std::string a = absorption_csv(r);
    CHECK(line_count(a) == 3);
    CHECK(a.find("inf") != std::string::npos);
}

TEST_CASE("matrix encode/decode round-trip")
{
    const ModelSpec model(brownian_benchmark());
    const Grid grid = default_grid(model, 20, 10);
    const SubProbFlow flow = uncontrolled_flow(model, grid);
    const MatrixFile m = density_matrix(flow);
    CHECK(m.rows == grid.time_points());
    CHECK(m.cols == grid.state_points());
    CHECK(m.x0 == grid.x_lo);
    CHECK(m.dx == grid.dx());
    const std::string bytes = encode_matrix(m);
    CHECK(bytes.size() == 4 + 4 + 16 + 8 * 6 + 8 * m.values.size());
    CHECK(bytes.substr(0, 4) == "MFGM");
    CHECK(decode_matrix(bytes, "mem") == m);

    const fs::path dir = scratch_dir("matrix");
    write_matrix(dir / "d.mfgm", m);
    CHECK(read_matrix(dir / "d.mfgm") == m);
    fs::remove_all(dir);
}

TEST_CASE("matrix decode rejects corrupt data")
{
    MatrixFile m;
    m.rows = 2;
    m.cols = 2;
    m.values = {1, 2, 3, 4};
    const std::string bytes = encode_matrix(m);
    CHECK_THROWS_AS(decode_matrix(bytes.substr(0, bytes.size() - 1), "short"), IoError);
    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(decode_matrix(bad_magic, "magic"), IoError);
    std::string bad_version = bytes;
    bad_version[4] = 9;
    CHECK_THROWS_AS(decode_matrix(bad_version, "version"), IoError);
    m.values.pop_back();
    CHECK_THROWS(encode_matrix(m));
}

TEST_CASE("write_text errors name the path")
{
    const fs::path dir = scratch_dir("text");
    write_text(dir / "a.txt", "hello");
    std::ifstream is(dir / "a.txt");
    std::stringstream ss;
    ss << is.rdbuf();
    CHECK(ss.str() == "hello");

    const fs::path bad = dir / "missing" / "deeper" / "b.txt";
    try {
        write_text(bad, "x");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find(bad.string()) != std::string::npos);
    }
    fs::remove_all(dir);
}

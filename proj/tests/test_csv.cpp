#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "fdrp/csv.hpp"
#include "fdrp/rng.hpp"

using namespace fdrp;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("fdrp_csv_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    f << text;
}

}  // namespace

TEST_CASE("matrices round-trip exactly") {
    TempDir dir;
    Rng rng(1);
    Eigen::MatrixXd m(7, 4);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) = rng.normal() * std::pow(10.0, (i + j) % 7 - 3);
    m(0, 0) = 0.0;
    m(1, 1) = -1.0 / 3.0;
    const std::string path = dir.file("m.csv");
    write_matrix_csv(path, m);
    const Eigen::MatrixXd back = read_matrix_csv(path);
    REQUIRE(back.rows() == 7);
    REQUIRE(back.cols() == 4);
    REQUIRE(back == m);  // %.17g preserves doubles bit for bit
}

TEST_CASE("plain curve files default to a unit-step grid") {
    TempDir dir;
    const std::string path = dir.file("c.csv");
    write_text(path, "1,2,3\n4,5,6\n");
    const CurveSet cs = read_curves_csv(path);
    REQUIRE(cs.num_curves() == 2);
    REQUIRE(cs.num_points() == 3);
    REQUIRE(cs.grid.points == std::vector<double>{1.0, 2.0, 3.0});
    REQUIRE(cs.values(1, 2) == 6.0);
}

TEST_CASE("a #t header row carries the sampling grid") {
    TempDir dir;
    const std::string path = dir.file("c.csv");
    write_text(path, "#t,0.0,0.5,1.0\n1,2,3\n");
    const CurveSet cs = read_curves_csv(path);
    REQUIRE(cs.num_curves() == 1);
    REQUIRE(cs.grid.points == std::vector<double>{0.0, 0.5, 1.0});

    write_text(path, "#t,0.0,0.5\n1,2,3\n");
    REQUIRE_THROWS_WITH(read_curves_csv(path),
                        Catch::Matchers::ContainsSubstring("does not match"));
}

TEST_CASE("curves round-trip through their writer") {
    TempDir dir;
    CurveSet cs;
    cs.grid = TimeGrid::equispaced(-1.0, 1.0, 5);
    cs.values.resize(2, 5);
    Rng rng(9);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 5; ++j) cs.values(i, j) = rng.normal();
    const std::string path = dir.file("c.csv");
    write_curves_csv(path, cs);
    const CurveSet back = read_curves_csv(path);
    REQUIRE(back.values == cs.values);
    REQUIRE(back.grid.points == cs.grid.points);
}

TEST_CASE("malformed files are reported with their position") {
    TempDir dir;
    const std::string path = dir.file("bad.csv");

    write_text(path, "1,2,3\n4,5\n");
    REQUIRE_THROWS_WITH(read_matrix_csv(path), Catch::Matchers::ContainsSubstring("row 2"));

    write_text(path, "1,2\n3,oops\n");
    REQUIRE_THROWS_WITH(read_matrix_csv(path), Catch::Matchers::ContainsSubstring("row 2"));
    REQUIRE_THROWS_WITH(read_matrix_csv(path), Catch::Matchers::ContainsSubstring("column 2"));

    write_text(path, "");
    REQUIRE_THROWS_AS(read_matrix_csv(path), std::runtime_error);
    REQUIRE_THROWS_AS(read_matrix_csv(dir.file("missing.csv")), std::runtime_error);
}

TEST_CASE("blank lines and trailing carriage returns are tolerated") {
    TempDir dir;
    const std::string path = dir.file("crlf.csv");
    write_text(path, "1,2\r\n\r\n3,4\r\n\n");
    const Eigen::MatrixXd m = read_matrix_csv(path);
    REQUIRE(m.rows() == 2);
    REQUIRE(m(0, 1) == 2.0);
    REQUIRE(m(1, 0) == 3.0);
}

TEST_CASE("labels round-trip and reject fractions") {
    TempDir dir;
    const std::string path = dir.file("l.csv");
    write_labels_csv(path, {1, 2, 2, 3, 1});
    REQUIRE(read_labels_csv(path) == std::vector<int>{1, 2, 2, 3, 1});

    write_text(path, "1\n2.5\n");
    REQUIRE_THROWS_WITH(read_labels_csv(path), Catch::Matchers::ContainsSubstring("line 2"));
    write_text(path, "");
    REQUIRE_THROWS_AS(read_labels_csv(path), std::runtime_error);
}

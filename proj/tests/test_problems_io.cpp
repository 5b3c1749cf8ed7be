#include "velo/io.hpp"
#include "velo/problems.hpp"

#include "velo/operators.hpp"
#include "testers.hpp"

#include <doctest.h>
#include <cstdio>
#include <fstream>

using namespace velo;
using namespace velo::testing;

namespace {

std::string temp_path(const char* name) {
    return std::string("/tmp/velo_test_") + name;
}

std::vector<char> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE_BEGIN("problems_io");

TEST_CASE("normalize_and_presmooth") {
    Grid2D g(16, 16);
    SUBCASE("constant image maps to zeros") {
        ScalarField c{g, Array::Constant(16, 16, 7.0)};
        ScalarField out = normalize_and_presmooth(c, 1.0, 1.0);
        CHECK(linf_norm(out) == 0.0);
    }
    SUBCASE("range maps to [0,1] before smoothing") {
        ScalarField raw{g, Array::Zero(16, 16)};
        raw.data(3, 4) = 255.0;
        raw.data(5, 6) = 128.0;
        ScalarField out = normalize_and_presmooth(raw, 0.0, 0.0);
        CHECK(out.data.minCoeff() == 0.0);
        CHECK(out.data.maxCoeff() == 1.0);
        CHECK(out.data(5, 6) == doctest::Approx(128.0 / 255.0).epsilon(1e-15));
    }
}

TEST_CASE("synthetic problem generators") {
    Grid2D g(64, 64);
    SUBCASE("zero offset blobs coincide") {
        RegistrationProblem p = gen_blob_problem(g, 0.0, 0.0);
        CHECK(max_abs_diff(p.m_R.data, p.m_T.data) == 0.0);
    }
    SUBCASE("blob problem is symmetric under swap plus negated offset") {
        // For a grid-aligned offset the swapped problem equals the negated
        // one up to the global node shift k = offset / h (wrap tails ~1e-12).
        const int k = 8;
        const double o = k * g.h1();
        RegistrationProblem a = gen_blob_problem(g, o, 0.0);
        RegistrationProblem b = gen_blob_problem(g, -o, 0.0);
        double worst = 0.0;
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                // swap(a) = (a.m_T, a.m_R); match b after shifting nodes by k
                worst = std::max(worst, std::abs(a.m_T.data(i, j) -
                                                 b.m_R.data((i + k) % g.n1, j)));
                worst = std::max(worst, std::abs(a.m_R.data(i, j) -
                                                 b.m_T.data((i + k) % g.n1, j)));
            }
        CHECK(worst <= 1e-9);
    }
    SUBCASE("offset bound enforced") {
        CHECK_THROWS_AS(gen_blob_problem(g, 2.0, 0.0), std::invalid_argument);
    }
    SUBCASE("zero shift rectangles coincide; nonzero localizes at the mover") {
        RegistrationProblem same = gen_sliding_rectangles(g, 0.0);
        CHECK(max_abs_diff(same.m_R.data, same.m_T.data) == 0.0);
        RegistrationProblem moved = gen_sliding_rectangles(g, 0.4 * M_PI);
        Array diff = (moved.m_R.data - moved.m_T.data).abs();
        CHECK(diff.maxCoeff() > 0.5);
        // interior of the static left rectangle is untouched (rows near the
        // x1 = -pi boundary see the moved structure through the wrap)
        CHECK(diff.block(4, 0, g.n1 / 4 - 4, g.n2).maxCoeff() <= 1e-5);
    }
    SUBCASE("vent generator") {
        RegistrationProblem same = gen_sliding_vent(g, 0.0);
        CHECK(max_abs_diff(same.m_R.data, same.m_T.data) == 0.0);
        RegistrationProblem moved = gen_sliding_vent(g, 0.3 * M_PI);
        CHECK((moved.m_R.data - moved.m_T.data).abs().maxCoeff() > 0.5);
    }
    SUBCASE("generators are deterministic") {
        RegistrationProblem a = gen_sliding_rectangles(g, 0.2);
        RegistrationProblem b = gen_sliding_rectangles(g, 0.2);
        CHECK((a.m_R.data == b.m_R.data).all());
        CHECK((a.m_T.data == b.m_T.data).all());
    }
}

TEST_CASE("pgm round trip") {
    Grid2D g(16, 24);
    ScalarField f = random_field(g, 4, 3);
    f.data = (f.data - f.data.minCoeff()) / (f.data.maxCoeff() - f.data.minCoeff());
    const std::string path = temp_path("img.pgm");
    write_pgm(f, path);
    ScalarField back = read_pgm(path);
    CHECK(back.grid == g);
    CHECK(max_abs_diff(back.data, f.data) <= 1.0 / 255.0 + 1e-12);

    SUBCASE("extremes map exactly") {
        ScalarField ext(g);
        ext.data(0, 0) = 1.0;
        write_pgm(ext, path);
        ScalarField b2 = read_pgm(path);
        CHECK(b2.data(0, 0) == 1.0);
        CHECK(b2.data(1, 1) == 0.0);
    }
    SUBCASE("odd dimensions rejected") {
        std::ofstream out(temp_path("odd.pgm"), std::ios::binary);
        out << "P5\n15 16\n255\n";
        std::vector<char> px(15 * 16, 0);
        out.write(px.data(), px.size());
        out.close();
        CHECK_THROWS_AS(read_pgm(temp_path("odd.pgm")), io_error);
    }
    SUBCASE("missing file and bad magic reported distinctly") {
        CHECK_THROWS_WITH_AS(read_pgm("/tmp/velo_does_not_exist.pgm"),
                             doctest::Contains("cannot open"), io_error);
        std::ofstream out(temp_path("bad.pgm"), std::ios::binary);
        out << "P2\n16 16\n255\n";
        out.close();
        CHECK_THROWS_WITH_AS(read_pgm(temp_path("bad.pgm")),
                             doctest::Contains("not a binary"), io_error);
    }
}

TEST_CASE("raw field container") {
    Grid2D g(16, 24);
    SUBCASE("scalar round trip is bit exact") {
        ScalarField f = random_field(g, 5, 9);
        const std::string path = temp_path("scalar.raw");
        write_raw_field(f, path);
        ScalarField back = read_raw_scalar(path);
        CHECK((back.data == f.data).all());
        // and the bytes themselves are reproducible
        write_raw_field(back, temp_path("scalar2.raw"));
        CHECK(slurp(path) == slurp(temp_path("scalar2.raw")));
    }
    SUBCASE("header fields") {
        Grid2D g64(64, 64);
        write_raw_field(ScalarField(g64), temp_path("hdr.raw"));
        std::vector<char> bytes = slurp(temp_path("hdr.raw"));
        REQUIRE(bytes.size() == 32 + 64 * 64 * 8);
        CHECK(std::string(bytes.data(), 4) == "VELO");
        auto u32 = [&](int off) {
            return uint32_t(uint8_t(bytes[off])) | uint32_t(uint8_t(bytes[off + 1])) << 8 |
                   uint32_t(uint8_t(bytes[off + 2])) << 16 |
                   uint32_t(uint8_t(bytes[off + 3])) << 24;
        };
        CHECK(u32(4) == 1);   // version
        CHECK(u32(8) == 64);  // n1
        CHECK(u32(12) == 64); // n2
        CHECK(u32(16) == 1);  // components
        for (int off = 20; off < 32; ++off) CHECK(bytes[off] == 0);
    }
    SUBCASE("vector fields carry two components") {
        VectorField v = random_vector_field(g, 4, 11);
        write_raw_field(v, temp_path("vec.raw"));
        VectorField back = read_raw_vector(temp_path("vec.raw"));
        CHECK((back.x == v.x).all());
        CHECK((back.y == v.y).all());
        CHECK_THROWS_AS(read_raw_scalar(temp_path("vec.raw")), io_error);
    }
    SUBCASE("bad magic rejected") {
        std::ofstream out(temp_path("bad.raw"), std::ios::binary);
        out << "NOPE" << std::string(60, '\0');
        out.close();
        CHECK_THROWS_AS(read_raw_field(temp_path("bad.raw")), io_error);
    }
}

TEST_CASE("det(F) colormap") {
    Grid2D g(8, 8);
    const std::string path = temp_path("det.ppm");
    SUBCASE("unit determinant renders pure orange") {
        ScalarField det{g, Array::Ones(8, 8)};
        write_detf_colormap(det, 0.0, 2.0, path);
        std::vector<char> bytes = slurp(path);
        const size_t header = std::string("P6\n8 8\n255\n").size();
        REQUIRE(bytes.size() == header + 8 * 8 * 3);
        for (size_t i = header; i < bytes.size(); i += 3) {
            CHECK(uint8_t(bytes[i]) == 255);
            CHECK(uint8_t(bytes[i + 1]) == 165);
            CHECK(uint8_t(bytes[i + 2]) == 0);
        }
    }
    SUBCASE("values at or below the window floor are black") {
        ScalarField det{g, Array::Constant(8, 8, -0.3)};
        write_detf_colormap(det, 0.0, 2.0, path);
        std::vector<char> bytes = slurp(path);
        const size_t header = std::string("P6\n8 8\n255\n").size();
        for (size_t i = header; i < bytes.size(); ++i) CHECK(bytes[i] == 0);
    }
    SUBCASE("window must straddle one") {
        ScalarField det{g, Array::Ones(8, 8)};
        CHECK_THROWS_AS(write_detf_colormap(det, 1.5, 2.0, path), std::invalid_argument);
    }
}

TEST_CASE("csv writer") {
    const std::string path = temp_path("table.csv");
    {
        CsvWriter csv(path);
        csv.row({"a", "b,c", "d\"e"});
        csv.row({CsvWriter::num(0.1), CsvWriter::num(long(42))});
    }
    std::ifstream in(path);
    std::string l1, l2;
    std::getline(in, l1);
    std::getline(in, l2);
    CHECK(l1 == "a,\"b,c\",\"d\"\"e\"");
    CHECK(l2 == "0.10000000000000001,42");
}

TEST_SUITE_END();

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cst/geometry.hpp>
#include <cst/io.hpp>
#include <cst/mesh.hpp>
#include <cst/phantom.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace cst;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(static_cast<bool>(in));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempPath {
    std::string path;
    explicit TempPath(const std::string& name) : path("io_test_" + name) {}
    ~TempPath() {
        std::remove(path.c_str());
        std::remove((path + ".meta").c_str());
    }
};

}  // namespace

TEST_CASE("format_double round-trips exactly") {
    const std::vector<double> samples = {0.0,      1.0,       -1.0,     0.1,  1.0 / 3.0,
                                         1e-300,   1e300,     3.68,     2.63, 0.005,
                                         6.02e23,  -2.5e-8,   1e22,     1e23, 123456789.123456789,
                                         0.1 + 0.2};
    for (double v : samples) {
        CAPTURE(v);
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
    // shortest representation, not a fixed-precision dump
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5) == "-2.5");
}

TEST_CASE("csv_escape follows the quoting convention") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("") == "");
    CHECK(csv_escape("3.68") == "3.68");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
    CHECK(csv_escape("cr\rhere") == "\"cr\rhere\"");
    CHECK(csv_escape(",") == "\",\"");
    CHECK(csv_escape("\"") == "\"\"\"\"");
}

TEST_CASE("CsvWriter emits exactly the expected bytes") {
    TempPath tmp("writer.csv");
    {
        CsvWriter w(tmp.path);
        w.comment("provenance stamp");
        w.row({"alpha", "b,eta", "1.5"});
        w.row({"x", "quote\"y", ""});
        w.close();
    }
    CHECK(slurp(tmp.path) ==
          "# provenance stamp\n"
          "alpha,\"b,eta\",1.5\n"
          "x,\"quote\"\"y\",\n");
}

TEST_CASE("write_pgm produces a valid binary PGM and meta sidecar") {
    GrayImage img;
    img.width = 3;
    img.height = 2;
    img.pixels = {0, 128, 255, 7, 70, 200};

    TempPath tmp("img.pgm");
    write_pgm(tmp.path, img, -1.5, 2.5, {"note first", "note second"});

    const std::string bytes = slurp(tmp.path);
    const std::string header = "P5\n3 2\n255\n";
    REQUIRE(bytes.size() == header.size() + 6);
    CHECK(bytes.substr(0, header.size()) == header);
    for (int i = 0; i < 6; ++i)
        CHECK(static_cast<uint8_t>(bytes[header.size() + i]) == img.pixels[i]);

    const std::string meta = slurp(tmp.path + ".meta");
    CHECK(meta == "vmin -1.5\nvmax 2.5\nnote first\nnote second\n");

    SUBCASE("dimension mismatch is rejected") {
        img.pixels.pop_back();
        CHECK_THROWS_AS(write_pgm(tmp.path, img, 0.0, 1.0, {}), std::invalid_argument);
    }
}

TEST_CASE("render_mesh_values maps values linearly and follows pixel containment") {
    // 2x2 uniform mesh over a 2x2 square: four unit pixels, known values.
    const ConvexPolygon square = make_square({0.0, 0.0}, 2.0);
    const Mesh mesh = build_uniform_mesh(square, 1.0, Rect{-1.0, -1.0, 1.0, 1.0});
    REQUIRE(mesh.size() == 4);

    // Values keyed by pixel centre quadrant so the expectation is explicit.
    std::vector<double> values(4, 0.0);
    for (const auto& p : mesh.pixels) {
        const Vec2 c = p.rect.center();
        if (c.x < 0 && c.y < 0) values[p.id] = 0.0;   // bottom-left
        if (c.x > 0 && c.y < 0) values[p.id] = 1.0;   // bottom-right
        if (c.x < 0 && c.y > 0) values[p.id] = 2.0;   // top-left
        if (c.x > 0 && c.y > 0) values[p.id] = 4.0;   // top-right
    }

    const RenderedRaster r = render_mesh_values(mesh, values, 8);
    CHECK(r.vmin == 0.0);
    CHECK(r.vmax == 4.0);
    REQUIRE(r.image.width == 8);
    REQUIRE(r.image.height == 8);  // square bounding box keeps the aspect ratio

    // gray = lround(255 * (v - vmin) / (vmax - vmin)); top row has the largest y.
    const auto gray = [&](double v) {
        return static_cast<uint8_t>(std::lround(255.0 * (v - r.vmin) / (r.vmax - r.vmin)));
    };
    CHECK(r.image.at(0, 0) == gray(2.0));  // top-left quadrant
    CHECK(r.image.at(7, 0) == gray(4.0));  // top-right
    CHECK(r.image.at(0, 7) == gray(0.0));  // bottom-left
    CHECK(r.image.at(7, 7) == gray(1.0));  // bottom-right
    // Every sample point inside a quadrant maps to that pixel's gray level.
    for (int row = 0; row < 4; ++row)
        for (int col = 4; col < 8; ++col) CHECK(r.image.at(col, row) == gray(4.0));

    SUBCASE("constant values render as 0 because the range is empty") {
        const RenderedRaster flat = render_mesh_values(mesh, {3.0, 3.0, 3.0, 3.0}, 4);
        CHECK(flat.vmin == 3.0);
        CHECK(flat.vmax == 3.0);
        for (uint8_t px : flat.image.pixels) CHECK(px == 0);
    }

    SUBCASE("points outside every mesh pixel render as 0") {
        // Octagonal sensing region: bounding-box corners lie outside the mesh.
        const BeamLayout layout = build_beam_layout(4, 8, 1.8, 36.8);
        const ConvexPolygon oct = ros_polygon(layout);
        const Mesh m = build_hybrid_mesh(oct, 3.68, 1.84, Rect{-11.04, -11.04, 11.04, 11.04});
        std::vector<double> ones(static_cast<size_t>(m.size()), 1.0);
        ones[0] = 0.0;  // keep the range non-degenerate
        const RenderedRaster rr = render_mesh_values(m, ones, 64);
        CHECK(rr.image.at(0, 0) == 0);
        CHECK(rr.image.at(63, 63) == 0);
    }

    SUBCASE("argument validation") {
        CHECK_THROWS_AS(render_mesh_values(mesh, {1.0, 2.0}, 8), std::invalid_argument);
        CHECK_THROWS_AS(render_mesh_values(mesh, values, 0), std::invalid_argument);
    }
}

TEST_CASE("render_field samples the raster with the top row at the largest y") {
    const ConvexPolygon square = make_square({0.0, 0.0}, 4.0);
    Field f = build_field(square, 2.0, 0.0, {}, 294.15, 1.0, 1.0);
    REQUIRE(f.nx == 2);
    REQUIRE(f.ny == 2);
    f.values = {0.0, 0.25,   // bottom row (j = 0)
                0.5, 1.0};   // top row (j = 1)

    const RenderedRaster r = render_field(f, 4);
    CHECK(r.vmin == 0.0);
    CHECK(r.vmax == 1.0);
    REQUIRE(r.image.width == 4);
    REQUIRE(r.image.height == 4);
    CHECK(r.image.at(0, 0) == 128);  // top-left: value 0.5
    CHECK(r.image.at(3, 0) == 255);  // top-right: value 1.0
    CHECK(r.image.at(0, 3) == 0);    // bottom-left: value 0.0
    CHECK(r.image.at(3, 3) == 64);   // bottom-right: value 0.25

    CHECK_THROWS_AS(render_field(f, 0), std::invalid_argument);
}

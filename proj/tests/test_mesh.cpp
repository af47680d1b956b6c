#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cst/mesh.hpp"

using namespace cst;

namespace {

// Brute-force adjacency oracle: two axis-aligned rectangles are neighbours iff
// they overlap on a segment of positive length along a shared edge line.
double shared_edge(const Rect& p, const Rect& q) {
    const double tol = 1e-9;
    if (std::abs(p.xmax - q.xmin) < tol || std::abs(q.xmax - p.xmin) < tol) {
        const double lo = std::max(p.ymin, q.ymin);
        const double hi = std::min(p.ymax, q.ymax);
        if (hi - lo > tol) return hi - lo;
    }
    if (std::abs(p.ymax - q.ymin) < tol || std::abs(q.ymax - p.ymin) < tol) {
        const double lo = std::max(p.xmin, q.xmin);
        const double hi = std::min(p.xmax, q.xmax);
        if (hi - lo > tol) return hi - lo;
    }
    return 0.0;
}

void check_mesh_wellformed(const Mesh& mesh) {
    REQUIRE(mesh.size() == mesh.n_in + mesh.n_out);
    for (int j = 0; j < mesh.size(); ++j) {
        const Pixel& px = mesh.pixels[j];
        CHECK(px.id == j);
        CHECK(px.area() > 0.0);
        CHECK(px.region == (j < mesh.n_in ? Region::InRoI : Region::OutRoI));
    }
    // pairwise interior-disjoint
    for (int i = 0; i < mesh.size(); ++i) {
        for (int j = i + 1; j < mesh.size(); ++j) {
            const Rect& p = mesh.pixels[i].rect;
            const Rect& q = mesh.pixels[j].rect;
            const double ox = std::min(p.xmax, q.xmax) - std::max(p.xmin, q.xmin);
            const double oy = std::min(p.ymax, q.ymax) - std::max(p.ymin, q.ymin);
            CHECK((ox <= 1e-9 || oy <= 1e-9));
        }
    }
}

}  // namespace

TEST_CASE("grid axis tiles exactly when divisible") {
    const GridAxis ax = grid_axis(0.0, 7.0, 1.0);
    CHECK(ax.n == 7);
    CHECK(ax.x0 == doctest::Approx(-3.5));
    CHECK(ax.edge(7) == doctest::Approx(3.5));
    CHECK(ax.center(3) == doctest::Approx(0.0));
}

TEST_CASE("grid axis anchors to the centre otherwise") {
    const GridAxis ax = grid_axis(0.0, 7.0, 2.0);
    // cells anchored on the centre, even count, overhanging evenly
    CHECK(ax.n % 2 == 0);
    CHECK(ax.edge(0) <= -3.5);
    CHECK(ax.edge(ax.n) >= 3.5);
    CHECK(ax.x0 + (ax.n / 2) * ax.h == doctest::Approx(0.0));
}

TEST_CASE("uniform 7x7 demonstration mesh") {
    const ConvexPolygon ros = make_square({0.0, 0.0}, 7.0);
    const Mesh mesh = build_uniform_mesh(ros, 1.0, Rect{-2.5, -2.5, 2.5, 2.5});
    CHECK(mesh.size() == 49);
    CHECK(mesh.n_in == 25);
    CHECK(mesh.n_out == 24);
    CHECK(mesh.scheme == MeshScheme::Uniform);
    check_mesh_wellformed(mesh);

    // exact coverage of the square
    double covered = 0.0;
    for (const Pixel& px : mesh.pixels) covered += px.area();
    CHECK(covered == doctest::Approx(49.0).epsilon(1e-12));
}

TEST_CASE("uniform 10x10 demonstration mesh") {
    const ConvexPolygon ros = make_square({0.0, 0.0}, 7.0);
    const Mesh mesh = build_uniform_mesh(ros, 0.7, Rect{-2.1, -2.1, 2.1, 2.1});
    CHECK(mesh.size() == 100);
    CHECK(mesh.n_in == 36);
}

TEST_CASE("hybrid demonstration mesh") {
    const ConvexPolygon ros = make_square({0.0, 0.0}, 7.0);
    const Mesh mesh = build_hybrid_mesh(ros, 1.4, 0.7, Rect{-2.1, -2.1, 2.1, 2.1});
    CHECK(mesh.size() == 52);
    CHECK(mesh.n_in == 36);
    CHECK(mesh.n_out == 16);
    CHECK(mesh.scheme == MeshScheme::Hybrid);
    check_mesh_wellformed(mesh);

    // fine pixels are 0.7-squares, coarse are 1.4-squares
    for (int j = 0; j < mesh.n_in; ++j) {
        CHECK(mesh.pixels[j].rect.width() == doctest::Approx(0.7));
        CHECK(mesh.pixels[j].rect.height() == doctest::Approx(0.7));
    }
    for (int j = mesh.n_in; j < mesh.size(); ++j)
        CHECK(mesh.pixels[j].rect.width() == doctest::Approx(1.4));

    double covered = 0.0;
    for (const Pixel& px : mesh.pixels) covered += px.area();
    CHECK(covered == doctest::Approx(49.0).epsilon(1e-12));

    // refinement block must sit on coarse grid lines
    CHECK_THROWS_AS(build_hybrid_mesh(ros, 1.4, 0.7, Rect{-2.0, -2.0, 2.0, 2.0}),
                    std::invalid_argument);
    // fine size must divide the coarse size
    CHECK_THROWS_AS(build_hybrid_mesh(ros, 1.4, 0.6, Rect{-2.1, -2.1, 2.1, 2.1}),
                    std::invalid_argument);
}

TEST_CASE("simulation meshes on the octagonal region") {
    const BeamLayout layout = build_beam_layout(4, 8, 1.8, 36.8);
    const ConvexPolygon ros = ros_polygon(layout);

    const Mesh hyb = build_hybrid_mesh(ros, 3.68, 1.84, Rect{-11.04, -11.04, 11.04, 11.04});
    CHECK(hyb.size() == 196);
    CHECK(hyb.n_in == 144);
    CHECK(hyb.n_out == 52);

    const Mesh uni = build_uniform_mesh(ros, 2.63, Rect{-10.52, -10.52, 10.52, 10.52});
    CHECK(uni.size() == 156);
    CHECK(uni.n_in == 64);
}

TEST_CASE("adjacency matches the brute-force oracle") {
    const ConvexPolygon ros = make_square({0.0, 0.0}, 7.0);
    for (const Mesh& mesh : {build_uniform_mesh(ros, 1.0, Rect{-2.5, -2.5, 2.5, 2.5}),
                             build_hybrid_mesh(ros, 1.4, 0.7, Rect{-2.1, -2.1, 2.1, 2.1})}) {
        const AdjacencyGraph adj = adjacency(mesh);

        std::set<std::pair<int, int>> seen;
        for (const AdjEdge& e : adj.edges) {
            CHECK(e.a < e.b);
            CHECK(e.shared_edge_length > 0.0);
            CHECK(seen.insert({e.a, e.b}).second);  // no duplicates

            const double oracle = shared_edge(mesh.pixels[e.a].rect, mesh.pixels[e.b].rect);
            CHECK(e.shared_edge_length == doctest::Approx(oracle).epsilon(1e-9));
            const Vec2 ca = mesh.pixels[e.a].rect.center();
            const Vec2 cb = mesh.pixels[e.b].rect.center();
            CHECK(e.centroid_distance == doctest::Approx(norm(ca - cb)).epsilon(1e-9));
        }
        // completeness: every touching pair appears
        for (int i = 0; i < mesh.size(); ++i)
            for (int j = i + 1; j < mesh.size(); ++j)
                if (shared_edge(mesh.pixels[i].rect, mesh.pixels[j].rect) > 0.0)
                    CHECK(seen.count({i, j}) == 1);
    }
}

TEST_CASE("interior pixel of a grid has four neighbours") {
    const ConvexPolygon ros = make_square({0.0, 0.0}, 3.0);
    const Mesh mesh = build_uniform_mesh(ros, 1.0, Rect{-1.5, -1.5, 1.5, 1.5});
    REQUIRE(mesh.size() == 9);
    const AdjacencyGraph adj = adjacency(mesh);
    CHECK(adj.edges.size() == 12);  // 2 * n * (n-1) for an n x n grid

    // the centre pixel participates in exactly 4 edges
    const Vec2 mid{0.0, 0.0};
    int centre = -1;
    for (const Pixel& px : mesh.pixels)
        if (norm(px.rect.center() - mid) < 1e-9) centre = px.id;
    REQUIRE(centre >= 0);
    int degree = 0;
    for (const AdjEdge& e : adj.edges)
        if (e.a == centre || e.b == centre) ++degree;
    CHECK(degree == 4);
}

TEST_CASE("mesh report summarises counts and sizes") {
    const ConvexPolygon ros = make_square({0.0, 0.0}, 7.0);
    const Mesh mesh = build_hybrid_mesh(ros, 1.4, 0.7, Rect{-2.1, -2.1, 2.1, 2.1});
    const MeshReport report = mesh_report(mesh);
    CHECK(report.n_total == 52);
    CHECK(report.n_in == 36);
    CHECK(report.n_out == 16);
    CHECK(report.covered_area == doctest::Approx(49.0));
    REQUIRE(report.pixel_size_histogram.size() == 2);
    CHECK(report.pixel_size_histogram.at(0.7) == 36);
    CHECK(report.pixel_size_histogram.at(1.4) == 16);
}

#include "cst/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cst {

namespace {

constexpr double kGeomTol = 1e-9;

double bounding_square_side(const ConvexPolygon& ros, Vec2 c) {
    const Rect bb = ros.bounding_box();
    const double half = std::max({c.x - bb.xmin, bb.xmax - c.x, c.y - bb.ymin, bb.ymax - c.y});
    return 2.0 * half;
}

void sort_scanline(std::vector<Pixel>& pixels) {
    std::sort(pixels.begin(), pixels.end(), [](const Pixel& a, const Pixel& b) {
        const Vec2 ca = a.rect.center();
        const Vec2 cb = b.rect.center();
        if (ca.y != cb.y) return ca.y < cb.y;
        return ca.x < cb.x;
    });
}

Mesh finalize(std::vector<Pixel> in_pixels, std::vector<Pixel> out_pixels, const Rect& roi_rect,
              MeshScheme scheme, std::string name) {
    sort_scanline(in_pixels);
    sort_scanline(out_pixels);
    Mesh mesh;
    mesh.scheme = scheme;
    mesh.roi_rect = roi_rect;
    mesh.name = std::move(name);
    mesh.n_in = static_cast<int>(in_pixels.size());
    mesh.n_out = static_cast<int>(out_pixels.size());
    mesh.pixels = std::move(in_pixels);
    mesh.pixels.insert(mesh.pixels.end(), out_pixels.begin(), out_pixels.end());
    for (int j = 0; j < mesh.size(); ++j) mesh.pixels[j].id = j;
    return mesh;
}

}  // namespace

GridAxis grid_axis(double center, double side, double h) {
    if (h <= 0.0 || side <= 0.0) throw std::invalid_argument("grid needs positive side and cell size");
    const double q = side / h;
    const double r = std::round(q);
    GridAxis axis;
    axis.h = h;
    if (r >= 1.0 && std::abs(q - r) <= 1e-9 * std::max(1.0, q)) {
        axis.n = static_cast<int>(r);
    } else {
        axis.n = 2 * static_cast<int>(std::ceil(side / (2.0 * h) - 1e-12));
        axis.n = std::max(axis.n, 2);
    }
    axis.x0 = center - axis.n * h / 2.0;
    return axis;
}

Mesh build_uniform_mesh(const ConvexPolygon& ros, double pixel_size, const Rect& roi_rect) {
    if (!ros.is_valid()) throw std::invalid_argument("invalid sensing region polygon");
    if (pixel_size <= 0.0) throw std::invalid_argument("pixel size must be positive");
    const Vec2 c = ros.centroid();
    const double side = bounding_square_side(ros, c);
    if (pixel_size > side * (1.0 + 1e-12)) {
        throw std::invalid_argument("pixel size exceeds the sensing region bounding box");
    }
    if (roi_rect.width() <= 0.0 || roi_rect.height() <= 0.0) {
        throw std::invalid_argument("RoI rectangle must have positive extent");
    }

    const GridAxis gx = grid_axis(c.x, side, pixel_size);
    const GridAxis gy = grid_axis(c.y, side, pixel_size);

    std::vector<Pixel> roi, rest;
    for (int j = 0; j < gy.n; ++j) {
        for (int i = 0; i < gx.n; ++i) {
            const Vec2 center{gx.center(i), gy.center(j)};
            if (!ros.contains(center, kGeomTol)) continue;
            Pixel px;
            px.rect = Rect{gx.edge(i), gy.edge(j), gx.edge(i + 1), gy.edge(j + 1)};
            const bool in_roi = roi_rect.contains(center, kGeomTol);
            px.region = in_roi ? Region::InRoI : Region::OutRoI;
            (in_roi ? roi : rest).push_back(px);
        }
    }
    if (roi.empty() && rest.empty()) throw std::invalid_argument("mesh is empty");

    std::ostringstream name;
    name << "uniform_h" << pixel_size;
    return finalize(std::move(roi), std::move(rest), roi_rect, MeshScheme::Uniform, name.str());
}

Mesh build_hybrid_mesh(const ConvexPolygon& ros, double h_out, double h_in, const Rect& refine_rect) {
    if (!ros.is_valid()) throw std::invalid_argument("invalid sensing region polygon");
    if (h_out <= 0.0 || h_in <= 0.0) throw std::invalid_argument("pixel sizes must be positive");
    const double ratio = h_out / h_in;
    const int r = static_cast<int>(std::round(ratio));
    if (std::abs(ratio - r) > 1e-9 * std::max(1.0, ratio) || r < 2) {
        throw std::invalid_argument("coarse/fine size ratio must be an integer >= 2");
    }
    if (refine_rect.width() <= 0.0 || refine_rect.height() <= 0.0) {
        throw std::invalid_argument("refinement block must have positive extent");
    }

    const Vec2 c = ros.centroid();
    const double side = bounding_square_side(ros, c);
    const GridAxis gx = grid_axis(c.x, side, h_out);
    const GridAxis gy = grid_axis(c.y, side, h_out);

    auto on_grid_line = [&](double v, const GridAxis& axis) {
        const double steps = (v - axis.x0) / axis.h;
        return std::abs(steps - std::round(steps)) <= 1e-9 * std::max(1.0, std::abs(steps));
    };
    if (!on_grid_line(refine_rect.xmin, gx) || !on_grid_line(refine_rect.xmax, gx) ||
        !on_grid_line(refine_rect.ymin, gy) || !on_grid_line(refine_rect.ymax, gy)) {
        throw std::invalid_argument("refinement block is not aligned to the coarse grid");
    }

    const double h_sub = h_out / r;  // keeps fine edges nested exactly
    std::vector<Pixel> roi, rest;
    for (int j = 0; j < gy.n; ++j) {
        for (int i = 0; i < gx.n; ++i) {
            const Rect cell{gx.edge(i), gy.edge(j), gx.edge(i + 1), gy.edge(j + 1)};
            const Vec2 center = cell.center();
            if (refine_rect.contains(center, kGeomTol)) {
                for (int fj = 0; fj < r; ++fj) {
                    for (int fi = 0; fi < r; ++fi) {
                        Pixel px;
                        px.rect = Rect{cell.xmin + fi * h_sub, cell.ymin + fj * h_sub,
                                       fi + 1 == r ? cell.xmax : cell.xmin + (fi + 1) * h_sub,
                                       fj + 1 == r ? cell.ymax : cell.ymin + (fj + 1) * h_sub};
                        px.region = Region::InRoI;
                        roi.push_back(px);
                    }
                }
            } else if (ros.contains(center, kGeomTol)) {
                Pixel px;
                px.rect = cell;
                px.region = Region::OutRoI;
                rest.push_back(px);
            }
        }
    }
    if (roi.empty()) throw std::invalid_argument("refinement block covers no coarse cell");

    std::ostringstream name;
    name << "hybrid_hin" << h_in << "_hout" << h_out;
    return finalize(std::move(roi), std::move(rest), refine_rect, MeshScheme::Hybrid, name.str());
}

AdjacencyGraph adjacency(const Mesh& mesh) {
    struct SideEdge {
        double pos;     // x of a vertical edge, y of a horizontal edge
        double lo, hi;  // interval along the edge
        int id;
        bool leading;  // true for xmax/ymax sides
    };

    auto collect = [&](bool vertical) {
        std::vector<SideEdge> sides;
        sides.reserve(mesh.pixels.size() * 2);
        for (const Pixel& p : mesh.pixels) {
            if (vertical) {
                sides.push_back({p.rect.xmin, p.rect.ymin, p.rect.ymax, p.id, false});
                sides.push_back({p.rect.xmax, p.rect.ymin, p.rect.ymax, p.id, true});
            } else {
                sides.push_back({p.rect.ymin, p.rect.xmin, p.rect.xmax, p.id, false});
                sides.push_back({p.rect.ymax, p.rect.xmin, p.rect.xmax, p.id, true});
            }
        }
        std::sort(sides.begin(), sides.end(),
                  [](const SideEdge& a, const SideEdge& b) { return a.pos < b.pos; });
        return sides;
    };

    AdjacencyGraph graph;
    auto match_group = [&](const std::vector<SideEdge>& sides) {
        const double tol = 1e-9;
        size_t i = 0;
        while (i < sides.size()) {
            size_t j = i + 1;
            while (j < sides.size() && sides[j].pos - sides[j - 1].pos <= tol) ++j;
            // sides[i..j) share one grid line; abutting pairs face each other
            for (size_t p = i; p < j; ++p) {
                if (!sides[p].leading) continue;
                for (size_t q = i; q < j; ++q) {
                    if (sides[q].leading) continue;
                    const double lo = std::max(sides[p].lo, sides[q].lo);
                    const double hi = std::min(sides[p].hi, sides[q].hi);
                    if (hi - lo > tol) {
                        AdjEdge e;
                        e.a = std::min(sides[p].id, sides[q].id);
                        e.b = std::max(sides[p].id, sides[q].id);
                        e.shared_edge_length = hi - lo;
                        const Vec2 ca = mesh.pixels[e.a].rect.center();
                        const Vec2 cb = mesh.pixels[e.b].rect.center();
                        e.centroid_distance = norm(cb - ca);
                        graph.edges.push_back(e);
                    }
                }
            }
            i = j;
        }
    };
    match_group(collect(true));
    match_group(collect(false));
    std::sort(graph.edges.begin(), graph.edges.end(), [](const AdjEdge& x, const AdjEdge& y) {
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    return graph;
}

MeshReport mesh_report(const Mesh& mesh) {
    MeshReport rep;
    rep.n_total = mesh.size();
    rep.n_in = mesh.n_in;
    rep.n_out = mesh.n_out;
    for (const Pixel& p : mesh.pixels) {
        const double key = std::round(p.rect.width() * 1e9) / 1e9;
        rep.pixel_size_histogram[key] += 1;
        rep.covered_area += p.area();
    }
    return rep;
}

}  // namespace cst

#include "cst/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace cst {

double ConvexPolygon::area() const {
    double twice = 0.0;
    const auto n = vertices.size();
    for (size_t i = 0; i < n; ++i) {
        twice += cross(vertices[i], vertices[(i + 1) % n]);
    }
    return 0.5 * twice;
}

Vec2 ConvexPolygon::centroid() const {
    double twice = 0.0;
    Vec2 c{0.0, 0.0};
    const auto n = vertices.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2 a = vertices[i];
        const Vec2 b = vertices[(i + 1) % n];
        const double w = cross(a, b);
        twice += w;
        c.x += (a.x + b.x) * w;
        c.y += (a.y + b.y) * w;
    }
    if (twice == 0.0) throw std::runtime_error("degenerate polygon has no centroid");
    return {c.x / (3.0 * twice), c.y / (3.0 * twice)};
}

Rect ConvexPolygon::bounding_box() const {
    if (vertices.empty()) throw std::runtime_error("empty polygon has no bounding box");
    Rect r{vertices[0].x, vertices[0].y, vertices[0].x, vertices[0].y};
    for (const Vec2& v : vertices) {
        r.xmin = std::min(r.xmin, v.x);
        r.ymin = std::min(r.ymin, v.y);
        r.xmax = std::max(r.xmax, v.x);
        r.ymax = std::max(r.ymax, v.y);
    }
    return r;
}

bool ConvexPolygon::contains(Vec2 p, double tol) const {
    const auto n = vertices.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; ++i) {
        const Vec2 a = vertices[i];
        const Vec2 b = vertices[(i + 1) % n];
        if (cross(b - a, p - a) < -tol) return false;
    }
    return true;
}

bool ConvexPolygon::is_valid() const {
    const auto n = vertices.size();
    if (n < 3) return false;
    if (area() <= 0.0) return false;
    for (size_t i = 0; i < n; ++i) {
        const Vec2 a = vertices[i];
        const Vec2 b = vertices[(i + 1) % n];
        const Vec2 c = vertices[(i + 2) % n];
        if (cross(b - a, c - b) < 0.0) return false;
    }
    return true;
}

ConvexPolygon make_square(Vec2 center, double side) {
    if (side <= 0.0) throw std::invalid_argument("square side must be positive");
    const double h = side / 2.0;
    return ConvexPolygon{{{center.x - h, center.y - h},
                          {center.x + h, center.y - h},
                          {center.x + h, center.y + h},
                          {center.x - h, center.y + h}}};
}

std::string BeamLayout::describe() const {
    std::ostringstream os;
    os << "proj" << n_projections << "x" << beams_per_projection << "_s" << beam_spacing << "_D"
       << beam_length;
    return os.str();
}

BeamLayout build_beam_layout(int n_projections, int beams_per_projection, double spacing, double D) {
    if (n_projections < 1 || beams_per_projection < 1) {
        throw std::invalid_argument("layout needs at least one projection and one beam");
    }
    if (spacing <= 0.0 || D <= 0.0) {
        throw std::invalid_argument("beam spacing and emitter-detector distance must be positive");
    }
    if ((beams_per_projection - 1) * spacing >= D) {
        throw std::invalid_argument("beam fan wider than the emitter-detector distance");
    }

    BeamLayout layout;
    layout.n_projections = n_projections;
    layout.beams_per_projection = beams_per_projection;
    layout.beam_spacing = spacing;
    layout.beam_length = D;

    int id = 0;
    for (int p = 0; p < n_projections; ++p) {
        const double angle_deg = p * 180.0 / n_projections;
        layout.projection_angles_deg.push_back(angle_deg);
        const double theta = angle_deg * std::numbers::pi / 180.0;
        const Vec2 u{std::cos(theta), std::sin(theta)};   // along the beam
        const Vec2 w{-std::sin(theta), std::cos(theta)};  // across the fan
        for (int k = 0; k < beams_per_projection; ++k) {
            const double offset = (k - (beams_per_projection - 1) / 2.0) * spacing;
            const Vec2 mid = offset * w;
            layout.beams.push_back(Beam{id++, mid - (D / 2.0) * u, mid + (D / 2.0) * u});
        }
    }
    return layout;
}

namespace {

// Keeps the part of poly with n·p ≤ c (Sutherland-Hodgman step).
ConvexPolygon clip_halfplane(const ConvexPolygon& poly, Vec2 n, double c) {
    ConvexPolygon out;
    const auto& vs = poly.vertices;
    const auto m = vs.size();
    for (size_t i = 0; i < m; ++i) {
        const Vec2 a = vs[i];
        const Vec2 b = vs[(i + 1) % m];
        const double fa = dot(n, a) - c;
        const double fb = dot(n, b) - c;
        if (fa <= 0.0) out.vertices.push_back(a);
        if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
            const double t = fa / (fa - fb);
            out.vertices.push_back(a + t * (b - a));
        }
    }
    return out;
}

void drop_degenerate_vertices(ConvexPolygon& poly, double tol) {
    auto& vs = poly.vertices;
    // duplicate points
    std::vector<Vec2> kept;
    for (const Vec2& v : vs) {
        if (kept.empty() || norm(v - kept.back()) > tol) kept.push_back(v);
    }
    while (kept.size() > 1 && norm(kept.front() - kept.back()) <= tol) kept.pop_back();
    // collinear points
    std::vector<Vec2> out;
    const auto n = kept.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2 prev = kept[(i + n - 1) % n];
        const Vec2 cur = kept[i];
        const Vec2 next = kept[(i + 1) % n];
        if (std::abs(cross(cur - prev, next - cur)) > tol * (norm(cur - prev) + norm(next - cur))) {
            out.push_back(cur);
        }
    }
    poly.vertices = std::move(out);
}

}  // namespace

ConvexPolygon ros_polygon(const BeamLayout& layout) {
    if (layout.n_projections < 2) {
        throw std::invalid_argument("a bounded sensing region needs at least two projections");
    }
    const double D = layout.beam_length;
    ConvexPolygon poly = make_square({0.0, 0.0}, 4.0 * D);
    for (double angle_deg : layout.projection_angles_deg) {
        const double theta = angle_deg * std::numbers::pi / 180.0;
        const Vec2 u{std::cos(theta), std::sin(theta)};
        poly = clip_halfplane(poly, u, D / 2.0);
        poly = clip_halfplane(poly, {-u.x, -u.y}, D / 2.0);
    }
    drop_degenerate_vertices(poly, 1e-12 * D);
    if (!poly.is_valid()) throw std::runtime_error("sensing region degenerated during clipping");
    return poly;
}

double segment_rect_chord(Vec2 a, Vec2 b, const Rect& rect) {
    if (rect.width() <= 0.0 || rect.height() <= 0.0) {
        throw std::invalid_argument("rectangle must have positive width and height");
    }
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    double t0 = 0.0, t1 = 1.0;
    // Liang-Barsky: constraint p·t ≤ q per slab face.
    auto clip = [&](double p, double q) -> bool {
        if (p == 0.0) return q >= 0.0;
        const double t = q / p;
        if (p < 0.0) {
            if (t > t1) return false;
            if (t > t0) t0 = t;
        } else {
            if (t < t0) return false;
            if (t < t1) t1 = t;
        }
        return true;
    };
    if (!clip(-dx, a.x - rect.xmin)) return 0.0;
    if (!clip(dx, rect.xmax - a.x)) return 0.0;
    if (!clip(-dy, a.y - rect.ymin)) return 0.0;
    if (!clip(dy, rect.ymax - a.y)) return 0.0;
    if (t1 <= t0) return 0.0;
    return (t1 - t0) * std::hypot(dx, dy);
}

double segment_polygon_chord(Vec2 a, Vec2 b, const ConvexPolygon& poly) {
    const auto& vs = poly.vertices;
    const auto n = vs.size();
    if (n < 3) return 0.0;
    const Vec2 d = b - a;
    double t0 = 0.0, t1 = 1.0;
    for (size_t i = 0; i < n; ++i) {
        const Vec2 v0 = vs[i];
        const Vec2 v1 = vs[(i + 1) % n];
        const Vec2 e = v1 - v0;
        // interior satisfies cross(e, p - v0) ≥ 0
        const double num = cross(e, a - v0);
        const double den = cross(e, d);
        if (den == 0.0) {
            if (num < 0.0) return 0.0;
        } else {
            const double t = -num / den;
            if (den > 0.0) {
                if (t > t0) t0 = t;
            } else {
                if (t < t1) t1 = t;
            }
            if (t0 > t1) return 0.0;
        }
    }
    if (t1 <= t0) return 0.0;
    return (t1 - t0) * norm(d);
}

}  // namespace cst

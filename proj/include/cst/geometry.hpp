#ifndef CST_GEOMETRY_HPP
#define CST_GEOMETRY_HPP

#include <cmath>
#include <string>
#include <vector>

namespace cst {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Vec2&) const = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

/// Axis-aligned rectangle, closed on all sides.
struct Rect {
    double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;

    bool operator==(const Rect&) const = default;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }
    Vec2 center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
    bool contains(Vec2 p, double tol = 0.0) const {
        return p.x >= xmin - tol && p.x <= xmax + tol && p.y >= ymin - tol && p.y <= ymax + tol;
    }
};

/// Counterclockwise convex polygon.
struct ConvexPolygon {
    std::vector<Vec2> vertices;

    double area() const;
    Vec2 centroid() const;
    Rect bounding_box() const;
    /// Closed containment test: points on the boundary count as inside.
    bool contains(Vec2 p, double tol = 1e-9) const;
    /// Convex, counterclockwise, area > 0.
    bool is_valid() const;
};

ConvexPolygon make_square(Vec2 center, double side);

/// One finite laser segment from emitter to detector.
struct Beam {
    int id = 0;
    Vec2 start;
    Vec2 end;

    double length() const { return norm(end - start); }
};

struct BeamLayout {
    std::vector<Beam> beams;
    int n_projections = 0;
    int beams_per_projection = 0;
    std::vector<double> projection_angles_deg;
    double beam_spacing = 0.0;
    double beam_length = 0.0;  // emitter-to-detector distance D

    int size() const { return static_cast<int>(beams.size()); }
    std::string describe() const;
};

/// Parallel-beam layout: n_projections equiangular projections covering 180 degrees,
/// beams_per_projection equispaced parallel beams per projection, the fan symmetric
/// about the origin. Every beam is a segment of length D centred on its offset point.
/// Throws std::invalid_argument on non-positive dimensions or a fan wider than D.
BeamLayout build_beam_layout(int n_projections, int beams_per_projection, double spacing, double D);

/// Region of sensing: intersection of the per-projection slabs of width D,
/// each centred on the origin and oriented along its projection angle.
/// Needs at least two distinct projection directions to be bounded.
ConvexPolygon ros_polygon(const BeamLayout& layout);

/// Exact length of segment ∩ closed rectangle, by parametric slab clipping.
/// Corner grazing yields 0; a run along an edge yields the overlap length.
/// Throws std::invalid_argument if the rectangle has non-positive extent.
double segment_rect_chord(Vec2 a, Vec2 b, const Rect& rect);

/// Exact length of segment ∩ convex polygon, by half-plane clipping.
double segment_polygon_chord(Vec2 a, Vec2 b, const ConvexPolygon& poly);

}  // namespace cst

#endif

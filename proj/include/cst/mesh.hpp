#ifndef CST_MESH_HPP
#define CST_MESH_HPP

#include <map>
#include <string>
#include <vector>

#include "cst/geometry.hpp"

namespace cst {

enum class Region { InRoI, OutRoI };
enum class MeshScheme { Uniform, Hybrid };

struct Pixel {
    int id = 0;
    Rect rect;
    Region region = Region::OutRoI;

    double area() const { return rect.area(); }
};

/// Pixelation of the sensing region. RoI pixels come first so the sensing
/// matrix decomposes into its [A_in | A_out] blocks by column index.
struct Mesh {
    std::vector<Pixel> pixels;
    int n_in = 0;
    int n_out = 0;
    Rect roi_rect;
    MeshScheme scheme = MeshScheme::Uniform;
    std::string name;

    int size() const { return static_cast<int>(pixels.size()); }
};

struct AdjEdge {
    int a = 0;  // a < b
    int b = 0;
    double shared_edge_length = 0.0;
    double centroid_distance = 0.0;
};

struct AdjacencyGraph {
    std::vector<AdjEdge> edges;
};

struct MeshReport {
    int n_total = 0;
    int n_in = 0;
    int n_out = 0;
    std::map<double, int> pixel_size_histogram;  // pixel width -> count
    double covered_area = 0.0;
};

/// Uniform grid of pixel_size squares over the bounding square of the sensing
/// region, symmetric about its centroid. A pixel is kept iff its centre lies
/// inside the polygon (closed test) and tagged InRoI iff its centre lies
/// inside roi_rect. When the bounding square is an exact multiple of
/// pixel_size the grid tiles it exactly; otherwise cell edges are anchored to
/// the centroid and the grid overhangs evenly on both sides.
Mesh build_uniform_mesh(const ConvexPolygon& ros, double pixel_size, const Rect& roi_rect);

/// Two-level mesh: coarse grid of h_out squares, with every coarse cell inside
/// refine_rect subdivided into r×r pixels of size h_in (r = h_out/h_in, an
/// integer ≥ 2). Fine pixels are InRoI; remaining coarse cells follow the
/// centre-inside keep rule and are OutRoI. refine_rect must sit on coarse grid
/// lines.
Mesh build_hybrid_mesh(const ConvexPolygon& ros, double h_out, double h_in, const Rect& refine_rect);

/// One edge per pair of pixels sharing a boundary segment of positive length.
AdjacencyGraph adjacency(const Mesh& mesh);

MeshReport mesh_report(const Mesh& mesh);

/// Uniform grid over [center - side/2, center + side/2]: exact tiling when
/// side/h is integral (1e-9 tolerance), else an even cell count anchored so
/// cell edges land on the centre.
struct GridAxis {
    double h = 0.0;
    int n = 0;
    double x0 = 0.0;  // low edge of cell 0

    double edge(int i) const { return x0 + i * h; }
    double center(int i) const { return x0 + (i + 0.5) * h; }
};

GridAxis grid_axis(double center, double side, double h);

}  // namespace cst

#endif

#ifndef CST_PHANTOM_HPP
#define CST_PHANTOM_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "cst/geometry.hpp"
#include "cst/mesh.hpp"

namespace cst {

enum class PlumeKind { Gaussian, SmoothedDisc };

/// Analytic plume: Gaussian uses radius_or_sigma as its sigma; SmoothedDisc
/// holds the peak inside the radius and cosine-tapers to zero over a band of
/// the same width outside it.
struct PlumeSpec {
    PlumeKind kind = PlumeKind::Gaussian;
    Vec2 center;
    double radius_or_sigma = 1.0;
    double peak = 0.0;  // mole fraction above background at the plume core

    bool operator==(const PlumeSpec&) const = default;
};

/// High-resolution ground-truth raster of mole fraction over the bounding
/// square of the sensing region. Thermodynamic state is uniform.
struct Field {
    int nx = 0;
    int ny = 0;
    double cell_size = 0.0;
    Vec2 origin;  // lower-left corner of cell (0,0)
    std::vector<double> values;  // row-major, index j*nx + i

    double background = 0.0;
    double temperature_k = 0.0;
    double pressure_atm = 0.0;
    double linestrength = 0.0;  // S(T), cm^-2 atm^-1

    double value_at(int i, int j) const { return values[static_cast<size_t>(j) * nx + i]; }
    Vec2 cell_center(int i, int j) const {
        return {origin.x + (i + 0.5) * cell_size, origin.y + (j + 0.5) * cell_size};
    }
    Rect cell_rect(int i, int j) const {
        return {origin.x + i * cell_size, origin.y + j * cell_size,
                origin.x + (i + 1) * cell_size, origin.y + (j + 1) * cell_size};
    }
};

/// Per-beam integrated absorbances, optionally noisy.
struct Measurement {
    std::vector<double> b;
    std::optional<double> snr_db;
    std::optional<uint64_t> seed;

    int size() const { return static_cast<int>(b.size()); }
};

Field build_field(const ConvexPolygon& ros, double cell_size, double background,
                  const std::vector<PlumeSpec>& plumes, double temperature_k, double pressure_atm,
                  double linestrength);

/// k = P * x * S per cell.
std::vector<double> absorption_density(const Field& field);

/// Noise-free forward problem on the fine raster: b_i sums chord × k over all cells.
Measurement forward_project(const Field& field, const BeamLayout& layout);

/// Per-beam Gaussian noise with sigma_i = b_i / 10^(snr_db/20). The input must
/// be noise-free; negative noisy values are kept.
Measurement add_noise(const Measurement& m, double snr_db, uint64_t seed);

/// Mean of the fine-cell values whose centres fall inside each mesh pixel.
/// Throws if some pixel captures no cell centre.
std::vector<double> downsample_truth(const Field& field, const Mesh& mesh);

/// The full raster as a mesh (every cell a pixel, all InRoI), for checking the
/// projection against a sensing matrix assembled at field resolution.
Mesh raster_mesh(const Field& field);

/// Count of cells whose centre lies inside the polygon.
int cells_inside(const Field& field, const ConvexPolygon& poly);

}  // namespace cst

#endif

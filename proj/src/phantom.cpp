#include "cst/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace cst {

namespace {

double plume_contribution(const PlumeSpec& p, const Vec2& q) {
    const double d = norm(q - p.center);
    switch (p.kind) {
        case PlumeKind::Gaussian: {
            const double s = p.radius_or_sigma;
            return p.peak * std::exp(-0.5 * (d / s) * (d / s));
        }
        case PlumeKind::SmoothedDisc: {
            const double r = p.radius_or_sigma;
            if (d <= r) return p.peak;
            if (d >= 2.0 * r) return 0.0;
            // Cosine taper from peak at r to zero at 2r.
            const double t = (d - r) / r;
            return p.peak * 0.5 * (1.0 + std::cos(t * 3.14159265358979323846));
        }
    }
    return 0.0;
}

}  // namespace

Field build_field(const ConvexPolygon& ros, double cell_size, double background,
                  const std::vector<PlumeSpec>& plumes, double temperature_k, double pressure_atm,
                  double linestrength) {
    if (cell_size <= 0.0) throw std::invalid_argument("field cell size must be positive");
    if (background < 0.0) throw std::invalid_argument("background mole fraction must be >= 0");
    if (temperature_k <= 0.0 || pressure_atm <= 0.0 || linestrength <= 0.0)
        throw std::invalid_argument("thermodynamic state must be positive");
    for (const auto& p : plumes) {
        if (p.radius_or_sigma <= 0.0) throw std::invalid_argument("plume radius/sigma must be positive");
        if (p.peak < 0.0) throw std::invalid_argument("plume peak must be >= 0");
    }

    const Rect bb = ros.bounding_box();
    const Vec2 center{0.5 * (bb.xmin + bb.xmax), 0.5 * (bb.ymin + bb.ymax)};
    const double side = std::max(bb.xmax - bb.xmin, bb.ymax - bb.ymin);

    const GridAxis ax = grid_axis(center.x, side, cell_size);
    const GridAxis ay = grid_axis(center.y, side, cell_size);

    Field f;
    f.nx = ax.n;
    f.ny = ay.n;
    f.cell_size = cell_size;
    f.origin = {ax.x0, ay.x0};
    f.background = background;
    f.temperature_k = temperature_k;
    f.pressure_atm = pressure_atm;
    f.linestrength = linestrength;
    f.values.assign(static_cast<size_t>(f.nx) * f.ny, 0.0);

    for (int j = 0; j < f.ny; ++j) {
        for (int i = 0; i < f.nx; ++i) {
            const Vec2 q = f.cell_center(i, j);
            double x = background;
            for (const auto& p : plumes) x += plume_contribution(p, q);
            f.values[static_cast<size_t>(j) * f.nx + i] = std::clamp(x, 0.0, 1.0);
        }
    }
    return f;
}

std::vector<double> absorption_density(const Field& field) {
    std::vector<double> k(field.values.size());
    const double scale = field.pressure_atm * field.linestrength;
    for (size_t i = 0; i < k.size(); ++i) k[i] = scale * field.values[i];
    return k;
}

Measurement forward_project(const Field& field, const BeamLayout& layout) {
    const std::vector<double> k = absorption_density(field);
    Measurement m;
    m.b.assign(layout.beams.size(), 0.0);

    for (size_t bi = 0; bi < layout.beams.size(); ++bi) {
        const Beam& beam = layout.beams[bi];
        double acc = 0.0;
        for (int j = 0; j < field.ny; ++j) {
            for (int i = 0; i < field.nx; ++i) {
                const double kij = k[static_cast<size_t>(j) * field.nx + i];
                if (kij == 0.0) continue;
                const double chord = segment_rect_chord(beam.start, beam.end, field.cell_rect(i, j));
                if (chord > 0.0) acc += chord * kij;
            }
        }
        m.b[bi] = acc;
    }
    return m;
}

Measurement add_noise(const Measurement& m, double snr_db, uint64_t seed) {
    if (m.snr_db.has_value()) throw std::invalid_argument("measurement already carries noise");
    if (!std::isfinite(snr_db)) throw std::invalid_argument("snr_db must be finite");

    Measurement out;
    out.b.resize(m.b.size());
    out.snr_db = snr_db;
    out.seed = seed;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    const double rel = std::pow(10.0, -snr_db / 20.0);
    for (size_t i = 0; i < m.b.size(); ++i) {
        const double sigma = std::abs(m.b[i]) * rel;
        out.b[i] = m.b[i] + sigma * unit(rng);
    }
    return out;
}

std::vector<double> downsample_truth(const Field& field, const Mesh& mesh) {
    std::vector<double> sums(mesh.pixels.size(), 0.0);
    std::vector<int> counts(mesh.pixels.size(), 0);

    for (int j = 0; j < field.ny; ++j) {
        for (int i = 0; i < field.nx; ++i) {
            const Vec2 q = field.cell_center(i, j);
            for (size_t p = 0; p < mesh.pixels.size(); ++p) {
                const Rect& r = mesh.pixels[p].rect;
                // Half-open membership so shared pixel edges claim a centre once.
                if (q.x >= r.xmin && q.x < r.xmax && q.y >= r.ymin && q.y < r.ymax) {
                    sums[p] += field.value_at(i, j);
                    counts[p] += 1;
                    break;
                }
            }
        }
    }

    std::vector<double> out(mesh.pixels.size());
    for (size_t p = 0; p < out.size(); ++p) {
        if (counts[p] == 0)
            throw std::runtime_error("pixel " + std::to_string(p) +
                                     " captures no field cell centre; refine the field raster");
        out[p] = sums[p] / counts[p];
    }
    return out;
}

Mesh raster_mesh(const Field& field) {
    Mesh mesh;
    mesh.scheme = MeshScheme::Uniform;
    mesh.name = "raster_h" + std::to_string(field.cell_size);
    mesh.roi_rect = {field.origin.x, field.origin.y, field.origin.x + field.nx * field.cell_size,
                     field.origin.y + field.ny * field.cell_size};
    mesh.pixels.reserve(static_cast<size_t>(field.nx) * field.ny);
    int id = 0;
    for (int j = 0; j < field.ny; ++j)
        for (int i = 0; i < field.nx; ++i)
            mesh.pixels.push_back({id++, field.cell_rect(i, j), Region::InRoI});
    mesh.n_in = static_cast<int>(mesh.pixels.size());
    mesh.n_out = 0;
    return mesh;
}

int cells_inside(const Field& field, const ConvexPolygon& poly) {
    int n = 0;
    for (int j = 0; j < field.ny; ++j)
        for (int i = 0; i < field.nx; ++i)
            if (poly.contains(field.cell_center(i, j))) ++n;
    return n;
}

}  // namespace cst

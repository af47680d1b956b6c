#ifndef CST_CONFIG_HPP
#define CST_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cst/experiment.hpp"
#include "cst/geometry.hpp"
#include "cst/mesh.hpp"
#include "cst/phantom.hpp"

namespace cst {

/// Raised for malformed or inconsistent configuration; the CLI maps it to a
/// distinct exit code from runtime failures.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LayoutConfig {
    int n_projections = 4;
    int beams_per_projection = 8;
    double beam_spacing = 1.0;
    double distance = 10.0;
    // > 0: the RoS is a centred square of this side (the small demonstration
    // geometry); 0: derive the RoS polygon from the projection directions.
    double ros_side = 0.0;

    bool operator==(const LayoutConfig&) const = default;
};

struct MeshConfig {
    std::string name;
    MeshScheme scheme = MeshScheme::Uniform;
    double pixel_size = 1.0;  // uniform pixel edge, or the coarse edge of a hybrid mesh
    double fine_size = 0.0;   // hybrid only: fine pixel edge inside the refined block
    Rect roi_rect;            // uniform: RoI tagging rectangle; hybrid: refined block

    bool operator==(const MeshConfig&) const = default;
};

struct FrameConfig {
    std::vector<PlumeSpec> plumes;

    bool operator==(const FrameConfig&) const = default;
};

struct PhantomConfig {
    std::string name;
    double cell_size = 0.1;
    double background = 0.005;
    double temperature_k = 294.15;
    double pressure_atm = 1.0;
    double linestrength = 1.0;
    std::vector<FrameConfig> frames;

    bool operator==(const PhantomConfig&) const = default;
};

struct ExperimentConfig {
    LayoutConfig layout;
    std::vector<MeshConfig> meshes;
    std::vector<PhantomConfig> phantoms;
    std::vector<PerSolverConfig> solvers;
    std::vector<double> snr_list{40.0};
    double sweep_snr_db = 40.0;
    int n_reps = 20;
    uint64_t base_seed = 1;
    std::string output_dir = "out";

    bool operator==(const ExperimentConfig&) const = default;
};

bool operator==(const PerSolverConfig& a, const PerSolverConfig& b);
bool operator==(const SolverOptions& a, const SolverOptions& b);

ExperimentConfig parse_config(const std::string& json_text);
std::string serialize_config(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

/// FNV-1a over the serialized form; stamped into every output file.
uint64_t config_hash(const ExperimentConfig& config);
std::string config_hash_hex(const ExperimentConfig& config);

const MeshConfig& find_mesh(const ExperimentConfig& config, const std::string& name);
const PhantomConfig& find_phantom(const ExperimentConfig& config, const std::string& name);

BeamLayout layout_from_config(const LayoutConfig& layout);
ConvexPolygon ros_from_config(const LayoutConfig& layout);
Mesh mesh_from_config(const MeshConfig& mesh, const ConvexPolygon& ros);
std::vector<Field> fields_from_config(const PhantomConfig& phantom, const ConvexPolygon& ros);

std::string scheme_name(MeshScheme scheme);

}  // namespace cst

#endif

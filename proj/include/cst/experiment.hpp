#ifndef CST_EXPERIMENT_HPP
#define CST_EXPERIMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cst/phantom.hpp"
#include "cst/sensing.hpp"
#include "cst/solvers.hpp"

namespace cst {

/// Mean over the mask of |x_rec - x_true| / x_true. Rejects an empty mask and
/// non-positive truth values inside the mask.
double image_error(const std::vector<double>& x_rec, const std::vector<double>& x_true,
                   const std::vector<int>& mask);

struct ImageErrorReport {
    double ie_roi = 0.0;
    double ie_ros = 0.0;
    std::vector<double> per_pixel_relerr;
};

/// RoI mask = pixel ids [0, n_in); RoS mask = every pixel.
ImageErrorReport image_error_report(const std::vector<double>& x_rec,
                                    const std::vector<double>& x_true, int n_in);

std::vector<int> roi_mask(const Mesh& mesh);
std::vector<int> ros_mask(const Mesh& mesh);

/// Log-equispaced grid from lo to hi inclusive; both endpoints exact.
std::vector<double> log_grid(double lo, double hi, int n);

/// One phantom frame prepared for a given mesh: truth on the mesh pixels and
/// the noise-free fine-raster projection.
struct FramePhantom {
    Field field;
    std::vector<double> x_true;
    Eigen::VectorXd b_clean;
};

FramePhantom make_frame(const Field& field, const Mesh& mesh, const BeamLayout& layout);

/// Everything a sweep needs for one meshing scheme, assembled once.
struct SchemeSetup {
    std::string name;
    Mesh mesh;
    SensingMatrix matrix;
    AdjacencyGraph adj;
    DifferenceOperator F;
    std::vector<FramePhantom> frames;
};

SchemeSetup make_scheme_setup(std::string name, Mesh mesh, const BeamLayout& layout,
                              const std::vector<Field>& fields);

struct PerSolverConfig {
    SolverKind kind = SolverKind::TK;
    double grid_lo = 1e-6;
    double grid_hi = 10.0;
    int grid_steps = 36;
    SolverOptions opts;
};

struct SweepCellFailure {
    int grid_index = 0;
    int frame = 0;
    int rep = 0;
    std::string message;
};

struct SweepResult {
    std::vector<double> grid;
    std::vector<double> mean_ie;      // RoS-mask mean per grid value; NaN if any cell failed
    std::vector<double> std_ie;       // sample standard deviation over cells
    std::vector<double> mean_ie_roi;  // RoI-mask companion
    Eigen::MatrixXd per_rep_ie;       // RoS-mask IE, grid values x (frame*n_reps + rep)
    int optimal_index = -1;
    double optimal_value = 0.0;
    double optimal_ie = 0.0;
    std::vector<SweepCellFailure> failures;
};

/// For every grid value, reconstruct all frames with n_reps noise seeds
/// (seed = base_seed + rep, shared across grid values so comparisons are
/// paired) and select the argmin of the RoS-mask mean IE. Solver failures are
/// recorded per cell and poison that grid value's mean instead of aborting.
SweepResult regularization_sweep(const SchemeSetup& scheme, const PerSolverConfig& solver,
                                 double snr_db, int n_reps, uint64_t base_seed, int n_jobs);

struct ComparisonCell {
    std::string scheme;
    MeshScheme mesh_scheme = MeshScheme::Uniform;
    SolverKind solver = SolverKind::TK;
    double snr_db = 0.0;
    double reg_value = 0.0;  // the swept optimum in use
    double mean_ie_roi = 0.0;
    double std_ie_roi = 0.0;
    double mean_ie_ros = 0.0;
    double std_ie_ros = 0.0;
    int n_cells = 0;
    int n_failures = 0;
};

struct Improvement {
    SolverKind solver = SolverKind::TK;
    double snr_db = 0.0;
    double roi_pct = 0.0;  // (IE_uniform - IE_hybrid) / IE_uniform * 100
    double ros_pct = 0.0;
};

struct SweepRecord {
    std::string scheme;
    SolverKind solver = SolverKind::TK;
    SweepResult sweep;
};

struct ComparisonReport {
    std::vector<SweepRecord> sweeps;
    std::vector<ComparisonCell> cells;
    std::vector<Improvement> improvements;
};

struct ComparisonSpec {
    std::vector<PerSolverConfig> solvers;
    std::vector<double> snr_list{40.0};
    double sweep_snr_db = 40.0;
    int n_reps = 20;
    uint64_t base_seed = 1;
    int n_jobs = 0;  // 0 -> hardware concurrency
};

/// Sweeps every (scheme, solver) pair at sweep_snr_db, then evaluates each at
/// its optimum for every SNR in snr_list. Improvements pair each uniform-mesh
/// cell with the hybrid-mesh cell of the same solver and SNR.
ComparisonReport run_comparison(const std::vector<SchemeSetup>& schemes,
                                const ComparisonSpec& spec);

const char* solver_name(SolverKind kind);

}  // namespace cst

#endif

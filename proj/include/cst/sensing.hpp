#ifndef CST_SENSING_HPP
#define CST_SENSING_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cst/geometry.hpp"
#include "cst/mesh.hpp"

namespace cst {

/// Dense chord-length matrix mapping per-pixel absorption densities to
/// per-beam integrated absorbances. Columns [0, n_in) are the RoI block.
struct SensingMatrix {
    Eigen::MatrixXd entries;  // M x N, chord lengths in cm
    int n_in = 0;
    std::string layout_id;
    std::string mesh_id;

    int rows() const { return static_cast<int>(entries.rows()); }
    int cols() const { return static_cast<int>(entries.cols()); }
};

struct MatrixStats {
    long long nnz_count = 0;
    double nnz_fraction = 0.0;
    int n_in = 0;
    int n_out = 0;
    std::vector<int> rows_all_zero;
    std::vector<int> cols_all_zero;
};

struct SvdSpectrum {
    std::vector<double> singular_values;  // descending, length N
    std::string extension_note;
};

/// A[i][j] = chord of beam i inside pixel j; column order follows the mesh.
SensingMatrix assemble_sensing_matrix(const BeamLayout& layout, const Mesh& mesh);

MatrixStats matrix_stats(const SensingMatrix& A);

/// Singular values of A, descending, padded with exact zeros to length N.
/// With extend set, the last row holding any non-zero entry is duplicated
/// until the matrix is square N×N before decomposing (requires M <= N).
SvdSpectrum svd_spectrum(const SensingMatrix& A, bool extend);

/// N minus the count of singular values above 1e-10 * sigma_1.
int nullspace_dimension(const SensingMatrix& A);

}  // namespace cst

#endif

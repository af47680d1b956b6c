#include "cst/sensing.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace cst {

SensingMatrix assemble_sensing_matrix(const BeamLayout& layout, const Mesh& mesh) {
    const int m = layout.size();
    const int n = mesh.size();
    if (m == 0 || n == 0) throw std::invalid_argument("empty layout or mesh");

    SensingMatrix A;
    A.entries.resize(m, n);
    for (int i = 0; i < m; ++i) {
        const Beam& beam = layout.beams[i];
        for (int j = 0; j < n; ++j) {
            A.entries(i, j) = segment_rect_chord(beam.start, beam.end, mesh.pixels[j].rect);
        }
    }
    A.n_in = mesh.n_in;
    A.layout_id = layout.describe();
    A.mesh_id = mesh.name;
    return A;
}

MatrixStats matrix_stats(const SensingMatrix& A) {
    MatrixStats s;
    s.n_in = A.n_in;
    s.n_out = A.cols() - A.n_in;
    for (int i = 0; i < A.rows(); ++i) {
        for (int j = 0; j < A.cols(); ++j) {
            if (A.entries(i, j) > 0.0) ++s.nnz_count;
        }
    }
    const long long total = static_cast<long long>(A.rows()) * A.cols();
    s.nnz_fraction = total > 0 ? static_cast<double>(s.nnz_count) / total : 0.0;
    for (int i = 0; i < A.rows(); ++i) {
        if (A.entries.row(i).isZero(0.0)) s.rows_all_zero.push_back(i);
    }
    for (int j = 0; j < A.cols(); ++j) {
        if (A.entries.col(j).isZero(0.0)) s.cols_all_zero.push_back(j);
    }
    return s;
}

SvdSpectrum svd_spectrum(const SensingMatrix& A, bool extend) {
    const int m = A.rows();
    const int n = A.cols();
    if (m == 0 || n == 0) throw std::invalid_argument("cannot decompose an empty matrix");

    SvdSpectrum spec;
    Eigen::MatrixXd work;
    if (extend) {
        if (m > n) throw std::invalid_argument("row-duplication extension requires M <= N");
        int last = -1;
        for (int i = m - 1; i >= 0; --i) {
            if (!A.entries.row(i).isZero(0.0)) {
                last = i;
                break;
            }
        }
        if (last < 0) throw std::invalid_argument("all-zero matrix has no nontrivial row to duplicate");
        work.resize(n, n);
        work.topRows(m) = A.entries;
        for (int i = m; i < n; ++i) work.row(i) = A.entries.row(last);
        std::ostringstream note;
        note << "rows " << m << ".." << n - 1 << " duplicate row " << last
             << " (last row with a non-zero entry)";
        spec.extension_note = note.str();
    } else {
        work = A.entries;
        spec.extension_note = "none";
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(work);
    const auto& sv = svd.singularValues();
    spec.singular_values.assign(sv.data(), sv.data() + sv.size());
    std::sort(spec.singular_values.begin(), spec.singular_values.end(), std::greater<double>());
    spec.singular_values.resize(n, 0.0);
    // Values beyond the numerical rank are undetermined by the data; report them
    // as exact zeros rather than floating-point noise.
    if (!spec.singular_values.empty() && spec.singular_values.front() > 0.0) {
        const double tol = 1e-10 * spec.singular_values.front();
        for (double& s : spec.singular_values) {
            if (s <= tol) s = 0.0;
        }
    }
    return spec;
}

int nullspace_dimension(const SensingMatrix& A) {
    const SvdSpectrum spec = svd_spectrum(A, false);
    if (spec.singular_values.empty()) return 0;
    const double tol = 1e-10 * spec.singular_values.front();
    int rank = 0;
    for (double s : spec.singular_values) {
        if (s > tol) ++rank;
    }
    return A.cols() - rank;
}

}  // namespace cst

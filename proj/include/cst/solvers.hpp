#ifndef CST_SOLVERS_HPP
#define CST_SOLVERS_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "cst/mesh.hpp"

namespace cst {

enum class SolverKind { TK, ART, TV };

/// First-difference operator on the pixel adjacency graph: one row per edge,
/// +1 at the lower pixel id, -1 at the higher. Annihilates constant vectors.
struct DifferenceOperator {
    Eigen::SparseMatrix<double> matrix;  // edges x n_pixels

    int rows() const { return static_cast<int>(matrix.rows()); }
    int cols() const { return static_cast<int>(matrix.cols()); }
};

struct SolverOptions {
    int max_iterations = 2000;
    double relative_tolerance = 1e-9;
    bool nonneg = true;
};

struct ReconResult {
    Eigen::VectorXd k;  // per-pixel absorption density, >= 0 when nonneg
    Eigen::VectorXd x;  // mole fractions; filled by the caller once P and S are known
    SolverKind solver = SolverKind::TK;
    double hyperparameter = 0.0;  // gamma (TK), lambda (ART) or beta (TV)
    int iterations = 0;
    double relative_tolerance = 0.0;
    bool converged = false;
    double residual_norm = 0.0;  // ||A k - b||
    double objective = 0.0;      // final objective value (diagnostic)
};

DifferenceOperator difference_operator(const AdjacencyGraph& adj, int n);

/// Smoothness-penalized least squares: 0.5*||A k - b||^2 + 0.5*gamma*||F k||^2.
double tk_objective(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                    const DifferenceOperator& F, double gamma, const Eigen::VectorXd& k);
Eigen::VectorXd tk_gradient(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            const DifferenceOperator& F, double gamma, const Eigen::VectorXd& k);

/// Edge-wise smoothed total variation: 0.5*||A k - b||^2 + beta * sum over
/// edges of sqrt((k_a - k_b)^2 + eps^2).
double tv_objective(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                    const std::vector<std::pair<int, int>>& edges, double beta, double eps,
                    const Eigen::VectorXd& k);
Eigen::VectorXd tv_gradient(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            const std::vector<std::pair<int, int>>& edges, double beta, double eps,
                            const Eigen::VectorXd& k);

/// Largest-eigenvalue estimate of A^T A + gamma F^T F by power iteration from
/// a normalized all-ones start.
double power_iteration_lambda_max(const Eigen::MatrixXd& A, const DifferenceOperator& F,
                                  double gamma, int iterations = 50);

/// Best constant field c*ones with c = argmin ||c * A*1 - b|| clamped to >= 0;
/// the start point for the gradient solvers.
Eigen::VectorXd mean_field_start(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

/// Projected gradient descent with the fixed step 1/lambda_max. Stops when the
/// relative objective decrease drops below opts.relative_tolerance.
ReconResult solve_tk(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                     const DifferenceOperator& F, double gamma, const SolverOptions& opts = {});

/// Relaxed Kaczmarz row-action sweeps from k = 0 in beam index order; zero rows
/// are skipped and k is clipped to >= 0 after each sweep when opts.nonneg.
/// Stops when the relative per-sweep update norm drops below the tolerance.
ReconResult solve_art(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double lambda,
                      const SolverOptions& opts = {200, 1e-6, true});

/// Projected gradient with Armijo backtracking (halving, constant 1e-4) on the
/// smoothed-TV objective; eps = 1e-8 * max(1, ||b||_inf). Same stopping rule
/// as solve_tk.
ReconResult solve_tv(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                     const AdjacencyGraph& adj, double beta, const SolverOptions& opts = {});

/// x_j = k_j / (P * S); the uniform temperature is validated and recorded by
/// the caller alongside the result.
std::vector<double> concentration_from_k(const std::vector<double>& k, double pressure_atm,
                                         double linestrength, double temperature_k);

}  // namespace cst

#endif

#include "cst/solvers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cst {

namespace {

void check_system(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    if (A.rows() != b.size())
        throw std::invalid_argument("matrix has " + std::to_string(A.rows()) +
                                    " rows but measurement has " + std::to_string(b.size()));
    if (A.rows() == 0 || A.cols() == 0) throw std::invalid_argument("empty system");
}

void check_options(const SolverOptions& opts) {
    if (opts.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (!(opts.relative_tolerance > 0.0))
        throw std::invalid_argument("relative_tolerance must be positive");
}

std::vector<std::pair<int, int>> edge_pairs(const AdjacencyGraph& adj) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(adj.edges.size());
    for (const auto& e : adj.edges) pairs.emplace_back(e.a, e.b);
    return pairs;
}

Eigen::VectorXd project_nonneg(Eigen::VectorXd v, bool nonneg) {
    if (nonneg) v = v.cwiseMax(0.0);
    return v;
}

}  // namespace

DifferenceOperator difference_operator(const AdjacencyGraph& adj, int n) {
    if (n < 1) throw std::invalid_argument("difference operator needs at least one pixel");
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * adj.edges.size());
    for (size_t r = 0; r < adj.edges.size(); ++r) {
        const AdjEdge& e = adj.edges[r];
        if (e.a < 0 || e.b < 0 || e.a >= n || e.b >= n)
            throw std::invalid_argument("adjacency edge (" + std::to_string(e.a) + ", " +
                                        std::to_string(e.b) + ") is out of range for " +
                                        std::to_string(n) + " pixels");
        trip.emplace_back(static_cast<int>(r), e.a, 1.0);
        trip.emplace_back(static_cast<int>(r), e.b, -1.0);
    }
    DifferenceOperator F;
    F.matrix.resize(static_cast<int>(adj.edges.size()), n);
    F.matrix.setFromTriplets(trip.begin(), trip.end());
    return F;
}

double tk_objective(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                    const DifferenceOperator& F, double gamma, const Eigen::VectorXd& k) {
    const double data = (A * k - b).squaredNorm();
    const double smooth = (F.matrix * k).squaredNorm();
    return 0.5 * data + 0.5 * gamma * smooth;
}

Eigen::VectorXd tk_gradient(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            const DifferenceOperator& F, double gamma, const Eigen::VectorXd& k) {
    Eigen::VectorXd g = A.transpose() * (A * k - b);
    if (gamma != 0.0) g += gamma * (F.matrix.transpose() * (F.matrix * k));
    return g;
}

double tv_objective(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                    const std::vector<std::pair<int, int>>& edges, double beta, double eps,
                    const Eigen::VectorXd& k) {
    double tv = 0.0;
    for (const auto& [a, c] : edges) {
        const double d = k[a] - k[c];
        tv += std::sqrt(d * d + eps * eps);
    }
    return 0.5 * (A * k - b).squaredNorm() + beta * tv;
}

Eigen::VectorXd tv_gradient(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            const std::vector<std::pair<int, int>>& edges, double beta, double eps,
                            const Eigen::VectorXd& k) {
    Eigen::VectorXd g = A.transpose() * (A * k - b);
    for (const auto& [a, c] : edges) {
        const double d = k[a] - k[c];
        const double w = beta * d / std::sqrt(d * d + eps * eps);
        g[a] += w;
        g[c] -= w;
    }
    return g;
}

double power_iteration_lambda_max(const Eigen::MatrixXd& A, const DifferenceOperator& F,
                                  double gamma, int iterations) {
    const Eigen::Index n = A.cols();
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXd w = A.transpose() * (A * v);
        if (gamma != 0.0 && F.matrix.rows() > 0) w += gamma * (F.matrix.transpose() * (F.matrix * v));
        lambda = w.norm();
        if (lambda <= 0.0) return 0.0;  // v is in the nullspace; operator acts as zero on it
        v = w / lambda;
    }
    return lambda;
}

Eigen::VectorXd mean_field_start(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    const Eigen::VectorXd a1 = A * Eigen::VectorXd::Ones(A.cols());
    const double denom = a1.squaredNorm();
    const double c = denom > 0.0 ? std::max(0.0, a1.dot(b) / denom) : 0.0;
    return Eigen::VectorXd::Constant(A.cols(), c);
}

ReconResult solve_tk(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                     const DifferenceOperator& F, double gamma, const SolverOptions& opts) {
    check_system(A, b);
    check_options(opts);
    if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
    if (F.cols() != A.cols())
        throw std::invalid_argument("difference operator has " + std::to_string(F.cols()) +
                                    " columns but matrix has " + std::to_string(A.cols()));

    double lambda_max = power_iteration_lambda_max(A, F, gamma);
    if (lambda_max <= 0.0) lambda_max = 1.0;  // zero operator: gradient vanishes anyway
    const double step = 1.0 / lambda_max;

    ReconResult res;
    res.solver = SolverKind::TK;
    res.hyperparameter = gamma;
    res.relative_tolerance = opts.relative_tolerance;

    Eigen::VectorXd k = project_nonneg(mean_field_start(A, b), opts.nonneg);
    double f = tk_objective(A, b, F, gamma, k);
    for (int it = 0; it < opts.max_iterations; ++it) {
        const Eigen::VectorXd g = tk_gradient(A, b, F, gamma, k);
        k = project_nonneg(k - step * g, opts.nonneg);
        const double f_new = tk_objective(A, b, F, gamma, k);
        const double decrease = (f - f_new) / std::max(std::abs(f), 1e-300);
        f = f_new;
        res.iterations = it + 1;
        if (decrease < opts.relative_tolerance) {
            res.converged = true;
            break;
        }
    }
    res.k = k;
    res.objective = f;
    res.residual_norm = (A * k - b).norm();
    return res;
}

ReconResult solve_art(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double lambda,
                      const SolverOptions& opts) {
    check_system(A, b);
    check_options(opts);
    if (!(lambda > 0.0) || lambda > 2.0)
        throw std::invalid_argument("relaxation must lie in (0, 2], got " + std::to_string(lambda));

    const Eigen::Index m = A.rows();
    Eigen::VectorXd row_norm2(m);
    bool any_nonzero = false;
    for (Eigen::Index i = 0; i < m; ++i) {
        row_norm2[i] = A.row(i).squaredNorm();
        any_nonzero = any_nonzero || row_norm2[i] > 0.0;
    }
    if (!any_nonzero) throw std::invalid_argument("sensing matrix is entirely zero");

    ReconResult res;
    res.solver = SolverKind::ART;
    res.hyperparameter = lambda;
    res.relative_tolerance = opts.relative_tolerance;

    Eigen::VectorXd k = Eigen::VectorXd::Zero(A.cols());
    for (int sweep = 0; sweep < opts.max_iterations; ++sweep) {
        const Eigen::VectorXd k_prev = k;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (row_norm2[i] <= 0.0) continue;
            const double resid = b[i] - A.row(i).dot(k);
            k += (lambda * resid / row_norm2[i]) * A.row(i).transpose();
        }
        if (opts.nonneg) k = k.cwiseMax(0.0);
        res.iterations = sweep + 1;
        const double update = (k - k_prev).norm();
        if (update <= opts.relative_tolerance * std::max(k.norm(), 1e-300)) {
            res.converged = true;
            break;
        }
    }
    res.k = k;
    res.residual_norm = (A * k - b).norm();
    res.objective = 0.5 * res.residual_norm * res.residual_norm;
    return res;
}

ReconResult solve_tv(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                     const AdjacencyGraph& adj, double beta, const SolverOptions& opts) {
    check_system(A, b);
    check_options(opts);
    if (beta < 0.0) throw std::invalid_argument("beta must be >= 0");
    for (const auto& e : adj.edges)
        if (e.a < 0 || e.b < 0 || e.a >= A.cols() || e.b >= A.cols())
            throw std::invalid_argument("adjacency edge out of range for the matrix columns");

    const std::vector<std::pair<int, int>> edges = edge_pairs(adj);
    const double b_inf = b.size() > 0 ? b.cwiseAbs().maxCoeff() : 0.0;
    const double eps = 1e-8 * std::max(1.0, b_inf);

    double lambda_max = power_iteration_lambda_max(A, DifferenceOperator{}, 0.0);
    if (lambda_max <= 0.0) lambda_max = 1.0;

    ReconResult res;
    res.solver = SolverKind::TV;
    res.hyperparameter = beta;
    res.relative_tolerance = opts.relative_tolerance;

    Eigen::VectorXd k = Eigen::VectorXd::Zero(A.cols());
    double f = tv_objective(A, b, edges, beta, eps, k);
    double t = 1.0 / lambda_max;
    constexpr double kArmijo = 1e-4;
    for (int it = 0; it < opts.max_iterations; ++it) {
        const Eigen::VectorXd g = tv_gradient(A, b, edges, beta, eps, k);
        t = std::min(2.0 * t, 1e12 / lambda_max);  // warm-started trial step
        Eigen::VectorXd k_new;
        double f_new = f;
        bool accepted = false;
        for (int half = 0; half < 60; ++half) {
            k_new = project_nonneg(k - t * g, opts.nonneg);
            f_new = tv_objective(A, b, edges, beta, eps, k_new);
            const double model = g.dot(k_new - k);
            if (f_new <= f + kArmijo * model) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        res.iterations = it + 1;
        if (!accepted) {  // no descent direction left at machine precision
            res.converged = true;
            break;
        }
        const double decrease = (f - f_new) / std::max(std::abs(f), 1e-300);
        k = k_new;
        f = f_new;
        if (decrease < opts.relative_tolerance) {
            res.converged = true;
            break;
        }
    }
    res.k = k;
    res.objective = f;
    res.residual_norm = (A * k - b).norm();
    return res;
}

std::vector<double> concentration_from_k(const std::vector<double>& k, double pressure_atm,
                                         double linestrength, double temperature_k) {
    if (pressure_atm <= 0.0) throw std::invalid_argument("pressure must be positive");
    if (linestrength <= 0.0) throw std::invalid_argument("linestrength must be positive");
    if (temperature_k <= 0.0) throw std::invalid_argument("temperature must be positive");
    std::vector<double> x(k.size());
    const double inv = 1.0 / (pressure_atm * linestrength);
    for (size_t j = 0; j < k.size(); ++j) x[j] = k[j] * inv;
    return x;
}

}  // namespace cst

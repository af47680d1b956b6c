#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "cst/geometry.hpp"
#include "cst/mesh.hpp"
#include "cst/sensing.hpp"
#include "cst/solvers.hpp"

using namespace cst;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937& rng, double lo = -1.0,
                              double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::MatrixXd A(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) A(i, j) = u(rng);
    return A;
}

Eigen::VectorXd random_vector(int n, std::mt19937& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

// Central finite differences of a scalar function; exact for quadratics up to
// roundoff, second-order otherwise.
template <typename F>
Eigen::VectorXd fd_gradient(const F& f, const Eigen::VectorXd& k, double h) {
    Eigen::VectorXd g(k.size());
    Eigen::VectorXd kp = k;
    for (int i = 0; i < k.size(); ++i) {
        kp[i] = k[i] + h;
        const double fp = f(kp);
        kp[i] = k[i] - h;
        const double fm = f(kp);
        kp[i] = k[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

AdjacencyGraph chain_graph(int n) {
    AdjacencyGraph adj;
    for (int i = 0; i + 1 < n; ++i) adj.edges.push_back({i, i + 1, 1.0, 1.0});
    return adj;
}

}  // namespace

TEST_CASE("difference operator structure") {
    const ConvexPolygon square = make_square({0.0, 0.0}, 2.0);
    const Mesh mesh = build_uniform_mesh(square, 1.0, Rect{-1.0, -1.0, 1.0, 1.0});
    REQUIRE(mesh.size() == 4);
    const AdjacencyGraph adj = adjacency(mesh);
    REQUIRE(adj.edges.size() == 4);
    const DifferenceOperator F = difference_operator(adj, mesh.size());
    CHECK(F.rows() == 4);
    CHECK(F.cols() == 4);

    const Eigen::MatrixXd Fd = Eigen::MatrixXd(F.matrix);
    for (size_t r = 0; r < adj.edges.size(); ++r) {
        CHECK(Fd(r, adj.edges[r].a) == 1.0);
        CHECK(Fd(r, adj.edges[r].b) == -1.0);
        CHECK(Fd.row(r).cwiseAbs().sum() == 2.0);  // no other entries
    }

    // constants are annihilated
    const Eigen::VectorXd ones = Eigen::VectorXd::Constant(4, 3.7);
    CHECK((F.matrix * ones).norm() == 0.0);

    // the smoothness penalty equals the brute-force sum over edges
    std::mt19937 rng(11);
    const Eigen::VectorXd k = random_vector(4, rng, -2.0, 2.0);
    double acc = 0.0;
    for (const auto& e : adj.edges) {
        const double d = k[e.a] - k[e.b];
        acc += d * d;
    }
    CHECK((F.matrix * k).squaredNorm() == doctest::Approx(acc).epsilon(1e-12));

    AdjacencyGraph bad;
    bad.edges.push_back({0, 7, 1.0, 1.0});
    CHECK_THROWS_AS(difference_operator(bad, 4), std::invalid_argument);
    CHECK_THROWS_AS(difference_operator(adj, 0), std::invalid_argument);
}

TEST_CASE("analytic gradients match central differences") {
    std::mt19937 rng(42);
    const int m = 12, n = 8;
    const Eigen::MatrixXd A = random_matrix(m, n, rng);
    const Eigen::VectorXd b = random_vector(m, rng, -1.0, 1.0);
    const AdjacencyGraph adj = chain_graph(n);
    const DifferenceOperator F = difference_operator(adj, n);
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : adj.edges) edges.emplace_back(e.a, e.b);

    const double gamma = 0.37;
    const double beta = 0.21;
    const double eps = 1e-3;  // well away from the FD step
    const double h = 1e-6;

    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd k = random_vector(n, rng, 0.0, 2.0);

        const Eigen::VectorXd g_tk = tk_gradient(A, b, F, gamma, k);
        const Eigen::VectorXd g_tk_fd = fd_gradient(
            [&](const Eigen::VectorXd& q) { return tk_objective(A, b, F, gamma, q); }, k, h);
        for (int i = 0; i < n; ++i)
            CHECK(std::abs(g_tk[i] - g_tk_fd[i]) <= 1e-5 * std::max(1.0, std::abs(g_tk[i])));

        const Eigen::VectorXd g_tv = tv_gradient(A, b, edges, beta, eps, k);
        const Eigen::VectorXd g_tv_fd = fd_gradient(
            [&](const Eigen::VectorXd& q) { return tv_objective(A, b, edges, beta, eps, q); }, k,
            h);
        for (int i = 0; i < n; ++i)
            CHECK(std::abs(g_tv[i] - g_tv_fd[i]) <= 1e-5 * std::max(1.0, std::abs(g_tv[i])));
    }
}

TEST_CASE("smoothed solver recovers truth on invertible systems at gamma zero") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 10;
        const Eigen::MatrixXd A =
            Eigen::MatrixXd::Identity(n, n) + 0.1 * random_matrix(n, n, rng);
        const Eigen::VectorXd truth = random_vector(n, rng, 0.0, 1.0);
        const Eigen::VectorXd b = A * truth;
        const DifferenceOperator F = difference_operator(chain_graph(n), n);
        const ReconResult res = solve_tk(A, b, F, 0.0, {5000, 1e-14, true});
        CHECK(res.converged);
        CHECK((res.k - truth).norm() <= 1e-6 * std::max(1.0, truth.norm()));
    }
}

TEST_CASE("huge smoothing drives the solution to the best constant field") {
    std::mt19937 rng(19);
    const int m = 12, n = 9;
    const Eigen::MatrixXd A = random_matrix(m, n, rng, 0.1, 1.0);
    const Eigen::VectorXd truth = random_vector(n, rng, 0.2, 1.0);
    const Eigen::VectorXd b = A * truth;
    const DifferenceOperator F = difference_operator(chain_graph(n), n);

    const Eigen::VectorXd a1 = A * Eigen::VectorXd::Ones(n);
    const double c = std::max(0.0, a1.dot(b) / a1.squaredNorm());

    const Eigen::VectorXd start = mean_field_start(A, b);
    for (int i = 0; i < n; ++i) CHECK(start[i] == doctest::Approx(c).epsilon(1e-12));

    const ReconResult res = solve_tk(A, b, F, 1e12, {2000, 1e-12, true});
    for (int i = 0; i < n; ++i) CHECK(res.k[i] == doctest::Approx(c).epsilon(1e-6));

    // anti-correlated data clamps the constant to zero
    const Eigen::VectorXd neg = -b;
    const Eigen::VectorXd s2 = mean_field_start(A, neg);
    CHECK(s2.norm() == 0.0);
}

TEST_CASE("solution objective does not exceed the truth objective") {
    const ConvexPolygon square = make_square({0.0, 0.0}, 7.0);
    const BeamLayout layout = build_beam_layout(4, 8, 0.65, 21.0);
    const Mesh mesh = build_hybrid_mesh(square, 1.4, 0.7, Rect{-2.1, -2.1, 2.1, 2.1});
    const SensingMatrix S = assemble_sensing_matrix(layout, mesh);
    const AdjacencyGraph adj = adjacency(mesh);
    const DifferenceOperator F = difference_operator(adj, mesh.size());

    // smooth non-negative truth: radial bump over the mesh
    Eigen::VectorXd truth(mesh.size());
    for (const Pixel& px : mesh.pixels) {
        const Vec2 c = px.rect.center();
        truth[px.id] = 0.1 + std::exp(-0.5 * (c.x * c.x + c.y * c.y));
    }
    const Eigen::VectorXd b = S.entries * truth;
    const double gamma = 1e-3;
    const ReconResult res = solve_tk(S.entries, b, F, gamma, {5000, 1e-12, true});
    CHECK(res.objective <= tk_objective(S.entries, b, F, gamma, truth) + 1e-12);
}

TEST_CASE("row-action solver basics") {
    SUBCASE("identity system solved in one sweep at unit relaxation") {
        const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(4, 4);
        Eigen::VectorXd b(4);
        b << 1.0, 0.5, 2.0, 0.0;
        const ReconResult res = solve_art(A, b, 1.0, {1, 1e-6, true});
        for (int i = 0; i < 4; ++i) CHECK(res.k[i] == b[i]);
    }

    SUBCASE("single row projects onto the hyperplane") {
        Eigen::MatrixXd A(1, 2);
        A << 3.0, 4.0;
        Eigen::VectorXd b(1);
        b << 10.0;
        const ReconResult res = solve_art(A, b, 1.0, {1, 1e-6, false});
        CHECK(res.k[0] == doctest::Approx(1.2).epsilon(1e-12));
        CHECK(res.k[1] == doctest::Approx(1.6).epsilon(1e-12));
    }

    SUBCASE("all-zero rows are skipped") {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 2);
        A(1, 0) = 2.0;
        Eigen::VectorXd b(3);
        b << 5.0, 4.0, 5.0;  // inconsistent rows carry zero coefficients
        const ReconResult res = solve_art(A, b, 1.0, {10, 1e-12, false});
        CHECK(res.k[0] == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(res.k[1] == 0.0);
    }

    SUBCASE("rejects out-of-range relaxation and degenerate systems") {
        const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
        const Eigen::VectorXd b = Eigen::VectorXd::Ones(2);
        CHECK_THROWS_AS(solve_art(A, b, 0.0, {}), std::invalid_argument);
        CHECK_THROWS_AS(solve_art(A, b, -0.5, {}), std::invalid_argument);
        CHECK_THROWS_AS(solve_art(A, b, 2.5, {}), std::invalid_argument);
        CHECK_NOTHROW(solve_art(A, b, 2.0, {}));
        CHECK_THROWS_AS(solve_art(Eigen::MatrixXd::Zero(2, 2), b, 1.0, {}),
                        std::invalid_argument);
        CHECK_THROWS_AS(solve_art(A, Eigen::VectorXd::Ones(3), 1.0, {}), std::invalid_argument);
    }
}

TEST_CASE("row-action solver matches normal equations on consistent systems") {
    std::mt19937 rng(101);
    for (int trial = 0; trial < 10; ++trial) {
        const int m = 20, n = 10;
        const Eigen::MatrixXd A = random_matrix(m, n, rng);
        const Eigen::VectorXd truth = random_vector(n, rng, 0.0, 1.0);
        const Eigen::VectorXd b = A * truth;
        const Eigen::VectorXd normal =
            (A.transpose() * A).ldlt().solve(A.transpose() * b);
        const ReconResult res = solve_art(A, b, 1.0, {5000, 1e-12, false});
        CHECK((res.k - normal).norm() <= 1e-4 * std::max(1.0, normal.norm()));
    }
}

TEST_CASE("row-action error contracts sweep over sweep on consistent systems") {
    std::mt19937 rng(55);
    const int m = 15, n = 8;
    const Eigen::MatrixXd A = random_matrix(m, n, rng);
    const Eigen::VectorXd truth = random_vector(n, rng, -1.0, 1.0);
    const Eigen::VectorXd b = A * truth;
    double prev = truth.norm();  // error of the k = 0 start
    for (int sweeps = 1; sweeps <= 12; ++sweeps) {
        const ReconResult res = solve_art(A, b, 1.0, {sweeps, 1e-300, false});
        const double err = (res.k - truth).norm();
        CHECK(err <= prev + 1e-12);
        prev = err;
    }
}

TEST_CASE("edge-smoothed solver agrees with the quadratic one at beta zero") {
    std::mt19937 rng(23);
    const int n = 10;
    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) + 0.1 * random_matrix(n, n, rng);
    const Eigen::VectorXd truth = random_vector(n, rng, 0.1, 1.0);
    const Eigen::VectorXd b = A * truth;
    const AdjacencyGraph adj = chain_graph(n);
    const DifferenceOperator F = difference_operator(adj, n);

    const ReconResult tk = solve_tk(A, b, F, 0.0, {5000, 1e-14, true});
    const ReconResult tv = solve_tv(A, b, adj, 0.0, {5000, 1e-14, true});
    CHECK((tk.k - tv.k).norm() <= 1e-6 * std::max(1.0, tk.k.norm()));
}

TEST_CASE("edge-smoothed objective on a constant field counts the edges") {
    Eigen::MatrixXd A(2, 3);
    A << 1.0, 0.0, 1.0, 0.0, 1.0, 0.0;
    Eigen::VectorXd b(2);
    b << 1.0, 2.0;
    const std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}};
    const double beta = 2.0, eps = 0.5;
    const Eigen::VectorXd k = Eigen::VectorXd::Constant(3, 0.7);
    const double expected = 0.5 * (A * k - b).squaredNorm() + beta * 2.0 * eps;
    CHECK(tv_objective(A, b, edges, beta, eps, k) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("descent solvers decrease the objective monotonically in the budget") {
    std::mt19937 rng(31);
    const int m = 12, n = 9;
    const Eigen::MatrixXd A = random_matrix(m, n, rng, 0.0, 1.0);
    const Eigen::VectorXd b = random_vector(m, rng, 0.5, 2.0);
    const AdjacencyGraph adj = chain_graph(n);
    const DifferenceOperator F = difference_operator(adj, n);

    double prev_tk = std::numeric_limits<double>::infinity();
    double prev_tv = std::numeric_limits<double>::infinity();
    for (int budget = 1; budget <= 15; ++budget) {
        const double f_tk = solve_tk(A, b, F, 0.05, {budget, 1e-300, true}).objective;
        CHECK(f_tk <= prev_tk + 1e-12);
        prev_tk = f_tk;
        const double f_tv = solve_tv(A, b, adj, 0.05, {budget, 1e-300, true}).objective;
        CHECK(f_tv <= prev_tv + 1e-12);
        prev_tv = f_tv;
    }
}

TEST_CASE("non-negativity is exact when requested") {
    std::mt19937 rng(67);
    const int m = 10, n = 14;  // underdetermined, negative data pushes k down
    const Eigen::MatrixXd A = random_matrix(m, n, rng);
    const Eigen::VectorXd b = random_vector(m, rng, -2.0, -0.5);
    const AdjacencyGraph adj = chain_graph(n);
    const DifferenceOperator F = difference_operator(adj, n);

    CHECK(solve_tk(A, b, F, 0.01, {200, 1e-12, true}).k.minCoeff() >= 0.0);
    CHECK(solve_tv(A, b, adj, 0.01, {200, 1e-12, true}).k.minCoeff() >= 0.0);
    CHECK(solve_art(A, b, 0.5, {50, 1e-12, true}).k.minCoeff() >= 0.0);
}

TEST_CASE("solutions are equivariant under pixel relabeling") {
    std::mt19937 rng(77);
    const int m = 12, n = 8;
    const Eigen::MatrixXd A = random_matrix(m, n, rng, 0.0, 1.0);
    const Eigen::VectorXd b = random_vector(m, rng, 0.2, 1.5);
    const AdjacencyGraph adj = chain_graph(n);
    const DifferenceOperator F = difference_operator(adj, n);

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);

    Eigen::MatrixXd Ap(m, n);
    for (int j = 0; j < n; ++j) Ap.col(perm[j]) = A.col(j);
    AdjacencyGraph adjp;
    for (const auto& e : adj.edges)
        adjp.edges.push_back({perm[e.a], perm[e.b], e.shared_edge_length, e.centroid_distance});
    const DifferenceOperator Fp = difference_operator(adjp, n);

    const Eigen::VectorXd k1 = solve_tk(A, b, F, 0.2, {500, 1e-12, true}).k;
    const Eigen::VectorXd k2 = solve_tk(Ap, b, Fp, 0.2, {500, 1e-12, true}).k;
    for (int j = 0; j < n; ++j) CHECK(k2[perm[j]] == doctest::Approx(k1[j]).epsilon(1e-9));

    const Eigen::VectorXd t1 = solve_tv(A, b, adj, 0.2, {500, 1e-12, true}).k;
    const Eigen::VectorXd t2 = solve_tv(Ap, b, adjp, 0.2, {500, 1e-12, true}).k;
    for (int j = 0; j < n; ++j) CHECK(t2[perm[j]] == doctest::Approx(t1[j]).epsilon(1e-9));

    const Eigen::VectorXd a1 = solve_art(A, b, 0.8, {100, 1e-12, true}).k;
    const Eigen::VectorXd a2 = solve_art(Ap, b, 0.8, {100, 1e-12, true}).k;
    for (int j = 0; j < n; ++j) CHECK(a2[perm[j]] == doctest::Approx(a1[j]).epsilon(1e-9));
}

TEST_CASE("edge-preserving prior wins on a two-level field") {
    const ConvexPolygon square = make_square({0.0, 0.0}, 7.0);
    const BeamLayout layout = build_beam_layout(4, 8, 0.65, 21.0);
    const Mesh mesh = build_hybrid_mesh(square, 1.4, 0.7, Rect{-2.1, -2.1, 2.1, 2.1});
    const SensingMatrix S = assemble_sensing_matrix(layout, mesh);
    const AdjacencyGraph adj = adjacency(mesh);
    const DifferenceOperator F = difference_operator(adj, mesh.size());

    Eigen::VectorXd truth(mesh.size());
    for (const Pixel& px : mesh.pixels)
        truth[px.id] = px.region == Region::InRoI ? 1.0 : 0.1;
    const Eigen::VectorXd b = S.entries * truth;

    double best_tk = std::numeric_limits<double>::infinity();
    for (double g : {1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0})
        best_tk = std::min(best_tk,
                           (solve_tk(S.entries, b, F, g, {4000, 1e-12, true}).k - truth).norm());
    double best_tv = std::numeric_limits<double>::infinity();
    for (double bta : {1e-4, 1e-3, 1e-2, 1e-1})
        best_tv = std::min(
            best_tv, (solve_tv(S.entries, b, adj, bta, {4000, 1e-12, true}).k - truth).norm());
    CHECK(best_tv < best_tk);
}

TEST_CASE("power iteration reproduces known spectra") {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
    A(0, 0) = 3.0;
    A(1, 1) = 1.0;
    CHECK(power_iteration_lambda_max(A, DifferenceOperator{}, 0.0) ==
          doctest::Approx(9.0).epsilon(1e-9));

    AdjacencyGraph adj;
    adj.edges.push_back({0, 1, 1.0, 1.0});
    const DifferenceOperator F = difference_operator(adj, 2);
    // A^T A + 2 F^T F = [[11, -2], [-2, 3]]; largest eigenvalue 7 + 2*sqrt(5)
    CHECK(power_iteration_lambda_max(A, F, 2.0) ==
          doctest::Approx(7.0 + 2.0 * std::sqrt(5.0)).epsilon(1e-9));
}

TEST_CASE("concentration conversion inverts the absorption scaling") {
    const std::vector<double> k{0.0, 0.3, 1.2};
    const std::vector<double> x = concentration_from_k(k, 2.0, 3.0, 294.15);
    CHECK(x[0] == 0.0);
    CHECK(x[1] == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(x[2] == doctest::Approx(0.2).epsilon(1e-12));
    for (size_t i = 0; i < k.size(); ++i)
        CHECK(x[i] * 2.0 * 3.0 == doctest::Approx(k[i]).epsilon(1e-12));
    CHECK_THROWS_AS(concentration_from_k(k, 0.0, 1.0, 294.15), std::invalid_argument);
    CHECK_THROWS_AS(concentration_from_k(k, 1.0, -1.0, 294.15), std::invalid_argument);
    CHECK_THROWS_AS(concentration_from_k(k, 1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("option and argument validation") {
    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(3, 3);
    const Eigen::VectorXd b = Eigen::VectorXd::Ones(3);
    const DifferenceOperator F = difference_operator(chain_graph(3), 3);
    CHECK_THROWS_AS(solve_tk(A, b, F, -1.0, {}), std::invalid_argument);
    CHECK_THROWS_AS(solve_tk(A, b, F, 1.0, {0, 1e-9, true}), std::invalid_argument);
    CHECK_THROWS_AS(solve_tk(A, b, F, 1.0, {100, 0.0, true}), std::invalid_argument);
    CHECK_THROWS_AS(solve_tk(A, b, difference_operator(chain_graph(5), 5), 1.0, {}),
                    std::invalid_argument);
    AdjacencyGraph adj = chain_graph(3);
    CHECK_THROWS_AS(solve_tv(A, b, adj, -0.1, {}), std::invalid_argument);
    AdjacencyGraph bad;
    bad.edges.push_back({0, 9, 1.0, 1.0});
    CHECK_THROWS_AS(solve_tv(A, b, bad, 0.1, {}), std::invalid_argument);
}

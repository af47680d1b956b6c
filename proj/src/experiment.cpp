#include "cst/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace cst {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void parallel_for(size_t n, int n_jobs, const std::function<void(size_t)>& body) {
    if (n_jobs <= 0) n_jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (n_jobs < 1) n_jobs = 1;
    const size_t workers = std::min<size_t>(n_jobs, n);
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

double sample_std(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

ReconResult dispatch_solver(const SchemeSetup& scheme, SolverKind kind, double value,
                            const Eigen::VectorXd& b, const SolverOptions& opts) {
    switch (kind) {
        case SolverKind::TK:
            return solve_tk(scheme.matrix.entries, b, scheme.F, value, opts);
        case SolverKind::ART:
            return solve_art(scheme.matrix.entries, b, value, opts);
        case SolverKind::TV:
            return solve_tv(scheme.matrix.entries, b, scheme.adj, value, opts);
    }
    throw std::logic_error("unknown solver kind");
}

struct CellOutcome {
    double ie_ros = kNaN;
    double ie_roi = kNaN;
    bool failed = false;
    std::string message;
};

/// Reconstruct one noisy measurement and score it against the frame's truth.
CellOutcome evaluate_cell(const SchemeSetup& scheme, SolverKind kind, double value,
                          const SolverOptions& opts, const FramePhantom& frame,
                          const Eigen::VectorXd& b_noisy) {
    CellOutcome out;
    try {
        const ReconResult rec = dispatch_solver(scheme, kind, value, b_noisy, opts);
        const std::vector<double> x_rec =
            concentration_from_k(std::vector<double>(rec.k.data(), rec.k.data() + rec.k.size()),
                                 frame.field.pressure_atm, frame.field.linestrength,
                                 frame.field.temperature_k);
        const ImageErrorReport rep = image_error_report(x_rec, frame.x_true, scheme.mesh.n_in);
        out.ie_ros = rep.ie_ros;
        out.ie_roi = rep.ie_roi;
    } catch (const std::exception& e) {
        out.failed = true;
        out.message = e.what();
    }
    return out;
}

/// Noise realizations shared by every grid value: index (frame, rep), seed
/// = base_seed + rep.
std::vector<std::vector<Eigen::VectorXd>> noisy_measurements(
    const std::vector<FramePhantom>& frames, double snr_db, int n_reps, uint64_t base_seed) {
    std::vector<std::vector<Eigen::VectorXd>> out(frames.size());
    for (size_t f = 0; f < frames.size(); ++f) {
        out[f].reserve(n_reps);
        Measurement clean;
        clean.b.assign(frames[f].b_clean.data(), frames[f].b_clean.data() + frames[f].b_clean.size());
        for (int r = 0; r < n_reps; ++r) {
            const Measurement noisy = add_noise(clean, snr_db, base_seed + static_cast<uint64_t>(r));
            out[f].push_back(Eigen::Map<const Eigen::VectorXd>(noisy.b.data(), noisy.b.size()));
        }
    }
    return out;
}

}  // namespace

const char* solver_name(SolverKind kind) {
    switch (kind) {
        case SolverKind::TK: return "tk";
        case SolverKind::ART: return "art";
        case SolverKind::TV: return "tv";
    }
    return "?";
}

double image_error(const std::vector<double>& x_rec, const std::vector<double>& x_true,
                   const std::vector<int>& mask) {
    if (x_rec.size() != x_true.size())
        throw std::invalid_argument("reconstruction and truth lengths differ");
    if (mask.empty()) throw std::invalid_argument("image error over an empty mask");
    double acc = 0.0;
    for (int j : mask) {
        if (j < 0 || static_cast<size_t>(j) >= x_true.size())
            throw std::invalid_argument("mask id " + std::to_string(j) + " out of range");
        if (!(x_true[j] > 0.0))
            throw std::invalid_argument("true value must be positive at masked pixel " +
                                        std::to_string(j));
        acc += std::abs(x_rec[j] - x_true[j]) / x_true[j];
    }
    return acc / static_cast<double>(mask.size());
}

ImageErrorReport image_error_report(const std::vector<double>& x_rec,
                                    const std::vector<double>& x_true, int n_in) {
    if (n_in < 1 || static_cast<size_t>(n_in) > x_true.size())
        throw std::invalid_argument("pixel split is out of range");
    ImageErrorReport rep;
    rep.per_pixel_relerr.resize(x_true.size());
    std::vector<int> all(x_true.size());
    std::iota(all.begin(), all.end(), 0);
    rep.ie_ros = image_error(x_rec, x_true, all);
    all.resize(n_in);
    rep.ie_roi = image_error(x_rec, x_true, all);
    for (size_t j = 0; j < x_true.size(); ++j)
        rep.per_pixel_relerr[j] = std::abs(x_rec[j] - x_true[j]) / x_true[j];
    return rep;
}

std::vector<int> roi_mask(const Mesh& mesh) {
    std::vector<int> mask(mesh.n_in);
    std::iota(mask.begin(), mask.end(), 0);
    return mask;
}

std::vector<int> ros_mask(const Mesh& mesh) {
    std::vector<int> mask(mesh.size());
    std::iota(mask.begin(), mask.end(), 0);
    return mask;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0)) throw std::invalid_argument("log grid needs lo > 0");
    if (!(lo < hi)) throw std::invalid_argument("log grid needs lo < hi");
    if (n < 2) throw std::invalid_argument("log grid needs at least 2 points");
    std::vector<double> grid(n);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < n; ++i)
        grid[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / (n - 1));
    grid.front() = lo;  // pin endpoints exactly
    grid.back() = hi;
    for (int i = 1; i < n; ++i)
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("log grid is not increasing");
    return grid;
}

FramePhantom make_frame(const Field& field, const Mesh& mesh, const BeamLayout& layout) {
    FramePhantom frame;
    frame.field = field;
    frame.x_true = downsample_truth(field, mesh);
    const Measurement m = forward_project(field, layout);
    frame.b_clean = Eigen::Map<const Eigen::VectorXd>(m.b.data(), m.b.size());
    return frame;
}

SchemeSetup make_scheme_setup(std::string name, Mesh mesh, const BeamLayout& layout,
                              const std::vector<Field>& fields) {
    SchemeSetup s;
    s.name = std::move(name);
    s.mesh = std::move(mesh);
    s.matrix = assemble_sensing_matrix(layout, s.mesh);
    s.adj = adjacency(s.mesh);
    s.F = difference_operator(s.adj, s.mesh.size());
    s.frames.reserve(fields.size());
    for (const Field& f : fields) s.frames.push_back(make_frame(f, s.mesh, layout));
    return s;
}

SweepResult regularization_sweep(const SchemeSetup& scheme, const PerSolverConfig& solver,
                                 double snr_db, int n_reps, uint64_t base_seed, int n_jobs) {
    if (n_reps < 1) throw std::invalid_argument("sweep needs n_reps >= 1");
    if (scheme.frames.empty()) throw std::invalid_argument("sweep needs at least one frame");

    SweepResult res;
    res.grid = log_grid(solver.grid_lo, solver.grid_hi, solver.grid_steps);
    const int n_grid = static_cast<int>(res.grid.size());
    const int n_frames = static_cast<int>(scheme.frames.size());
    const int cols = n_frames * n_reps;

    const auto noisy = noisy_measurements(scheme.frames, snr_db, n_reps, base_seed);

    std::vector<CellOutcome> cells(static_cast<size_t>(n_grid) * cols);
    parallel_for(cells.size(), n_jobs, [&](size_t idx) {
        const int g = static_cast<int>(idx) / cols;
        const int c = static_cast<int>(idx) % cols;
        const int f = c / n_reps;
        const int r = c % n_reps;
        cells[idx] = evaluate_cell(scheme, solver.kind, res.grid[g], solver.opts,
                                   scheme.frames[f], noisy[f][r]);
    });

    res.per_rep_ie.resize(n_grid, cols);
    res.mean_ie.assign(n_grid, kNaN);
    res.std_ie.assign(n_grid, 0.0);
    res.mean_ie_roi.assign(n_grid, kNaN);
    for (int g = 0; g < n_grid; ++g) {
        bool ok = true;
        std::vector<double> ros, roi;
        ros.reserve(cols);
        roi.reserve(cols);
        for (int c = 0; c < cols; ++c) {
            const CellOutcome& cell = cells[static_cast<size_t>(g) * cols + c];
            res.per_rep_ie(g, c) = cell.ie_ros;
            if (cell.failed) {
                ok = false;
                res.failures.push_back({g, c / n_reps, c % n_reps, cell.message});
            } else {
                ros.push_back(cell.ie_ros);
                roi.push_back(cell.ie_roi);
            }
        }
        if (!ok) continue;  // a failed cell poisons this grid value
        res.mean_ie[g] = std::accumulate(ros.begin(), ros.end(), 0.0) / ros.size();
        res.std_ie[g] = sample_std(ros, res.mean_ie[g]);
        res.mean_ie_roi[g] = std::accumulate(roi.begin(), roi.end(), 0.0) / roi.size();
    }

    for (int g = 0; g < n_grid; ++g) {
        if (std::isnan(res.mean_ie[g])) continue;
        if (res.optimal_index < 0 || res.mean_ie[g] < res.optimal_ie) {
            res.optimal_index = g;
            res.optimal_ie = res.mean_ie[g];
            res.optimal_value = res.grid[g];
        }
    }
    if (res.optimal_index < 0)
        throw std::runtime_error("every grid value of the " + std::string(solver_name(solver.kind)) +
                                 " sweep failed; first error: " +
                                 (res.failures.empty() ? "unknown" : res.failures.front().message));
    return res;
}

ComparisonReport run_comparison(const std::vector<SchemeSetup>& schemes,
                                const ComparisonSpec& spec) {
    if (schemes.empty()) throw std::invalid_argument("comparison needs at least one scheme");
    if (spec.solvers.empty()) throw std::invalid_argument("comparison needs at least one solver");
    for (const auto& s : schemes) {
        if (s.matrix.rows() != schemes.front().matrix.rows())
            throw std::invalid_argument("schemes disagree on beam count; layouts differ");
        if (s.frames.size() != schemes.front().frames.size())
            throw std::invalid_argument("schemes disagree on frame count");
    }

    ComparisonReport report;
    for (const auto& scheme : schemes) {
        for (const auto& solver : spec.solvers) {
            SweepResult sweep = regularization_sweep(scheme, solver, spec.sweep_snr_db, spec.n_reps,
                                                     spec.base_seed, spec.n_jobs);
            const double reg = sweep.optimal_value;
            report.sweeps.push_back({scheme.name, solver.kind, std::move(sweep)});

            for (double snr : spec.snr_list) {
                const auto noisy = noisy_measurements(scheme.frames, snr, spec.n_reps, spec.base_seed);
                const int n_frames = static_cast<int>(scheme.frames.size());
                const int cols = n_frames * spec.n_reps;
                std::vector<CellOutcome> cells(cols);
                parallel_for(cells.size(), spec.n_jobs, [&](size_t idx) {
                    const int f = static_cast<int>(idx) / spec.n_reps;
                    const int r = static_cast<int>(idx) % spec.n_reps;
                    cells[idx] = evaluate_cell(scheme, solver.kind, reg, solver.opts,
                                               scheme.frames[f], noisy[f][r]);
                });

                ComparisonCell cell;
                cell.scheme = scheme.name;
                cell.mesh_scheme = scheme.mesh.scheme;
                cell.solver = solver.kind;
                cell.snr_db = snr;
                cell.reg_value = reg;
                cell.n_cells = cols;
                std::vector<double> ros, roi;
                for (const auto& c : cells) {
                    if (c.failed) {
                        cell.n_failures += 1;
                        continue;
                    }
                    ros.push_back(c.ie_ros);
                    roi.push_back(c.ie_roi);
                }
                if (!ros.empty()) {
                    cell.mean_ie_ros = std::accumulate(ros.begin(), ros.end(), 0.0) / ros.size();
                    cell.std_ie_ros = sample_std(ros, cell.mean_ie_ros);
                    cell.mean_ie_roi = std::accumulate(roi.begin(), roi.end(), 0.0) / roi.size();
                    cell.std_ie_roi = sample_std(roi, cell.mean_ie_roi);
                } else {
                    cell.mean_ie_ros = cell.mean_ie_roi = kNaN;
                }
                report.cells.push_back(std::move(cell));
            }
        }
    }

    // Pair uniform vs hybrid cells of the same solver and SNR.
    for (const auto& u : report.cells) {
        if (u.mesh_scheme != MeshScheme::Uniform) continue;
        for (const auto& h : report.cells) {
            if (h.mesh_scheme != MeshScheme::Hybrid) continue;
            if (h.solver != u.solver || h.snr_db != u.snr_db) continue;
            Improvement imp;
            imp.solver = u.solver;
            imp.snr_db = u.snr_db;
            imp.roi_pct = (u.mean_ie_roi - h.mean_ie_roi) / u.mean_ie_roi * 100.0;
            imp.ros_pct = (u.mean_ie_ros - h.mean_ie_ros) / u.mean_ie_ros * 100.0;
            report.improvements.push_back(imp);
        }
    }
    return report;
}

}  // namespace cst

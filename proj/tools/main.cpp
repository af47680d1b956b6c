#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cst/runner.hpp"

namespace {

struct Cli {
    cst::CommonArgs common;
    std::string mesh_name;
    std::string phantom_name;
    std::string solver;
    std::optional<double> snr_db;
    std::optional<double> reg_value;
    int frame = 0;
    bool extend = false;
};

void add_common(CLI::App* cmd, Cli& cli) {
    cmd->add_option("--config", cli.common.config_path, "Experiment config file (JSON)")
        ->required();
    cmd->add_option("--out", cli.common.out_dir, "Output directory (overrides the config)");
    cmd->add_option("--seed", cli.common.seed, "Base seed (overrides the config)");
    cmd->add_option("--jobs", cli.common.n_jobs, "Worker threads (0 = logical CPUs)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laser-absorption tomography workbench: meshes, sensing matrices, "
                 "reconstructions and meshing-scheme comparisons"};
    app.require_subcommand(1);
    Cli cli;

    CLI::App* mesh = app.add_subcommand("mesh", "Generate a mesh and its report");
    add_common(mesh, cli);
    mesh->add_option("--mesh", cli.mesh_name, "Mesh name (default: first in config)");

    CLI::App* sense = app.add_subcommand("sense", "Assemble the sensing matrix with stats and spectra");
    add_common(sense, cli);
    sense->add_option("--mesh", cli.mesh_name, "Mesh name (default: first in config)");

    CLI::App* svd = app.add_subcommand("svd", "Write a singular-value spectrum");
    add_common(svd, cli);
    svd->add_option("--mesh", cli.mesh_name, "Mesh name (default: first in config)");
    svd->add_flag("--extend", cli.extend, "Use the square row-duplication extension");

    CLI::App* phantom = app.add_subcommand("phantom", "Render phantom frames");
    add_common(phantom, cli);
    phantom->add_option("--phantom", cli.phantom_name, "Phantom name (default: first in config)");

    CLI::App* project = app.add_subcommand("project", "Project phantom frames to beam absorbances");
    add_common(project, cli);
    project->add_option("--phantom", cli.phantom_name, "Phantom name (default: first in config)");
    project->add_option("--snr", cli.snr_db, "Also write a noisy copy at this SNR (dB)");

    CLI::App* reconstruct = app.add_subcommand("reconstruct", "Reconstruct one frame");
    add_common(reconstruct, cli);
    reconstruct->add_option("--mesh", cli.mesh_name, "Mesh name (default: first in config)");
    reconstruct->add_option("--phantom", cli.phantom_name, "Phantom name (default: first in config)");
    reconstruct->add_option("--solver", cli.solver, "Solver kind: tk, art or tv");
    reconstruct->add_option("--value", cli.reg_value, "Regularization value (default: grid midpoint)");
    reconstruct->add_option("--snr", cli.snr_db, "Measurement SNR in dB (default: noise-free)");
    reconstruct->add_option("--frame", cli.frame, "Frame index (default 0)");

    CLI::App* sweep = app.add_subcommand("sweep", "Sweep a solver's regularization grid");
    add_common(sweep, cli);
    sweep->add_option("--mesh", cli.mesh_name, "Mesh name (default: first in config)");
    sweep->add_option("--phantom", cli.phantom_name, "Phantom name (default: first in config)");
    sweep->add_option("--solver", cli.solver, "Solver kind: tk, art or tv");

    CLI::App* run = app.add_subcommand("run", "Full study: sweeps, comparison, reports");
    add_common(run, cli);

    CLI11_PARSE(app, argc, argv);

    try {
        if (mesh->parsed()) return cst::cmd_mesh(cli.common, cli.mesh_name);
        if (sense->parsed()) return cst::cmd_sense(cli.common, cli.mesh_name);
        if (svd->parsed()) return cst::cmd_svd(cli.common, cli.mesh_name, cli.extend);
        if (phantom->parsed()) return cst::cmd_phantom(cli.common, cli.phantom_name);
        if (project->parsed()) return cst::cmd_project(cli.common, cli.phantom_name, cli.snr_db);
        if (reconstruct->parsed())
            return cst::cmd_reconstruct(cli.common, cli.mesh_name, cli.phantom_name, cli.solver,
                                        cli.reg_value, cli.snr_db, cli.frame);
        if (sweep->parsed())
            return cst::cmd_sweep(cli.common, cli.mesh_name, cli.phantom_name, cli.solver);
        if (run->parsed()) return cst::cmd_run(cli.common);
    } catch (const cst::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

#ifndef CST_RUNNER_HPP
#define CST_RUNNER_HPP

#include <optional>
#include <string>

#include "cst/config.hpp"

namespace cst {

/// Flags shared by every subcommand. Non-empty out_dir and a set seed override
/// the config's values.
struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<uint64_t> seed;
    int n_jobs = 0;  // 0 -> hardware concurrency
};

int cmd_mesh(const CommonArgs& args, const std::string& mesh_name);
int cmd_sense(const CommonArgs& args, const std::string& mesh_name);
int cmd_svd(const CommonArgs& args, const std::string& mesh_name, bool extend);
int cmd_phantom(const CommonArgs& args, const std::string& phantom_name);
int cmd_project(const CommonArgs& args, const std::string& phantom_name,
                std::optional<double> snr_db);
int cmd_reconstruct(const CommonArgs& args, const std::string& mesh_name,
                    const std::string& phantom_name, const std::string& solver,
                    std::optional<double> reg_value, std::optional<double> snr_db, int frame);
int cmd_sweep(const CommonArgs& args, const std::string& mesh_name,
              const std::string& phantom_name, const std::string& solver);
int cmd_run(const CommonArgs& args);

}  // namespace cst

#endif

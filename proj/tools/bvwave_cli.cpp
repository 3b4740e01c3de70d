#include <CLI11.hpp>
#include <iostream>

#include "bvwave/runner.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "key=value configuration file");
    cmd->add_option("--out", flags.out_dir, "output directory for CSV artifacts");
    cmd->add_option("--override", flags.overrides, "override a config key (repeatable)");
}

int run_kind(bvwave::ProblemKind kind, const CommonFlags& flags) {
    bvwave::RunConfig cfg;
    try {
        cfg = bvwave::parse_config(kind, flags.config_path, flags.overrides, flags.out_dir);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    try {
        return bvwave::run(cfg);
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BV-in-time optimal control of the wave equation"};
    app.require_subcommand(1);

    CommonFlags dirac_flags, cantor_flags, custom_flags;
    CLI::App* dirac = app.add_subcommand("dirac", "finitely-many-jumps test problem");
    CLI::App* cantor = app.add_subcommand("cantor", "devil's-staircase test problem");
    CLI::App* custom = app.add_subcommand("custom", "user-specified target-control problem");
    add_common(dirac, dirac_flags);
    add_common(cantor, cantor_flags);
    add_common(custom, custom_flags);

    CLI11_PARSE(app, argc, argv);

    if (dirac->parsed()) return run_kind(bvwave::ProblemKind::dirac, dirac_flags);
    if (cantor->parsed()) return run_kind(bvwave::ProblemKind::cantor, cantor_flags);
    return run_kind(bvwave::ProblemKind::custom, custom_flags);
}

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "perfomag/commands.hpp"
#include "perfomag/config.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--config", opts.config_path, "configuration file")
        ->required();
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", opts.seed, "random seed override")
        ->each([&](const std::string&) { opts.seed_set = true; });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "homogenized paramagnetic-ferromagnetic phase transition toolkit "
        "for periodically perforated media"};
    app.require_subcommand(1);

    CommonOpts cell_o, tensors_o, curie_o, simulate_o, verify_o;
    CLI::App* c_cell =
        app.add_subcommand("cell", "solve the unit-cell corrector problems");
    add_common(c_cell, cell_o);
    CLI::App* c_tensors =
        app.add_subcommand("tensors", "assemble the effective tensors");
    add_common(c_tensors, tensors_o);
    CLI::App* c_curie =
        app.add_subcommand("curie", "Curie temperature tensor eigen-report");
    add_common(c_curie, curie_o);
    CLI::App* c_simulate =
        app.add_subcommand("simulate", "run the homogenized coupled system");
    add_common(c_simulate, simulate_o);
    CLI::App* c_verify = app.add_subcommand(
        "verify", "two-scale convergence study against the micro solver");
    add_common(c_verify, verify_o);

    CLI11_PARSE(app, argc, argv);

    auto run = [&](const char* name, CommonOpts& opts,
                   void (*command)(const perfomag::SimConfig&,
                                   const std::string&)) {
        perfomag::SimConfig cfg = perfomag::parse_config(opts.config_path);
        if (opts.seed_set) cfg.seed = opts.seed;
        std::string out = opts.out_dir.empty()
                              ? perfomag::default_out_dir(name,
                                                          opts.config_path)
                              : opts.out_dir;
        command(cfg, out);
        std::cout << name << ": outputs written to " << out << '\n';
        return 0;
    };

    try {
        if (c_cell->parsed()) return run("cell", cell_o, perfomag::cmd_cell);
        if (c_tensors->parsed())
            return run("tensors", tensors_o, perfomag::cmd_tensors);
        if (c_curie->parsed())
            return run("curie", curie_o, perfomag::cmd_curie);
        if (c_simulate->parsed())
            return run("simulate", simulate_o, perfomag::cmd_simulate);
        if (c_verify->parsed())
            return run("verify", verify_o, perfomag::cmd_verify);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

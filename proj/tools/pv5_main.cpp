// Batch front end: simulate / verify / monodromy / tau-zeros / identities.
// Exit codes: 0 ok, 1 config or runtime error, 2 blow-up, 3 verification
// failure. Every flag can also come from the environment (PV5_* prefix).

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "pv5/cli.hpp"

namespace {

struct CommonArgs {
    std::string config_file;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    double rtol = 0.0, atol = 0.0;
    bool rtol_set = false, atol_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_file, "run configuration (JSON)")
        ->envname("PV5_CONFIG")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory")->envname("PV5_OUT");
    cmd->add_option("--seed", args.seed, "random seed override")
        ->envname("PV5_SEED")
        ->each([&](const std::string&) { args.seed_set = true; });
    cmd->add_option("--rtol", args.rtol, "relative tolerance override")
        ->envname("PV5_RTOL")
        ->each([&](const std::string&) { args.rtol_set = true; });
    cmd->add_option("--atol", args.atol, "absolute tolerance override")
        ->envname("PV5_ATOL")
        ->each([&](const std::string&) { args.atol_set = true; });
}

pv5::RunConfig load_with_overrides(const CommonArgs& args) {
    pv5::RunConfig cfg = pv5::load_config(args.config_file);
    if (args.seed_set) cfg.seed = args.seed;
    if (args.rtol_set) cfg.integrator.rtol = args.rtol;
    if (args.atol_set) cfg.integrator.atol = args.atol;
    cfg.integrator.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pv5: isomonodromic deformation engine for the Painleve V system"};
    app.require_subcommand(1);

    CommonArgs sim_args, ver_args, mon_args, tz_args, id_args;
    int verify_count = 0;
    bool break_rhs = false;
    int mono_samples = 0;

    CLI::App* sim = app.add_subcommand("simulate", "integrate the deformation along a path");
    add_common(sim, sim_args);

    CLI::App* ver = app.add_subcommand("verify", "batch identity checks over random states");
    add_common(ver, ver_args);
    ver->add_option("--count", verify_count, "number of random states")->envname("PV5_COUNT");
    ver->add_flag("--break-rhs", break_rhs,
                  "negative control: use the sign-flipped right side");

    CLI::App* mon = app.add_subcommand("monodromy", "monodromy invariants and their drift");
    add_common(mon, mon_args);
    mon->add_option("--samples", mono_samples, "number of t-samples along the path");

    CLI::App* tz = app.add_subcommand("tau-zeros", "drive the path into the Theta divisor");
    add_common(tz, tz_args);

    CLI::App* ids = app.add_subcommand("identities", "pointwise identity report at t0");
    add_common(ids, id_args);

    CLI11_PARSE(app, argc, argv);

    const CommonArgs* args = nullptr;
    if (sim->parsed()) args = &sim_args;
    else if (ver->parsed()) args = &ver_args;
    else if (mon->parsed()) args = &mon_args;
    else if (tz->parsed()) args = &tz_args;
    else args = &id_args;

    try {
        pv5::RunConfig cfg = load_with_overrides(*args);
        if (ver->parsed()) {
            if (verify_count > 0) cfg.verify_count = verify_count;
            if (break_rhs) cfg.verify_break_rhs = true;
            return pv5::run_verify(cfg, args->out_dir);
        }
        if (mon->parsed()) {
            if (mono_samples > 0) cfg.monodromy_samples = mono_samples;
            return pv5::run_monodromy(cfg, args->out_dir);
        }
        if (tz->parsed()) return pv5::run_tau_zeros(cfg, args->out_dir);
        if (ids->parsed()) return pv5::run_identities(cfg, args->out_dir);
        return pv5::run_simulate(cfg, args->out_dir);
    } catch (const pv5::Error& e) {
        std::fprintf(stderr, "pv5: %s\n", e.what());
        try {
            pv5::write_error_report(args->out_dir, e);
        } catch (...) {
        }
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "pv5: %s\n", e.what());
        return 1;
    }
}

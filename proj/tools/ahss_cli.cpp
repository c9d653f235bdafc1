#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "ahss/experiment.hpp"

namespace {

int execute(ahss::ExperimentConfig cfg, const std::string& out_dir, bool quiet, bool strict,
            std::optional<double> duration, std::optional<long> seed) {
    if (duration) cfg.timing.duration = *duration;
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.output_dir = out_dir;

    const ahss::RunResult result = ahss::run(cfg);
    ahss::write_csv(result, cfg.output_dir);

    ahss::ExperimentConfig base = cfg;
    base.controller = ahss::ControllerKind::None;
    base.initial_estimates.clear();
    const ahss::Metrics m = ahss::metrics(result, ahss::run(base));

    if (!quiet) {
        if (m.no_disturbance) {
            std::cout << "no disturbance: RMS ratio undefined\n";
        } else {
            std::cout << "open-loop RMS:  " << m.open_loop_rms << "\n"
                      << "trailing RMS:   " << m.trailing_rms << " (ratio " << m.rms_ratio << ")\n";
            for (std::size_t i = 0; i < m.u_inf.size(); ++i) {
                std::cout << "u_inf tone " << i << ":";
                for (long j = 0; j < m.u_inf[i].size(); ++j)
                    std::cout << " " << m.u_inf[i](j).real() << (m.u_inf[i](j).imag() >= 0 ? "+" : "")
                              << m.u_inf[i](j).imag() << "j";
                std::cout << "\n";
            }
            if (m.convergence_step >= 0)
                std::cout << "converged at controller step " << m.convergence_step << "\n";
        }
        if (result.diverged) std::cout << "divergence flag set (run truncated)\n";
        if (result.oracle_violations > 0)
            std::cout << "oracle report: " << result.oracle_violations
                      << " inequality violations logged (time-domain run, report-only)\n";
        std::cout << "wrote " << cfg.output_dir << "/{timeseries,phasors,oracles}.csv\n";
    }
    if (strict && result.diverged) return 3;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Harmonic steady-state disturbance rejection experiments"};
    app.require_subcommand(1);

    bool quiet = false, strict = false;
    std::optional<double> duration;
    std::optional<long> seed;
    app.add_flag("--quiet", quiet, "suppress the summary printout");
    app.add_flag("--strict", strict, "exit 3 when the divergence flag is set");
    app.add_option("--duration", duration, "override run duration, s");
    app.add_option("--seed", seed, "override config seed");

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "run an experiment from a config file");
    run_cmd->add_option("config", config_path, "JSON config file")->required();

    std::string preset_name, preset_out, preset_controller = "ahss";
    auto* preset_cmd = app.add_subcommand("preset", "run a built-in example configuration");
    preset_cmd->add_option("name", preset_name, "ex1a|ex1b|ex2a|ex2b|ex3a|ex3b")->required();
    preset_cmd->add_option("--out", preset_out, "output directory");
    preset_cmd->add_option("--controller", preset_controller, "none|hss|ahss (default ahss)");

    std::string sweep_preset = "ex1a", sweep_out = "sweep.csv";
    int sweep_points = 180;
    long sweep_steps = 2000;
    auto* sweep_cmd = app.add_subcommand(
        "sweep", "map fixed-gain stability vs adaptive convergence over the estimate phase");
    sweep_cmd->add_option("--preset", sweep_preset, "base preset (SISO single tone)");
    sweep_cmd->add_option("--points", sweep_points, "phase grid size");
    sweep_cmd->add_option("--steps", sweep_steps, "phasor-domain iterations per point");
    sweep_cmd->add_option("--out", sweep_out, "output CSV path");

    for (auto* sub : app.get_subcommands(nullptr)) sub->fallthrough();
    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed())
            return execute(ahss::load_config(config_path), "", quiet, strict, duration, seed);
        if (preset_cmd->parsed()) {
            ahss::ExperimentConfig cfg = ahss::preset(preset_name);
            if (preset_controller == "none") cfg.controller = ahss::ControllerKind::None;
            else if (preset_controller == "hss") cfg.controller = ahss::ControllerKind::Hss;
            else if (preset_controller == "ahss") cfg.controller = ahss::ControllerKind::Ahss;
            else throw ahss::ConfigError("unknown controller kind: " + preset_controller);
            return execute(std::move(cfg), preset_out, quiet, strict, duration, seed);
        }
        if (sweep_cmd->parsed()) {
            const auto rows = ahss::sweep_phase_grid(ahss::preset(sweep_preset), sweep_points, sweep_steps);
            std::FILE* out = std::fopen(sweep_out.c_str(), "w");
            if (!out) throw ahss::ConfigError("cannot open " + sweep_out);
            std::fprintf(out, "theta,hss_stable,rho_max,ahss_final_ratio\n");
            for (const auto& r : rows)
                std::fprintf(out, "%.9g,%d,%.9g,%.9g\n", r.theta, r.hss_stable ? 1 : 0, r.rho_max,
                             r.ahss_final_ratio);
            std::fclose(out);
            if (!quiet) std::cout << "wrote " << sweep_out << "\n";
            return 0;
        }
    } catch (const ahss::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

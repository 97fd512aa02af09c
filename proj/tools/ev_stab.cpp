#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "evstab/pipeline.hpp"
#include "evstab/state_io.hpp"

using namespace evstab;

namespace {

struct Inputs {
    std::string config, state, output_dir;
};

void add_inputs(CLI::App* cmd, Inputs& in, bool state_allowed = true) {
    cmd->add_option("--config,-c", in.config, "run configuration (key = value)")->check(CLI::ExistingFile);
    if (state_allowed) cmd->add_option("--state,-s", in.state, "serialized steady state")->check(CLI::ExistingFile);
    cmd->add_option("--output-dir,-o", in.output_dir, "override output_dir");
}

RunConfig load_config(const Inputs& in) {
    RunConfig cfg;
    if (!in.config.empty()) cfg = parse_config(in.config, in.state.empty());
    else if (in.state.empty()) throw ConfigError({"either --config or --state is required"});
    if (!in.output_dir.empty()) cfg.output_dir = in.output_dir;
    return cfg;
}

SteadyState load_or_build(const Inputs& in, RunConfig& cfg) {
    if (!in.state.empty()) {
        auto ss = load_state(in.state);
        cfg = adopt_state_parameters(cfg, ss);
        return ss;
    }
    return build_state(cfg);
}

void print(const nlohmann::ordered_json& j) { std::cout << j.dump(2) << '\n'; }

template <class Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        for (const auto& m : e.errors) std::cerr << "config error: " << m << '\n';
        return exit_config;
    } catch (const StateFormatError& e) {
        std::cerr << e.what() << '\n';
        return exit_config;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linear stability toolkit for static spherically symmetric Einstein-Vlasov states"};
    app.require_subcommand(1);

    Inputs build_in, well_in, orb_in, ker_in, stab_in, basis_in;
    auto* build = app.add_subcommand("build", "construct a steady state and write its table and state file");
    add_inputs(build, build_in, false);

    auto* well = app.add_subcommand("check-single-well", "single-well gate with per-L detail (JSON)");
    add_inputs(well, well_in);

    std::size_t samples = 100;
    std::string orbits_out;
    auto* orbits = app.add_subcommand("orbits", "sample orbits: E, L, r_minus, r_plus, T (CSV)");
    add_inputs(orbits, orb_in);
    orbits->add_option("--samples,-n", samples, "number of (E, L) samples")->check(CLI::PositiveNumber);
    orbits->add_option("--out", orbits_out, "CSV path (default stdout)");

    std::string dump_path;
    bool dump = false;
    auto* kernel = app.add_subcommand("kernel", "assemble the kernel K(r, s)");
    add_inputs(kernel, ker_in);
    kernel->add_option("--dump", dump_path, "write r_i, s_j, K_ij as CSV (path, default stdout)")->expected(0, 1);

    auto* stab = app.add_subcommand("stability", "full pipeline with gates, verdict and artifacts (JSON)");
    add_inputs(stab, stab_in);

    auto* basis = app.add_subcommand("basis-report", "kernel-B basis diagnostics (JSON)");
    add_inputs(basis, basis_in);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? int(exit_ok) : int(exit_config);
    }
    dump = kernel->count("--dump") > 0;
    if (dump && dump_path.empty()) dump_path = "-";

    if (*build) {
        return guarded([&] {
            auto cfg = load_config(build_in);
            auto ss = build_state(cfg);
            std::filesystem::create_directories(cfg.output_dir);
            save_state(ss, std::filesystem::path(cfg.output_dir) / "state.evs");
            std::ofstream csv(std::filesystem::path(cfg.output_dir) / "steady_state.csv");
            write_table_csv(ss, csv);
            nlohmann::ordered_json j = state_summary(ss);
            j["config"] = to_json(cfg);
            print(j);
            return int(exit_ok);
        });
    }
    if (*well) {
        return guarded([&] {
            auto cfg = load_config(well_in);
            auto ss = load_or_build(well_in, cfg);
            auto sw = verify_single_well(ss, cfg.single_well_n_L, cfg.single_well_samples);
            print(to_json(sw));
            return sw.pass ? int(exit_ok) : int(exit_gate);
        });
    }
    if (*orbits) {
        return guarded([&] {
            auto cfg = load_config(orb_in);
            auto ss = load_or_build(orb_in, cfg);
            const auto s = sample_orbits(ss, samples);
            if (orbits_out.empty()) {
                write_orbits_csv(s, std::cout);
            } else {
                std::ofstream out(orbits_out);
                write_orbits_csv(s, out);
            }
            return int(exit_ok);
        });
    }
    if (*kernel) {
        return guarded([&] {
            auto cfg = load_config(ker_in);
            auto ss = load_or_build(ker_in, cfg);
            const auto k = kernel_K(ss, cfg.kernel);
            if (dump) {
                if (dump_path == "-") {
                    write_kernel_csv(k, std::cout);
                } else {
                    std::ofstream out(dump_path);
                    write_kernel_csv(k, out);
                }
            }
            if (!dump || dump_path != "-") {
                auto rep = classify(k, cfg.tol);
                rep.convergence.clear();
                auto j = to_json(rep);
                j.erase("convergence");
                print(j);
            }
            return int(exit_ok);
        });
    }
    if (*stab) {
        return guarded([&] {
            auto cfg = load_config(stab_in);
            PipelineReport rep =
                stab_in.state.empty() ? run_pipeline(cfg) : run_pipeline(cfg, load_state(stab_in.state));
            emit_artifacts(rep, rep.config);
            print(to_json(rep));
            for (const auto& s : rep.stages)
                if (s.status != StageStatus::built) std::cerr << s.name << ": " << s.message << '\n';
            return rep.exit_code;
        });
    }
    if (*basis) {
        return guarded([&] {
            auto cfg = load_config(basis_in);
            auto ss = load_or_build(basis_in, cfg);
            print(basis_report(ss, cfg));
            return int(exit_ok);
        });
    }
    return exit_config;
}

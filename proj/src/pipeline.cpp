#include "evstab/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "evstab/parallel.hpp"
#include "evstab/phase_space.hpp"
#include "evstab/state_io.hpp"

namespace evstab {

namespace {

using clock_type = std::chrono::steady_clock;
using ojson = nlohmann::ordered_json;

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

// Runs one stage; body returns true when its gate passes.
template <class Body>
bool stage(PipelineReport& rep, const std::string& name, Body&& body) {
    StageRecord rec;
    rec.name = name;
    const auto t0 = clock_type::now();
    bool pass = false;
    try {
        pass = body(rec);
        rec.status = pass ? StageStatus::built : StageStatus::gated;
        if (!pass) {
            rep.exit_code = exit_gate;
            if (rep.outcome.empty()) rep.outcome = name + " gate failed";
        }
    } catch (const std::invalid_argument& e) {
        rec.status = StageStatus::failed;
        rec.message = e.what();
        rep.exit_code = exit_config;
        rep.outcome = name + " failed";
    } catch (const std::exception& e) {
        rec.status = StageStatus::failed;
        rec.message = e.what();
        rep.exit_code = exit_numerical;
        rep.outcome = name + " failed";
    }
    rec.seconds = seconds_since(t0);
    const bool ok = rec.status == StageStatus::built;
    rep.stages.push_back(std::move(rec));
    return ok;
}

void run_stages(PipelineReport& rep) {
    const auto& cfg = rep.config;
    const SteadyState& ss = *rep.state;

    if (!stage(rep, "residuals", [&](StageRecord& rec) {
            const auto res = residuals(ss);
            const auto d = diagnostics(ss);
            rec.residuals["tov"] = res.tov;
            rec.residuals["field_rho"] = res.field_rho;
            rec.residuals["field_p"] = res.field_p;
            rec.residuals["max_2m_over_r"] = d.max_2m_over_r;
            rec.residuals["tolerance"] = cfg.residual_tol;
            const bool ok = res.tov < cfg.residual_tol && res.field_rho < cfg.residual_tol &&
                            res.field_p < cfg.residual_tol && d.max_2m_over_r < 8.0 / 9.0;
            if (!ok) rec.message = "equilibrium residual or Buchdahl bound exceeded";
            return ok;
        }))
        return;

    if (!stage(rep, "single_well", [&](StageRecord& rec) {
            const auto sw = verify_single_well(ss, cfg.single_well_n_L, cfg.single_well_samples);
            rec.residuals["violations"] = sw.violations.size();
            rec.residuals["L_lo"] = sw.support.L_lo;
            rec.residuals["L_hi"] = sw.support.L_hi;
            if (!sw.pass) {
                for (const auto& v : sw.violations) rec.message += (rec.message.empty() ? "" : "; ") + v;
            }
            return sw.pass;
        }))
        return;

    if (!stage(rep, "period_bounds", [&](StageRecord& rec) {
            const auto pb = period_bounds(ss, cfg.period_n_E, cfg.period_n_L);
            rec.residuals["T_inf"] = pb.T_inf;
            rec.residuals["T_sup"] = pb.T_sup;
            rec.residuals["samples"] = pb.samples;
            const bool ok = pb.T_inf > 0 && std::isfinite(pb.T_sup);
            if (!ok) rec.message = "period function not bounded away from 0 and infinity";
            return ok;
        }))
        return;

    if (!stage(rep, "hlr", [&](StageRecord& rec) {
            const double r = hlr_identity_residual(ss);
            rec.residuals["identity_residual"] = r;
            rec.residuals["tolerance"] = cfg.hlr_tol;
            if (!(r < cfg.hlr_tol)) rec.message = "identity residual " + num(r) + " above tolerance";
            return r < cfg.hlr_tol;
        }))
        return;

    if (!stage(rep, "s4", [&](StageRecord& rec) {
            if (ss.eos.family == Family::polytrope && ss.eos.k < 1) {
                rec.message = "polytropes with k < 1 have unbounded phi' at the cut-off";
                return false;
            }
            const double b = s4_bound(ss);
            rec.residuals["bound"] = b;
            if (!std::isfinite(b)) rec.message = "weighted phi' integral is not finite";
            return std::isfinite(b);
        }))
        return;

    stage(rep, "kernel", [&](StageRecord& rec) {
        MathurKernel k;
        auto sr = stability_report(ss, cfg.stability_options(), &k);
        rec.residuals["symmetry_defect"] = sr.symmetry_defect;
        rec.residuals["lambda_min"] = sr.lambda_min;
        rec.residuals["hs_cross_check"] =
            sr.hs_norm > 0 ? std::abs(sr.hs_norm * sr.hs_norm - sr.eigen_hs_norm * sr.eigen_hs_norm) /
                                 (sr.hs_norm * sr.hs_norm)
                           : 0.0;
        rec.residuals["boundary_max"] = sr.boundary_max;
        rec.residuals["max_rel_change"] = sr.max_rel_change;
        rep.outcome = to_string(sr.verdict);
        if (sr.verdict == Verdict::inconclusive) {
            rep.exit_code = exit_numerical;
            rec.message = "refinement changed lambda_1 by more than tol";
        }
        rep.stability = std::move(sr);
        rep.kernel = std::move(k);
        return true;
    });
}

}  // namespace

std::string to_string(StageStatus s) {
    switch (s) {
        case StageStatus::built: return "built";
        case StageStatus::gated: return "gated";
        case StageStatus::failed: return "failed";
        case StageStatus::skipped: return "skipped";
    }
    return "?";
}

SteadyState build_state(const RunConfig& cfg) {
    if (!cfg.mode) throw std::invalid_argument("mode is not set");
    if (*cfg.mode == Mode::shell)
        return build_shell(cfg.shell_parameters(), cfg.eos(), cfg.resolved_delta(), cfg.solver);
    return solve_singularity_free(cfg.eos(), cfg.y0, cfg.solver);
}

PipelineReport run_pipeline(const RunConfig& cfg) {
    PipelineReport rep;
    rep.config = cfg;
    const bool built = stage(rep, "build", [&](StageRecord& rec) {
        rep.state = build_state(cfg);
        rec.residuals["E0_cut"] = rep.state->E0();
        if (rep.state->vacuum) {
            rec.message = "no matter support";
            rep.outcome = "no matter support";
            return false;
        }
        return true;
    });
    if (built) run_stages(rep);
    return rep;
}

RunConfig adopt_state_parameters(RunConfig cfg, const SteadyState& ss) {
    cfg.mode = ss.mode;
    cfg.family = ss.eos.family;
    cfg.k = ss.eos.k;
    cfg.l = ss.eos.l;
    cfg.L0 = ss.eos.L0;
    cfg.delta = ss.eos.delta;
    cfg.solver = ss.opts;
    if (ss.shell) {
        cfg.M = ss.shell->M;
        cfg.E_intermediate = ss.shell->E_intermediate;
        cfg.eta0 = ss.shell->eta0;
    } else {
        cfg.y0 = ss.y0;
        cfg.eta0.reset();
    }
    return cfg;
}

PipelineReport run_pipeline(const RunConfig& cfg, const SteadyState& ss) {
    PipelineReport rep;
    rep.config = adopt_state_parameters(cfg, ss);
    rep.state = ss;
    StageRecord rec;
    rec.name = "build";
    rec.message = "loaded";
    rec.residuals["E0_cut"] = ss.E0();
    if (ss.vacuum) {
        rec.status = StageStatus::gated;
        rec.message = "no matter support";
        rep.outcome = rec.message;
        rep.exit_code = exit_gate;
        rep.stages.push_back(rec);
        return rep;
    }
    rec.status = StageStatus::built;
    rep.stages.push_back(rec);
    run_stages(rep);
    return rep;
}

ojson to_json(const StabilityReport& s) {
    ojson j;
    j["verdict"] = to_string(s.verdict);
    j["lambda_1"] = s.lambda_1;
    j["hs_norm"] = s.hs_norm;
    j["n_modes_above_one"] = s.n_modes_above_one;
    j["mode_bound_holds"] = s.mode_bound_holds;
    j["tol"] = s.tol;
    j["leading_eigenvalues"] = s.leading_eigenvalues;
    j["lambda_min"] = s.lambda_min;
    j["eigen_hs_norm"] = s.eigen_hs_norm;
    j["symmetry_defect"] = s.symmetry_defect;
    j["boundary_max"] = s.boundary_max;
    j["max_abs"] = s.max_abs;
    j["n_nodes"] = s.n_nodes;
    j["basis"] = {{"dim", s.basis_dim}, {"kept", s.kept}, {"dropped", s.dropped}, {"gram_condition", s.gram_condition}};
    j["converged"] = s.converged;
    j["max_rel_change"] = s.max_rel_change;
    ojson conv = ojson::array();
    for (const auto& r : s.convergence) {
        conv.push_back({{"knob", r.knob},
                        {"n_nodes", r.n_nodes},
                        {"n_E", r.n_E},
                        {"n_L", r.n_L},
                        {"slice_order", r.slice_order},
                        {"lambda_1", r.lambda_1},
                        {"hs_norm", r.hs_norm},
                        {"rel_change_lambda_1", r.rel_change_lambda_1},
                        {"rel_change_hs", r.rel_change_hs}});
    }
    j["convergence"] = conv;
    return j;
}

ojson to_json(const SingleWellReport& s) {
    ojson j;
    j["pass"] = s.pass;
    j["violations"] = s.violations;
    j["max_2m_over_r"] = s.max_2m_over_r;
    j["sufficient_condition"] = s.sufficient_condition;
    j["E0"] = s.support.E0;
    j["L_lo"] = s.support.L_lo;
    j["L_hi"] = s.support.L_hi;
    ojson per = ojson::array();
    for (const auto& c : s.per_L) {
        per.push_back({{"L", c.L},
                       {"I_lo", c.I_lo},
                       {"I_hi", c.I_hi},
                       {"sign_changes", c.sign_changes},
                       {"connected", c.connected},
                       {"critical_radii", c.critical_radii},
                       {"r_L", c.r_L},
                       {"E_min", c.E_min}});
    }
    j["per_L"] = per;
    return j;
}

ojson to_json(const PipelineReport& r) {
    ojson j;
    j["tool"] = "ev-stab";
    j["report_version"] = 1;
    j["outcome"] = r.outcome;
    j["exit_code"] = r.exit_code;
    const ojson st_json = r.stability ? to_json(*r.stability) : ojson();
    for (const char* key : {"verdict", "lambda_1", "hs_norm", "n_modes_above_one", "convergence"})
        j[key] = r.stability ? st_json.at(key) : ojson();
    j["config"] = to_json(r.config);
    ojson st = ojson::array();
    for (const auto& s : r.stages) {
        st.push_back({{"name", s.name}, {"status", to_string(s.status)}, {"message", s.message}, {"residuals", s.residuals}});
    }
    j["stages"] = st;
    j["steady_state"] = r.state ? state_summary(*r.state) : ojson();
    j["stability"] = st_json;
    return j;
}

ojson timings_json(const PipelineReport& r) {
    ojson j;
    for (const auto& s : r.stages) j["stages"][s.name] = s.seconds;
    if (r.stability)
        for (const auto& c : r.stability->convergence) j["kernel_runs"][c.knob] = c.seconds;
    j["threads"] = worker_count();
    return j;
}

std::vector<OrbitSample> sample_orbits(const SteadyState& ss, std::size_t n) {
    if (ss.vacuum) throw std::invalid_argument("orbit sampling needs matter support");
    const MinimalEnergy emin(ss);
    const double Llo = emin.L_lo(), Lhi = emin.L_hi(), E0 = ss.E0();
    // Plastic-number additive recurrence.
    const double a1 = 0.7548776662466927, a2 = 0.5698402909980532;
    std::vector<OrbitSample> out(n);
    parallel_for(n, [&](std::size_t i) {
        const double x = std::fmod(0.5 + a1 * double(i + 1), 1.0);
        const double e = std::fmod(0.5 + a2 * double(i + 1), 1.0);
        const double L = Llo + (Lhi - Llo) * (0.02 + 0.96 * x);
        const double Em = emin(L);
        const double E = Em + (E0 - Em) * (0.02 + 0.96 * e);
        const auto pm = potential_minimum(ss, L);
        const auto tp = turning_points(ss, E, L, pm.r_L);
        out[i] = {E, L, tp.r_minus, tp.r_plus, period(ss, E, L).T};
    });
    return out;
}

void write_orbits_csv(const std::vector<OrbitSample>& s, std::ostream& os) {
    os << "E,L,r_minus,r_plus,T\n";
    for (const auto& o : s)
        os << num(o.E) << ',' << num(o.L) << ',' << num(o.r_minus) << ',' << num(o.r_plus) << ',' << num(o.T) << '\n';
}

void write_kernel_csv(const MathurKernel& k, std::ostream& os) {
    os << "r_i,s_j,K_ij\n";
    for (std::size_t i = 0; i < k.r.size(); ++i)
        for (std::size_t j = 0; j < k.r.size(); ++j)
            os << num(k.r[i]) << ',' << num(k.r[j]) << ',' << num(k.K(Eigen::Index(i), Eigen::Index(j))) << '\n';
}

ojson basis_report(const SteadyState& ss, const RunConfig& cfg) {
    PhaseGrid grid(ss, cfg.phase);
    const auto b = build_kernel_basis(grid, cfg.basis, true);
    ojson j;
    j["generator"] = to_string(b.options.kind);
    j["n_E"] = b.options.n_E;
    j["n_L"] = b.options.n_L;
    j["include_profile"] = b.options.include_profile;
    j["dim"] = b.elements.size();
    j["kept"] = b.kept.size();
    j["dropped"] = b.dropped;
    j["gram_condition"] = b.condition;
    double mx = 0;
    for (double r : b.residuals) mx = std::max(mx, r);
    j["max_residual"] = mx;
    j["residuals"] = b.residuals;
    j["phase_grid"] = {{"n_L", cfg.phase.n_L}, {"n_E", cfg.phase.n_E}, {"n_theta", cfg.phase.n_theta}};
    return j;
}

PlotData potential_plot_data(double M, double L0, double E0, double L, double E, std::size_t n) {
    PlotData f{M, L0, E0, L, E, {}, {}, {}, {}};
    const double rmax = 55 * M;
    for (std::size_t i = 1; i <= n; ++i) {
        const double r = 2 * M + (rmax - 2 * M) * double(i) / double(n);
        f.r.push_back(r);
        f.psi_L0.push_back(schwarzschild_psi(M, L0, r));
        f.psi_L.push_back(schwarzschild_psi(M, L, r));
    }
    auto add = [&](const std::string& name, double curve_L, double level, double r) {
        f.markers.push_back({name, curve_L, level, r, schwarzschild_psi(M, curve_L, r), schwarzschild_psi(M, L0, r)});
    };
    const auto c0 = schwarzschild_critical_radii(M, L0);
    const auto v0 = schwarzschild_level_radii(M, L0, E0);
    const auto sp = ShellParameters::make(M, L0, E0);
    add("r0_0(E0,L0)", L0, E0, v0.r0);
    add("r0", L0, E0, sp.r0);
    add("r0+eta0", L0, E0, sp.r0 + sp.eta0);
    add("R0min", L0, E0, v0.r_minus);
    add("r_L0", L0, E0, c0.r_L);
    add("R0max", L0, E0, v0.r_plus);
    const auto c1 = schwarzschild_critical_radii(M, L);
    const auto v1 = schwarzschild_level_radii(M, L, E);
    add("r0_0(E,L)", L, E, v1.r0);
    add("s_L", L, E, c1.s_L);
    add("r_-(E,L)", L, E, v1.r_minus);
    add("r_L", L, E, c1.r_L);
    add("r_+(E,L)", L, E, v1.r_plus);
    return f;
}

void write_potential_curves_csv(const PlotData& f, std::ostream& os) {
    os << "r,psi_L0,psi_L\n";
    for (std::size_t i = 0; i < f.r.size(); ++i) os << num(f.r[i]) << ',' << num(f.psi_L0[i]) << ',' << num(f.psi_L[i]) << '\n';
}

void write_potential_markers_csv(const PlotData& f, std::ostream& os) {
    os << "name,L,E,r,psi,psi_L0\n";
    for (const auto& m : f.markers)
        os << m.name << ',' << num(m.L) << ',' << num(m.E) << ',' << num(m.r) << ',' << num(m.psi) << ','
           << num(m.psi_L0) << '\n';
}

std::vector<std::filesystem::path> emit_artifacts(const PipelineReport& r, const RunConfig& cfg) {
    namespace fs = std::filesystem;
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    std::vector<fs::path> written;
    auto write = [&](const std::string& name, auto&& fn) {
        const fs::path p = dir / name;
        std::ofstream out(p);
        if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
        fn(out);
        written.push_back(p);
    };
    if (cfg.emit_json) {
        write("summary.json", [&](std::ostream& o) { o << to_json(r).dump(2) << '\n'; });
        write("timings.json", [&](std::ostream& o) { o << timings_json(r).dump(2) << '\n'; });
    }
    if (r.state && cfg.emit_csv) {
        write("steady_state.csv", [&](std::ostream& o) { write_table_csv(*r.state, o); });
        if (!r.state->vacuum && cfg.orbit_samples > 0)
            write("orbits.csv", [&](std::ostream& o) { write_orbits_csv(sample_orbits(*r.state, cfg.orbit_samples), o); });
    }
    if (r.state && cfg.emit_state) write("state.evs", [&](std::ostream& o) { o << state_to_string(*r.state); });
    if (cfg.emit_plot_data && cfg.mode && *cfg.mode == Mode::shell) {
        const auto f = potential_plot_data(cfg.M, cfg.resolved_L0(), cfg.E_intermediate, cfg.plot_L, cfg.plot_E);
        write("potential_curves.csv", [&](std::ostream& o) { write_potential_curves_csv(f, o); });
        write("potential_markers.csv", [&](std::ostream& o) { write_potential_markers_csv(f, o); });
    }
    if (r.kernel && cfg.emit_kernel_dump) write("kernel.csv", [&](std::ostream& o) { write_kernel_csv(*r.kernel, o); });
    return written;
}

}  // namespace evstab

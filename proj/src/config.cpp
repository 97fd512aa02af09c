#include "evstab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace evstab {

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : "; ") + e;
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::optional<double> to_double(const std::string& s) {
    double v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<std::size_t> to_size(const std::string& s) {
    std::size_t v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) return std::nullopt;
    return v;
}

std::optional<bool> to_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    return std::nullopt;
}

using Setter = std::function<std::optional<std::string>(RunConfig&, const std::string&)>;

Setter real(std::function<double&(RunConfig&)> ref, double lo, double hi, bool open_lo = false) {
    return [=](RunConfig& c, const std::string& s) -> std::optional<std::string> {
        auto v = to_double(s);
        if (!v) return "expected a real number, got '" + s + "'";
        if ((open_lo ? !(*v > lo) : !(*v >= lo)) || !(*v <= hi)) {
            std::ostringstream os;
            os << "value " << s << " outside " << (open_lo ? "]" : "[") << lo << ", " << hi << "]";
            return os.str();
        }
        ref(c) = *v;
        return std::nullopt;
    };
}

Setter opt_real(std::function<std::optional<double>&(RunConfig&)> ref, double lo, double hi, bool open_lo) {
    return [=](RunConfig& c, const std::string& s) -> std::optional<std::string> {
        double tmp = 0;
        auto err = real([&tmp](RunConfig&) -> double& { return tmp; }, lo, hi, open_lo)(c, s);
        if (!err) ref(c) = tmp;
        return err;
    };
}

Setter count(std::function<std::size_t&(RunConfig&)> ref, std::size_t lo, std::size_t hi) {
    return [=](RunConfig& c, const std::string& s) -> std::optional<std::string> {
        auto v = to_size(s);
        if (!v) return "expected a non-negative integer, got '" + s + "'";
        if (*v < lo || *v > hi)
            return "value " + s + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
        ref(c) = *v;
        return std::nullopt;
    };
}

Setter flag(std::function<bool&(RunConfig&)> ref) {
    return [=](RunConfig& c, const std::string& s) -> std::optional<std::string> {
        auto v = to_bool(s);
        if (!v) return "expected true|false, got '" + s + "'";
        ref(c) = *v;
        return std::nullopt;
    };
}

const double inf = HUGE_VAL;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> m = {
        {"mode",
         [](RunConfig& c, const std::string& s) -> std::optional<std::string> {
             try {
                 c.mode = mode_from_string(s);
             } catch (const std::invalid_argument& e) {
                 return e.what();
             }
             return std::nullopt;
         }},
        {"M", real([](RunConfig& c) -> double& { return c.M; }, 0, inf, true)},
        {"L0", opt_real([](RunConfig& c) -> std::optional<double>& { return c.L0; }, 0, inf, false)},
        {"E_intermediate", real([](RunConfig& c) -> double& { return c.E_intermediate; }, 0, 1, true)},
        {"eta0", opt_real([](RunConfig& c) -> std::optional<double>& { return c.eta0; }, 0, inf, true)},
        {"y0", real([](RunConfig& c) -> double& { return c.y0; }, 0, inf, true)},
        {"delta", opt_real([](RunConfig& c) -> std::optional<double>& { return c.delta; }, 0, inf, false)},
        {"family",
         [](RunConfig& c, const std::string& s) -> std::optional<std::string> {
             try {
                 c.family = family_from_string(s);
             } catch (const std::invalid_argument& e) {
                 return e.what();
             }
             return std::nullopt;
         }},
        {"k", real([](RunConfig& c) -> double& { return c.k; }, 0, inf)},
        {"l", real([](RunConfig& c) -> double& { return c.l; }, -0.5, inf, true)},
        {"rtol", real([](RunConfig& c) -> double& { return c.solver.rtol; }, 1e-15, 1e-3)},
        {"atol", real([](RunConfig& c) -> double& { return c.solver.atol; }, 1e-18, 1e-3)},
        {"solver_slice_order", count([](RunConfig& c) -> std::size_t& { return c.solver.slice_order; }, 4, 256)},
        {"cheb_nodes", count([](RunConfig& c) -> std::size_t& { return c.solver.cheb_nodes; }, 16, 8192)},
        {"single_well_n_L", count([](RunConfig& c) -> std::size_t& { return c.single_well_n_L; }, 2, 4096)},
        {"single_well_samples",
         count([](RunConfig& c) -> std::size_t& { return c.single_well_samples; }, 16, 1 << 20)},
        {"period_n_E", count([](RunConfig& c) -> std::size_t& { return c.period_n_E; }, 2, 4096)},
        {"period_n_L", count([](RunConfig& c) -> std::size_t& { return c.period_n_L; }, 2, 4096)},
        {"residual_tol", real([](RunConfig& c) -> double& { return c.residual_tol; }, 0, 1, true)},
        {"hlr_tol", real([](RunConfig& c) -> double& { return c.hlr_tol; }, 0, 1, true)},
        {"n_L", count([](RunConfig& c) -> std::size_t& { return c.phase.n_L; }, 2, 512)},
        {"n_E", count([](RunConfig& c) -> std::size_t& { return c.phase.n_E; }, 2, 512)},
        {"n_theta", count([](RunConfig& c) -> std::size_t& { return c.phase.n_theta; }, 8, 8192)},
        {"n_cheb", count([](RunConfig& c) -> std::size_t& { return c.phase.n_cheb; }, 8, 1024)},
        {"phase_slice_order", count([](RunConfig& c) -> std::size_t& { return c.phase.slice_order; }, 4, 256)},
        {"kernel_nodes", count([](RunConfig& c) -> std::size_t& { return c.kernel.n_nodes; }, 8, 4096)},
        {"basis_n_E", count([](RunConfig& c) -> std::size_t& { return c.kernel.n_E; }, 1, 64)},
        {"basis_n_L", count([](RunConfig& c) -> std::size_t& { return c.kernel.n_L; }, 1, 64)},
        {"generator",
         [](RunConfig& c, const std::string& s) -> std::optional<std::string> {
             try {
                 c.kernel.kind = generator_kind_from_string(s);
             } catch (const std::invalid_argument& e) {
                 return e.what();
             }
             return std::nullopt;
         }},
        {"include_profile", flag([](RunConfig& c) -> bool& { return c.kernel.include_profile; })},
        {"kernel_slice_order", count([](RunConfig& c) -> std::size_t& { return c.kernel.slice_order; }, 4, 256)},
        {"panel_order", count([](RunConfig& c) -> std::size_t& { return c.kernel.panel_order; }, 2, 64)},
        {"grading", count([](RunConfig& c) -> std::size_t& { return c.kernel.grading; }, 0, 40)},
        {"drop_tol", real([](RunConfig& c) -> double& { return c.kernel.drop_tol; }, 0, 1e-2, true)},
        {"lift_panels", count([](RunConfig& c) -> std::size_t& { return c.basis.radial.panels; }, 4, 4096)},
        {"lift_order", count([](RunConfig& c) -> std::size_t& { return c.basis.radial.order; }, 2, 64)},
        {"tol", real([](RunConfig& c) -> double& { return c.tol; }, 0, 0.5, true)},
        {"refine", flag([](RunConfig& c) -> bool& { return c.refine; })},
        {"orbit_samples", count([](RunConfig& c) -> std::size_t& { return c.orbit_samples; }, 1, 1 << 20)},
        {"plot_L", real([](RunConfig& c) -> double& { return c.plot_L; }, 0, inf, true)},
        {"plot_E", real([](RunConfig& c) -> double& { return c.plot_E; }, 0, 1, true)},
        {"output_dir",
         [](RunConfig& c, const std::string& s) -> std::optional<std::string> {
             if (s.empty()) return "output_dir must not be empty";
             c.output_dir = s;
             return std::nullopt;
         }},
        {"emit_json", flag([](RunConfig& c) -> bool& { return c.emit_json; })},
        {"emit_csv", flag([](RunConfig& c) -> bool& { return c.emit_csv; })},
        {"emit_plot_data", flag([](RunConfig& c) -> bool& { return c.emit_plot_data; })},
        {"emit_state", flag([](RunConfig& c) -> bool& { return c.emit_state; })},
        {"emit_kernel_dump", flag([](RunConfig& c) -> bool& { return c.emit_kernel_dump; })},
    };
    return m;
}

void cross_validate(const RunConfig& c, bool mode_given, std::vector<std::string>& errors) {
    if (!c.mode) {
        if (!mode_given) errors.push_back("mode: required key missing (singfree|shell)");
        return;
    }
    auto guard = [&](const std::string& what, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            errors.push_back(what + ": " + e.what());
        }
    };
    if (*c.mode == Mode::shell) {
        guard("shell", [&] {
            const double L0 = c.resolved_L0();
            if (!(L0 > 12 * c.M * c.M))
                throw std::invalid_argument("L0=" + std::to_string(L0) + " must exceed 12 M^2 = " +
                                            std::to_string(12 * c.M * c.M));
            (void)c.shell_parameters();
        });
        if (c.plot_L <= 12 * c.M * c.M) errors.push_back("plot_L: must exceed 12 M^2");
    } else {
        if (c.eta0) errors.push_back("eta0: only meaningful for mode = shell");
    }
    guard("eos", [&] {
        auto e = c.eos();
        e.validate();
    });
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errs)
    : std::runtime_error("configuration error: " + join(errs)), errors(std::move(errs)) {}

double RunConfig::resolved_L0() const {
    if (L0) return *L0;
    return mode && *mode == Mode::shell ? 15.0 : 0.0;
}

double RunConfig::resolved_delta() const {
    if (delta) return *delta;
    return mode && *mode == Mode::shell ? 1e-3 : 1.0;
}

EquationOfState RunConfig::eos() const {
    EquationOfState e;
    e.family = family;
    e.k = k;
    e.l = l;
    e.L0 = resolved_L0();
    e.delta = resolved_delta();
    return e;
}

ShellParameters RunConfig::shell_parameters() const { return ShellParameters::make(M, resolved_L0(), E_intermediate, eta0); }

StabilityOptions RunConfig::stability_options() const {
    StabilityOptions o;
    o.kernel = kernel;
    o.tol = tol;
    o.refine = refine;
    return o;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
}

RunConfig parse_config_text(const std::string& text, bool mode_required) {
    RunConfig cfg;
    std::vector<std::string> errors;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(lineno) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back(where + "expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) {
            errors.push_back(where + "unknown key '" + key + "'");
            continue;
        }
        if (!seen.insert(key).second) {
            errors.push_back(where + "duplicate key '" + key + "'");
            continue;
        }
        if (auto err = it->second(cfg, value)) errors.push_back(where + key + ": " + *err);
    }
    cross_validate(cfg, seen.count("mode") > 0 || !mode_required, errors);
    if (!errors.empty()) throw ConfigError(std::move(errors));
    cfg.basis.n_E = cfg.kernel.n_E;
    cfg.basis.n_L = cfg.kernel.n_L;
    cfg.basis.kind = cfg.kernel.kind;
    cfg.basis.include_profile = cfg.kernel.include_profile;
    cfg.basis.drop_tol = cfg.kernel.drop_tol;
    return cfg;
}

RunConfig parse_config(const std::filesystem::path& path, bool mode_required) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open configuration file '" + path.string() + "'"});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), mode_required);
}

nlohmann::ordered_json to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["mode"] = c.mode ? to_string(*c.mode) : "";
    j["M"] = c.M;
    j["L0"] = c.resolved_L0();
    if (c.mode && *c.mode == Mode::shell) {
        j["E_intermediate"] = c.E_intermediate;
        j["eta0"] = c.shell_parameters().eta0;
    } else {
        j["y0"] = c.y0;
    }
    j["delta"] = c.resolved_delta();
    j["family"] = to_string(c.family);
    j["k"] = c.k;
    j["l"] = c.l;
    j["rtol"] = c.solver.rtol;
    j["atol"] = c.solver.atol;
    j["solver_slice_order"] = c.solver.slice_order;
    j["cheb_nodes"] = c.solver.cheb_nodes;
    j["single_well_n_L"] = c.single_well_n_L;
    j["single_well_samples"] = c.single_well_samples;
    j["period_n_E"] = c.period_n_E;
    j["period_n_L"] = c.period_n_L;
    j["residual_tol"] = c.residual_tol;
    j["hlr_tol"] = c.hlr_tol;
    j["n_L"] = c.phase.n_L;
    j["n_E"] = c.phase.n_E;
    j["n_theta"] = c.phase.n_theta;
    j["n_cheb"] = c.phase.n_cheb;
    j["phase_slice_order"] = c.phase.slice_order;
    j["kernel_nodes"] = c.kernel.n_nodes;
    j["basis_n_E"] = c.kernel.n_E;
    j["basis_n_L"] = c.kernel.n_L;
    j["generator"] = to_string(c.kernel.kind);
    j["include_profile"] = c.kernel.include_profile;
    j["kernel_slice_order"] = c.kernel.slice_order;
    j["panel_order"] = c.kernel.panel_order;
    j["grading"] = c.kernel.grading;
    j["drop_tol"] = c.kernel.drop_tol;
    j["lift_panels"] = c.basis.radial.panels;
    j["lift_order"] = c.basis.radial.order;
    j["tol"] = c.tol;
    j["refine"] = c.refine;
    j["orbit_samples"] = c.orbit_samples;
    j["plot_L"] = c.plot_L;
    j["plot_E"] = c.plot_E;
    j["output_dir"] = c.output_dir;
    j["emit_json"] = c.emit_json;
    j["emit_csv"] = c.emit_csv;
    j["emit_plot_data"] = c.emit_plot_data;
    j["emit_state"] = c.emit_state;
    j["emit_kernel_dump"] = c.emit_kernel_dump;
    return j;
}

}  // namespace evstab

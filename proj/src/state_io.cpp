#include "evstab/state_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace evstab {

namespace {

const char* kColumns = "r,y,mu0,lambda0,rho0,p0,q0,m";

nlohmann::ordered_json header(const SteadyState& ss) {
    nlohmann::ordered_json h;
    h["format"] = kStateFormat;
    h["version"] = kStateVersion;
    h["mode"] = to_string(ss.mode);
    h["M"] = ss.M;
    h["eos"] = {{"family", to_string(ss.eos.family)},
                {"k", ss.eos.k},
                {"l", ss.eos.l},
                {"L0", ss.eos.L0},
                {"delta", ss.eos.delta}};
    if (ss.mode == Mode::singfree) {
        h["y0"] = ss.y0;
    } else {
        h["shell"] = {{"E_intermediate", ss.shell->E_intermediate}, {"eta0", ss.shell->eta0}};
    }
    h["solver"] = {{"rtol", ss.opts.rtol},
                   {"atol", ss.opts.atol},
                   {"slice_order", ss.opts.slice_order},
                   {"cheb_nodes", ss.opts.cheb_nodes}};
    h["E0_cut"] = ss.E0();
    h["Rmin"] = ss.Rmin;
    h["Rmax"] = ss.Rmax;
    h["M_vlasov"] = ss.M_vlasov;
    h["vacuum"] = ss.vacuum;
    h["columns"] = kColumns;
    return h;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::vector<TableRow> parse_rows(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kColumns)
        throw StateFormatError("state: expected CSV header '" + std::string(kColumns) + "'");
    std::vector<TableRow> rows;
    for (std::size_t n = 2; std::getline(in, line); ++n) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<double> v;
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            std::size_t used = 0;
            double x = 0;
            try {
                x = std::stod(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != cell.size() || !std::isfinite(x))
                throw StateFormatError("state: row " + std::to_string(n) + ": bad number '" + cell + "'");
            v.push_back(x);
        }
        if (v.size() != 8) throw StateFormatError("state: row " + std::to_string(n) + ": expected 8 columns");
        rows.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]});
    }
    if (rows.empty()) throw StateFormatError("state: empty table");
    return rows;
}

void check_invariants(const nlohmann::json& h, const std::vector<TableRow>& rows) {
    const double M = h.at("M").get<double>();
    const double Rmin = h.at("Rmin").get<double>(), Rmax = h.at("Rmax").get<double>();
    auto fail = [](std::size_t i, const std::string& what) {
        throw StateFormatError("state invariant violated at row " + std::to_string(i + 1) + ": " + what);
    };
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& w = rows[i];
        if (i > 0 && !(w.r > rows[i - 1].r)) fail(i, "r not strictly increasing");
        if (w.r <= 0) continue;
        const double c = 2 * (M + w.m) / w.r;
        if (!(c < 1)) fail(i, "2(M+m)/r = " + fmt(c) + " >= 1");
        const double lam = -0.5 * std::log1p(-c);
        if (std::abs(w.lambda0 - lam) > 1e-10 * std::max(1.0, std::abs(lam)))
            fail(i, "lambda0 inconsistent with m");
        const bool outside = w.r <= Rmin || w.r >= Rmax;
        if (outside && (w.rho0 != 0 || w.p0 != 0 || w.q0 != 0)) fail(i, "matter outside [Rmin, Rmax]");
        if (w.rho0 < 0 || w.p0 < 0 || w.q0 < 0) fail(i, "negative moment");
        if (i > 0 && w.mu0 < rows[i - 1].mu0 - 1e-14) fail(i, "mu0 decreasing");
    }
}

SteadyState rebuild(const nlohmann::json& h) {
    EquationOfState eos;
    const auto& e = h.at("eos");
    eos.family = family_from_string(e.at("family").get<std::string>());
    eos.k = e.at("k").get<double>();
    eos.l = e.at("l").get<double>();
    eos.L0 = e.at("L0").get<double>();
    eos.delta = e.at("delta").get<double>();
    SolverOptions so;
    const auto& s = h.at("solver");
    so.rtol = s.at("rtol").get<double>();
    so.atol = s.at("atol").get<double>();
    so.slice_order = s.at("slice_order").get<std::size_t>();
    so.cheb_nodes = s.at("cheb_nodes").get<std::size_t>();
    if (mode_from_string(h.at("mode").get<std::string>()) == Mode::singfree)
        return solve_singularity_free(eos, h.at("y0").get<double>(), so);
    const auto& sh = h.at("shell");
    auto params = ShellParameters::make(h.at("M").get<double>(), eos.L0, sh.at("E_intermediate").get<double>(),
                                        sh.at("eta0").get<double>());
    return build_shell(params, eos, eos.delta, so);
}

}  // namespace

void write_table_csv(const SteadyState& ss, std::ostream& os) {
    os << kColumns << '\n';
    for (const auto& w : ss.table()) {
        os << fmt(w.r) << ',' << fmt(w.y) << ',' << fmt(w.mu0) << ',' << fmt(w.lambda0) << ',' << fmt(w.rho0) << ','
           << fmt(w.p0) << ',' << fmt(w.q0) << ',' << fmt(w.m) << '\n';
    }
}

std::string state_to_string(const SteadyState& ss) {
    std::ostringstream os;
    os << header(ss).dump() << '\n';
    write_table_csv(ss, os);
    return os.str();
}

void save_state(const SteadyState& ss, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << state_to_string(ss);
}

SteadyState state_from_string(const std::string& text) {
    std::istringstream in(text);
    std::string first;
    std::getline(in, first);
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(first);
    } catch (const nlohmann::json::exception& e) {
        throw StateFormatError(std::string("state: header is not JSON: ") + e.what());
    }
    if (!h.is_object() || h.value("format", "") != kStateFormat)
        throw StateFormatError("state: not an ev-stab steady-state file");
    if (h.value("version", -1) != kStateVersion)
        throw StateFormatError("state: unsupported version " + h.value("version", nlohmann::json()).dump());
    const auto rows = parse_rows(in);
    SteadyState ss;
    try {
        check_invariants(h, rows);
        ss = rebuild(h);
    } catch (const nlohmann::json::exception& e) {
        throw StateFormatError(std::string("state: malformed header: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw StateFormatError(std::string("state: invalid parameters: ") + e.what());
    }
    const auto ref = ss.table();
    if (ref.size() != rows.size()) throw StateFormatError("state: table length differs from the rebuilt state");
    auto close = [](double a, double b, double scale) { return std::abs(a - b) <= 1e-9 * std::max(scale, 1e-300); };
    double scale[8] = {};
    for (const auto& w : ref) {
        const double v[8] = {w.r, w.y, w.mu0, w.lambda0, w.rho0, w.p0, w.q0, w.m};
        for (int c = 0; c < 8; ++c) scale[c] = std::max(scale[c], std::abs(v[c]));
    }
    static const char* names[8] = {"r", "y", "mu0", "lambda0", "rho0", "p0", "q0", "m"};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& a = rows[i];
        const auto& b = ref[i];
        const double va[8] = {a.r, a.y, a.mu0, a.lambda0, a.rho0, a.p0, a.q0, a.m};
        const double vb[8] = {b.r, b.y, b.mu0, b.lambda0, b.rho0, b.p0, b.q0, b.m};
        for (int c = 0; c < 8; ++c) {
            if (!close(va[c], vb[c], scale[c]))
                throw StateFormatError("state: row " + std::to_string(i + 1) + " column " + names[c] +
                                       " disagrees with the rebuilt state");
        }
    }
    if (std::abs(ss.E0() - h.at("E0_cut").get<double>()) > 1e-12)
        throw StateFormatError("state: E0_cut disagrees with the rebuilt state");
    return ss;
}

SteadyState load_state(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw StateFormatError("cannot open state file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return state_from_string(ss.str());
}

nlohmann::ordered_json state_summary(const SteadyState& ss) {
    const auto d = diagnostics(ss);
    nlohmann::ordered_json j;
    j["mode"] = to_string(ss.mode);
    j["E0_cut"] = ss.E0();
    j["Rmin"] = ss.Rmin;
    j["Rmax"] = ss.Rmax;
    if (ss.mode == Mode::shell) {
        j["R0min"] = ss.R0min;
        j["R0max"] = ss.R0max;
    }
    j["M_ADM"] = d.M_ADM;
    j["M_vlasov"] = ss.M_vlasov;
    j["vacuum"] = ss.vacuum;
    nlohmann::ordered_json dj;
    dj["N_rest_mass"] = d.N_rest_mass;
    dj["binding_energy"] = d.binding_energy ? nlohmann::ordered_json(*d.binding_energy) : nlohmann::ordered_json();
    dj["max_2m_over_r"] = d.max_2m_over_r;
    j["diagnostics"] = dj;
    return j;
}

}  // namespace evstab

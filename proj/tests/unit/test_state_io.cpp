#include <doctest.h>

#include <sstream>

#include "evstab/state_io.hpp"
#include "fixtures.hpp"

using namespace evstab;
using doctest::Approx;

namespace {

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& l : v) s += l + "\n";
    return s;
}

}  // namespace

TEST_SUITE("state_io") {
    TEST_CASE("round trip") {
        for (const SteadyState* ss : {&fixtures::singfree_polytrope(), &fixtures::shell()}) {
            const auto text = state_to_string(*ss);
            const auto back = state_from_string(text);
            CHECK(back.mode == ss->mode);
            CHECK(back.E0() == Approx(ss->E0()).epsilon(1e-14));
            CHECK(back.Rmax == Approx(ss->Rmax).epsilon(1e-12));
            CHECK(back.M_vlasov == Approx(ss->M_vlasov).epsilon(1e-12));
            CHECK(state_to_string(back) == text);
        }
    }

    TEST_CASE("header and columns") {
        const auto l = lines(state_to_string(fixtures::shell()));
        REQUIRE(l.size() > 3);
        const auto h = nlohmann::json::parse(l[0]);
        CHECK(h["format"] == kStateFormat);
        CHECK(h["version"] == kStateVersion);
        CHECK(h["mode"] == "shell");
        CHECK(l[1] == "r,y,mu0,lambda0,rho0,p0,q0,m");
        for (std::size_t i = 2; i < l.size(); ++i) CHECK(std::count(l[i].begin(), l[i].end(), ',') == 7);
    }

    TEST_CASE("hand-edited row with 2m >= r is rejected") {
        auto l = lines(state_to_string(fixtures::singfree_polytrope()));
        const std::size_t row = l.size() / 2;
        const auto comma = l[row].rfind(',');
        l[row] = l[row].substr(0, comma + 1) + "1e6";
        CHECK_THROWS_AS(state_from_string(join(l)), StateFormatError);
    }

    TEST_CASE("perturbed column fails the rebuild comparison") {
        auto l = lines(state_to_string(fixtures::singfree_polytrope()));
        const std::size_t row = l.size() / 3;
        // Scale rho0 (fifth column) by 1 + 1e-6.
        std::vector<std::string> cols;
        std::istringstream in(l[row]);
        for (std::string c; std::getline(in, c, ',');) cols.push_back(c);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", std::stod(cols[4]) * (1 + 1e-6));
        cols[4] = buf;
        std::string s;
        for (const auto& c : cols) s += (s.empty() ? "" : ",") + c;
        l[row] = s;
        CHECK_THROWS_AS(state_from_string(join(l)), StateFormatError);
    }

    TEST_CASE("malformed inputs") {
        CHECK_THROWS_AS(state_from_string(""), StateFormatError);
        CHECK_THROWS_AS(state_from_string("{\"format\":\"other\"}\n"), StateFormatError);
        auto l = lines(state_to_string(fixtures::singfree_polytrope()));
        l.resize(3);
        l[2] = "1,2,3";
        CHECK_THROWS_AS(state_from_string(join(l)), StateFormatError);
    }

    TEST_CASE("summary") {
        const auto j = state_summary(fixtures::shell());
        CHECK(j["mode"] == "shell");
        CHECK(j.contains("R0min"));
        CHECK(j["diagnostics"]["max_2m_over_r"].get<double>() < 8.0 / 9.0);
        std::ostringstream os;
        write_table_csv(fixtures::shell(), os);
        CHECK(os.str().rfind("r,y,mu0,lambda0,rho0,p0,q0,m\n", 0) == 0);
    }
}

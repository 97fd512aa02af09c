#include <doctest.h>

#include <sstream>

#include "evstab/pipeline.hpp"

using namespace evstab;

namespace {

RunConfig quick(const std::string& extra) {
    return parse_config_text(extra + "\nrefine = false\nkernel_nodes = 32\nbasis_n_E = 3\nbasis_n_L = 3\n"
                                     "single_well_n_L = 12\nsingle_well_samples = 256\nperiod_n_E = 6\nperiod_n_L = 6\n");
}

std::size_t count_lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

}  // namespace

TEST_SUITE("pipeline") {
    TEST_CASE("zero amplitude shell stops at the build gate") {
        const auto rep = run_pipeline(quick("mode = shell\ndelta = 0"));
        CHECK(rep.exit_code == exit_gate);
        REQUIRE(!rep.stages.empty());
        CHECK(rep.stages.front().name == "build");
        CHECK(rep.stages.front().status == StageStatus::gated);
        CHECK(rep.stages.front().message.find("no matter support") != std::string::npos);
        CHECK(!rep.stability);
    }

    TEST_CASE("shell run: all gates pass and the report is deterministic") {
        const auto cfg = quick("mode = shell");
        const auto a = run_pipeline(cfg);
        CHECK(a.exit_code == exit_ok);
        CHECK(a.outcome == "linearly_stable");
        for (const auto& s : a.stages) CHECK_MESSAGE(s.status == StageStatus::built, s.name);
        const auto b = run_pipeline(cfg);
        CHECK(to_json(a).dump() == to_json(b).dump());
        const auto j = to_json(a);
        CHECK(j["verdict"] == "linearly_stable");
        CHECK(j["exit_code"] == 0);
        CHECK(j.dump().find("seconds") == std::string::npos);
        CHECK(timings_json(a).dump().find("build") != std::string::npos);
    }

    TEST_CASE("report JSON survives a parse round trip") {
        const auto j = to_json(run_pipeline(quick("mode = singfree")));
        CHECK(nlohmann::ordered_json::parse(j.dump()) == j);
    }

    TEST_CASE("pipeline from a state adopts its parameters") {
        const auto base = quick("mode = shell");
        const auto ss = build_state(base);
        auto cfg = parse_config_text("refine = false\nkernel_nodes = 32\nbasis_n_E = 3\nbasis_n_L = 3\n", false);
        const auto rep = run_pipeline(cfg, ss);
        CHECK(rep.exit_code == exit_ok);
        CHECK(*rep.config.mode == Mode::shell);
        CHECK(rep.config.resolved_L0() == 15);
    }

    TEST_CASE("orbit samples and CSV") {
        const auto ss = build_state(quick("mode = singfree"));
        const auto s = sample_orbits(ss, 20);
        REQUIRE(s.size() == 20);
        for (const auto& o : s) {
            CHECK(o.r_minus < o.r_plus);
            CHECK(o.T > 0);
            CHECK(o.E < ss.E0());
        }
        std::ostringstream os;
        write_orbits_csv(s, os);
        CHECK(count_lines(os.str()) == 21);
        CHECK(os.str().rfind("E,L,r_minus,r_plus,T\n", 0) == 0);
        const auto again = sample_orbits(ss, 20);
        CHECK(again.front().T == s.front().T);
    }

    TEST_CASE("potential plot data") {
        const auto f = potential_plot_data(1, 15, 0.98, 18, 0.97, 100);
        CHECK(f.r.size() == 100);
        CHECK(f.markers.size() == 11);
        std::ostringstream c, m;
        write_potential_curves_csv(f, c);
        write_potential_markers_csv(f, m);
        CHECK(count_lines(c.str()) == 101);
        CHECK(count_lines(m.str()) == 12);
        for (const auto& mk : f.markers) CHECK(mk.r > 2);
    }

    TEST_CASE("stage status names") {
        CHECK(to_string(StageStatus::gated) == "gated");
        CHECK(to_string(StageStatus::built) == "built");
    }
}

#include <doctest.h>

#include <algorithm>

#include "evstab/config.hpp"

using namespace evstab;

namespace {

std::vector<std::string> errors_of(const std::string& text, bool mode_required = true) {
    try {
        parse_config_text(text, mode_required);
    } catch (const ConfigError& e) {
        return e.errors;
    }
    return {};
}

bool mentions(const std::vector<std::string>& errs, const std::string& s) {
    return std::any_of(errs.begin(), errs.end(), [&](const auto& e) { return e.find(s) != std::string::npos; });
}

}  // namespace

TEST_SUITE("config") {
    TEST_CASE("empty file requires mode") {
        const auto errs = errors_of("");
        REQUIRE(errs.size() == 1);
        CHECK(mentions(errs, "mode"));
        CHECK(errors_of("", false).empty());
    }

    TEST_CASE("shell example resolves defaults") {
        const auto c = parse_config_text("mode = shell\n# comment\nE_intermediate = 0.98  # trailing\n");
        CHECK(*c.mode == Mode::shell);
        CHECK(c.resolved_L0() == 15);
        CHECK(c.resolved_delta() == 1e-3);
        const auto p = c.shell_parameters();
        CHECK(p.r0 == doctest::Approx(4.145898033750315));
        CHECK(c.basis.n_E == c.kernel.n_E);
    }

    TEST_CASE("singfree defaults") {
        const auto c = parse_config_text("mode = singfree\nfamily = king\n");
        CHECK(c.resolved_L0() == 0);
        CHECK(c.resolved_delta() == 1);
        CHECK(c.eos().family == Family::king);
    }

    TEST_CASE("shell with L0 below 12 M^2 is rejected") {
        CHECK(mentions(errors_of("mode = shell\nL0 = 10\n"), "12 M^2"));
    }

    TEST_CASE("every problem is reported") {
        const auto errs = errors_of("mode = shell\nfoo = 1\nn_theta = -3\nL0 = 10\nmode = shell\nno equals sign\nk = abc\n");
        CHECK(mentions(errs, "unknown key 'foo'"));
        CHECK(mentions(errs, "n_theta"));
        CHECK(mentions(errs, "duplicate key 'mode'"));
        CHECK(mentions(errs, "expected key = value"));
        CHECK(mentions(errs, "k: expected a real number"));
        CHECK(mentions(errs, "12 M^2"));
        CHECK(errs.size() >= 6);
    }

    TEST_CASE("eta0 only for shells; polytrope index bound") {
        CHECK(mentions(errors_of("mode = singfree\neta0 = 0.1\n"), "eta0"));
        CHECK(mentions(errors_of("mode = singfree\nk = 2\n"), "eos"));
    }

    TEST_CASE("missing file") {
        CHECK_THROWS_AS(parse_config("/nonexistent/ev.conf"), ConfigError);
    }

    TEST_CASE("echo contains every key") {
        const auto shell = to_json(parse_config_text("mode = shell\n"));
        const auto singfree = to_json(parse_config_text("mode = singfree\n"));
        for (const auto& k : config_keys()) CHECK_MESSAGE((shell.contains(k) || singfree.contains(k)), k);
        CHECK(shell["L0"] == 15.0);
        CHECK(!shell.contains("y0"));
        CHECK(!singfree.contains("eta0"));
    }
}

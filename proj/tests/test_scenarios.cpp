#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nhsim/error.hpp"
#include "nhsim/scenarios.hpp"

using namespace nhsim;
using namespace nhsim::scenarios;

namespace {

std::string config_error(const std::string& text) {
    try {
        scenario_from_text(text, "s.cfg");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("nhsim_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("preset audit against figure captions") {
    struct Row {
        const char* preset;
        const char* key;
        double value;
    };
    const Row rows[] = {
        {"fig1a", "params.omega", 1.0},        {"fig1a", "params.epsilon", 0.01},
        {"fig1b", "params.lambda", 0.02},      {"fig1e", "params.kappa", 0.01},
        {"fig2d", "params.n", 6.0},            {"fig3", "params.delta1", 1.0},
        {"fig3", "params.omega_m", 1.05},      {"fig3", "params.G", 0.015},
        {"fig3", "params.kappa", 0.0015},      {"fig3", "params.lambda", 0.003},
        {"fig3", "params.gamma_m", 0.584},     {"fig3", "init.re_a1", 100.0},
        {"fig3", "init.beta_ratio", 20.0},     {"fig3", "variant.before.params.lambda", 0.0012},
        {"fig4a", "params.delta_eff1", 1.0},   {"fig4a", "params.Gamma", 0.0},
        {"fig4a", "params.lambda", 0.0012},    {"fig4b", "params.lambda", 0.003},
        {"fig5c", "params.Gamma", 0.001},      {"fig5d", "diagnostics.pearson_window", 10.0},
        {"fig7a", "params.g0", 0.01},          {"fig7a", "params.kappa_c", 0.2},
        {"fig7a", "params.drive", 2.0},        {"fig7a", "params.delta_c", 1.0},
        {"fig7a", "params.delta_ceff", 1.0},   {"fig7a", "params.kappa_ceff", 0.0},
        {"fig7a", "params.gamma", 0.038 / 46}, {"fig7a", "params.lambda_c", 0.1},
        {"fig7a", "init.re_a2", 100.0},        {"fig7a", "init.re_a1", 10.0},
        {"fig7a", "init.q", 0.0},              {"fig8b", "params.lambda_c", 0.25},
        {"fig8c", "params.kappa_ceff", 0.2},   {"fig8d", "variant.shifted.init.re_a1", 10.5},
    };
    for (const auto& r : rows) {
        INFO(r.preset << " " << r.key);
        CHECK(load_scenario(r.preset).config().number(r.key) == r.value);
    }
    CHECK(load_scenario("fig2d").config().numbers("params.epsilons") == std::vector<double>{0.05, 0.06, 0.04, 0.07, 0.01});
    CHECK_FALSE(load_scenario("fig7a").config().flag("params.asymmetric"));
    CHECK(load_scenario("fig7c").config().flag("params.asymmetric"));
}

TEST_CASE("unstated initial conditions are recorded as defaulted") {
    const auto s = load_scenario("fig4a");
    CHECK(s.config().find("init.re_a1")->defaulted);
    CHECK(s.config().number("init.re_a1") == 100.0);
    CHECK_FALSE(load_scenario("fig3").config().find("init.re_a1")->defaulted);
    CHECK(serialize(s).find("init.re_a1 = 100  # defaulted\n") != std::string::npos);
}

TEST_CASE("every preset round-trips through serialization") {
    for (const auto& name : preset_names()) {
        const auto once = serialize(load_scenario(name));
        const auto twice = serialize(scenario_from_text(once));
        INFO(name);
        CHECK(once == twice);
    }
}

TEST_CASE("config errors name the line and key") {
    CHECK(config_error("model = effective\nparams.lamda = 0.1\n") ==
          "line 2: params.lamda: unknown key for model 'effective'");
    CHECK(config_error("model = effective\nparams.kappa = -0.1\n") ==
          "line 2: params.kappa: out of range, must be >= 0 (got -0.1)");
    CHECK(config_error("params.lambda = 1\n") == "missing required key 'model'");
    CHECK(config_error("model = lattice\n") == "line 1: model: unknown model 'lattice'");
    CHECK(config_error("model = effective\nvariant.b.diagnostics.growth = re_a1\n") ==
          "line 2: variant.b.diagnostics.growth: variant cannot override 'diagnostics.growth'");
    CHECK(config_error("model = effective\nassert.x.metric = lle\nassert.x.op = ~\nassert.x.value = 1\n") ==
          "line 3: assert.x.op: unknown operator '~'");
    CHECK(config_error("model = effective\nassert.x.metric = lle\nassert.x.op = <\nassert.x.value = 1\n"
                       "assert.x.variant = ghost\n") == "line 5: assert.x.variant: unknown variant 'ghost'");
    CHECK(config_error("model = effective\nassert.x.metric = lle\nassert.x.value = 1\n") ==
          "assertion 'x' is missing 'op'");
    CHECK(config_error("model = chain\nparams.n = 5\n").find("params.n") != std::string::npos);
    CHECK(config_error("model = exact\nparams.tau = 1\n") == "retardation must be 0 (short-fibre limit)");
    CHECK(config_error("model = effective\ndiagnostics.beat = a3\n").find("diagnostics.beat") != std::string::npos);
}

TEST_CASE("overrides replace existing keys only") {
    auto s = load_scenario("fig3");
    s.apply_override("params.lambda", "0.0024");
    CHECK(s.config().number("params.lambda") == 0.0024);
    CHECK_THROWS_AS(s.apply_override("params.lamda", "1"), ConfigError);
    CHECK_THROWS_AS(s.apply_override("params.kappa", "-1"), ConfigError);
    CHECK_THROWS_AS(s.apply_override("model", "chaos"), ConfigError);
    s.apply_override("variant.before.params.lambda", "0.001");
    CHECK(s.resolved("before").number("params.lambda") == 0.001);
}

TEST_CASE("variants inherit the base configuration") {
    const auto s = load_scenario("fig5c");
    REQUIRE(s.runs() == std::vector<std::string>{"main", "inset"});
    const auto inset = s.resolved("inset");
    CHECK(inset.number("params.lambda") == 0.0012);
    CHECK(inset.number("params.Gamma") == 0.001);
    CHECK_FALSE(inset.has("variant.inset.params.lambda"));
    CHECK_THROWS_AS(s.resolved("nope"), ConfigError);
}

TEST_CASE("runs write outputs and append manifests") {
    const auto dir = scratch("fig4a");
    RunOptions opt;
    opt.out_dir = dir;
    opt.overrides = {{"t_end", "6000"}};
    auto s = load_scenario("fig4a");
    s.apply_override("t_end", "6000");
    const auto r = run_scenario(s, opt);
    CHECK(r.manifest.passed());
    for (const char* f : {"trajectory_main.csv", "report.txt", "manifest.txt"}) {
        CHECK(std::filesystem::exists(dir / "fig4a" / f));
    }
    CHECK(slurp(dir / "fig4a" / "trajectory_main.csv") == to_csv(*r.runs[0].trajectory));
    const std::string manifest = slurp(dir / "fig4a" / "manifest.txt");
    CHECK(manifest.find("override.t_end=6000\n") != std::string::npos);
    CHECK(manifest.find("config.t_end=6000\n") != std::string::npos);
    CHECK(manifest.find("digest.trajectory_main.csv=sha256:" + sha256_hex(slurp(dir / "fig4a" / "trajectory_main.csv"))) !=
          std::string::npos);
    CHECK(manifest.find("status=pass\n") != std::string::npos);

    run_scenario(s, opt);
    const std::string twice = slurp(dir / "fig4a" / "manifest.txt");
    CHECK(twice == manifest + manifest);
    std::filesystem::remove_all(dir);
}

TEST_CASE("repeated runs are byte identical") {
    for (const char* name : {"fig5d", "fig8d", "fig2d"}) {
        const auto a = run_scenario(load_scenario(name));
        const auto b = run_scenario(load_scenario(name));
        INFO(name);
        CHECK(a.manifest.digests == b.manifest.digests);
        CHECK(a.manifest.to_text() == b.manifest.to_text());
    }
}

TEST_CASE("failed assertions are reported, not thrown") {
    auto s = load_scenario("fig4a");
    s.apply_override("assert.rate.value", "1e-3");
    const auto r = run_scenario(s);
    CHECK_FALSE(r.manifest.passed());
    const auto& a = r.manifest.assertions[1];
    CHECK(a.id == "rate");
    CHECK_FALSE(a.pass);
    REQUIRE(a.actual);
    CHECK(r.manifest.to_text().find("assert.rate=fail") != std::string::npos);
}

TEST_CASE("integration failures become manifest errors") {
    // Strong gain overflows the amplitudes long before t_end.
    const auto s = scenario_from_text("model = effective\nparams.Gamma = -2\nt_end = 1000\n"
                                      "diagnostics.growth = re_a1\n");
    const auto r = run_scenario(s);
    REQUIRE(r.manifest.errors.size() == 1);
    CHECK(r.manifest.errors[0].rfind("main: ", 0) == 0);
    CHECK(r.runs[0].error);
    CHECK_FALSE(r.manifest.passed());
}

TEST_CASE("frozen elimination regression") {
    // The exact and reduced models drift apart secularly; the bound of 2 is
    // crossed at t = 1403 (λ = 0.8κ) and t = 2501.5 (λ = 2κ).
    const auto r = run_scenario(load_scenario("fig3"));
    CHECK(r.run("main")->metric("elimination.gamma")->number.value() == Catch::Approx(2.802971605669717e-06).epsilon(1e-12));
    CHECK(r.run("before")->metric("elimination.breach_time")->number.value() == 1403.0);
    CHECK(r.run("main")->metric("elimination.breach_time")->number.value() == 2501.5);
    CHECK(r.run("main")->metric("elimination.max_error")->number.value() == Catch::Approx(4.0).epsilon(0.01));
    CHECK(r.run("before")->metric("elimination.max_error")->number.value() == Catch::Approx(33.92).epsilon(0.01));
}

TEST_CASE("spectral presets") {
    const auto r = run_scenario(load_scenario("fig8a"));
    CHECK(r.manifest.passed());
    CHECK(r.runs[0].spectrum_csv.rfind("sweep_param,k,re_E,im_E\n", 0) == 0);
    const auto c = run_scenario(load_scenario("fig2c"));
    CHECK(c.run("main")->metric("ep.locations")->text == "0.04,0.058");
    CHECK(c.run("main")->metric("ep.candidates")->number.value() == 3.0);
}

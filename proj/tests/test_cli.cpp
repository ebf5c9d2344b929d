#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

struct Run {
    int code = -1;
    std::string out;
};

// Runs the CLI with stderr folded into stdout when `merge` is set.
Run nhsim(const std::string& args, bool merge = false) {
    const std::string cmd = std::string(NHSIM_CLI_PATH) + " " + args + (merge ? " 2>&1" : " 2>/dev/null");
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("nhsim_cli_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST_CASE("list-scenarios") {
    const auto r = nhsim("list-scenarios");
    CHECK(r.code == 0);
    CHECK(r.out.find("fig4a\teffective\t") != std::string::npos);
    CHECK(count_lines(r.out) == 20);
}

TEST_CASE("spectrum sweeps write sweep_param,k,re_E,im_E rows") {
    auto r = nhsim("spectrum --family two-mode --omega 1 --epsilon 0.01 --sweep lambda:0:0.05:500");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("sweep_param,k,re_E,im_E\n0,0,1,0\n", 0) == 0);
    CHECK(count_lines(r.out) == 1 + 2 * 500);

    r = nhsim("spectrum --family chain --n 6 --epsilons 0.05,0.06,0.04,0.07,0.01 --lambda 0.03");
    CHECK(r.code == 0);
    CHECK(count_lines(r.out) == 7);

    r = nhsim("spectrum --family gain-loss --kappa 0.01 --sweep mu:0:0.05:500", true);
    CHECK(r.code == 0);
    CHECK(r.out.find("exceptional_point mu=0.005") != std::string::npos);
}

TEST_CASE("spectrum parameter errors exit 2") {
    CHECK(nhsim("spectrum --family two-mode --lambda -1").code == 2);
    CHECK(nhsim("spectrum --family lattice").code == 2);
    CHECK(nhsim("spectrum --family chain --n 4 --epsilons 0.1").code == 2);
    CHECK(nhsim("spectrum --family two-mode --sweep lambda:0:1").code == 2);
    const auto r = nhsim("spectrum --family two-mode --kappa -1 --sweep kappa:0:1:3", true);
    CHECK(r.code == 2);
    CHECK(r.out.find("nhsim: invalid parameter") != std::string::npos);
}

TEST_CASE("evolve writes outputs and honours overrides") {
    const auto dir = scratch("evolve");
    auto r = nhsim("evolve --scenario fig4a --out " + dir.string());
    CHECK(r.code == 0);
    CHECK(r.out.rfind("# scenario=fig4a\n", 0) == 0);
    CHECK(std::filesystem::exists(dir / "fig4a" / "manifest.txt"));

    r = nhsim("evolve --scenario fig4b --format kv-report --out " + dir.string());
    CHECK(r.code == 0);
    CHECK(r.out.find("metric.classification=bounded-periodic") != std::string::npos);
    CHECK(r.out.find("metric.beat.splitting=") != std::string::npos);

    r = nhsim("evolve --scenario fig4a --set t_end=1500 --format kv-report --out " + dir.string());
    CHECK(r.out.find("override.t_end=1500\n") != std::string::npos);
    CHECK(r.out.find("config.t_end=1500\n") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("evolve exit codes") {
    const auto dir = scratch("codes");
    // Elimination bounds are not met by the full model (see the fig3 regression test).
    auto r = nhsim("evolve --scenario fig3 --set params.lambda=0.003 --format kv-report --out " + dir.string());
    CHECK(r.code == 1);
    CHECK(r.out.find("override.params.lambda=0.003") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "fig3" / "trajectory_main.csv"));

    CHECK(nhsim("evolve --scenario fig4a --set params.lamda=1 --out " + dir.string()).code == 2);
    CHECK(nhsim("evolve --scenario nosuch --out " + dir.string()).code == 2);
    CHECK(nhsim("evolve --out " + dir.string()).code == 2);

    const auto cfg = dir / "bad.cfg";
    std::ofstream(cfg) << "model = effective\nparams.kappa = -0.1\n";
    r = nhsim("evolve --config " + cfg.string() + " --out " + dir.string(), true);
    CHECK(r.code == 2);
    CHECK(r.out.find("line 2: params.kappa: out of range") != std::string::npos);

    const auto good = dir / "mine.cfg";
    std::ofstream(good) << "model = effective\nparams.lambda = 0.003\nt_end = 200\n";
    r = nhsim("evolve --config " + good.string() + " --out " + dir.string());
    CHECK(r.code == 0);
    CHECK(std::filesystem::exists(dir / "mine" / "trajectory_main.csv"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("sweep, pearson and chaos subcommands") {
    auto r = nhsim("sweep --scenario fig4a --vary params.lambda:0.0006:0.0012:3 --metric growth.rate --metric classification");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("params.lambda,growth.rate,classification\n6e-04,", 0) == 0);
    CHECK(count_lines(r.out) == 4);

    r = nhsim("pearson --scenario fig5d --variant before");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("t,C\n0,", 0) == 0);

    r = nhsim("pearson --scenario fig4a --window 20 --set t_end=200");
    CHECK(r.code == 0);
    CHECK(r.out.find("\n10,") != std::string::npos);

    r = nhsim("chaos --scenario fig8d");
    CHECK(r.code == 0);
    CHECK(r.out.find("metric.classification=") != std::string::npos);
    CHECK(r.out.find("metric.lle=") != std::string::npos);
    CHECK(nhsim("chaos --scenario fig4a").code == 2);
}

TEST_CASE("validate") {
    auto r = nhsim("validate --suite spectra");
    CHECK(r.code == 0);
    CHECK(r.out.find("criterion=1 ") != std::string::npos);
    CHECK(r.out.find("criterion=3 ") != std::string::npos);
    CHECK(r.out.find("suite=spectra status=pass") != std::string::npos);
    CHECK(nhsim("validate --suite bogus").code == 2);
}

#include <catch_amalgamated.hpp>

#include "nhsim/error.hpp"
#include "nhsim/modal.hpp"
#include "support.hpp"

using namespace nhsim;
using namespace nhsim::dynamics;

namespace {

// scipy.linalg.expm(-1j * H * t) @ (100, 100), H = [[-1, iλ], [-i(λ-κ), -1]], κ = 0.0015.
struct Frozen {
    double lambda, t;
    cplx a1, a2;
};

const Frozen kFrozen[] = {
    {0.0012, 100.0, {96.74118747758227, -56.80777145564071}, {88.97566026683685, -52.247745818961306}},
    {0.0012, 1000.0, {138.27621413013634, 203.31085779464092}, {84.57011611327701, 124.34548457192275}},
    {0.0012, 5000.0, {465.60467315473494, -2974.116060077299}, {233.18736090294198, -1489.5174276703663}},
    {0.003, 100.0, {109.97491518050474, -64.57880051219492}, {71.46094442472152, -41.962860956452154}},
    {0.003, 1000.0, {38.361582651478145, 56.40396162345443}, {-63.31072476271751, -93.08728793366829}},
    {0.003, 5000.0, {-26.10506656341502, 166.74982488861667}, {4.254114234101492, -27.173759617484457}},
};

double rel(cplx got, cplx want) { return std::abs(got - want) / std::abs(want); }

} // namespace

TEST_CASE("closed form reproduces the matrix exponential") {
    for (const auto& f : kFrozen) {
        const ModalSolution s(100.0, 100.0, f.lambda, 0.0015, 1.0);
        const auto [a1, a2] = s(f.t);
        INFO("lambda=" << f.lambda << " t=" << f.t);
        CHECK(rel(a1, f.a1) < 1e-9);
        CHECK(rel(a2, f.a2) < 1e-9);
        const auto [e1, e2] = s.expand(f.t);
        CHECK(rel(e1, f.a1) < 1e-9);
        CHECK(rel(e2, f.a2) < 1e-9);
    }
}

TEST_CASE("closed form is exact at t = 0") {
    const ModalSolution s(cplx(3, -1), cplx(0.5, 2), 0.003, 0.0015, 1.0);
    const auto [a1, a2] = s(0.0);
    CHECK(a1 == cplx(3, -1));
    CHECK(a2 == cplx(0.5, 2));
}

TEST_CASE("property: modal expansion equals the closed form") {
    Gen gen(0x5eed0201);
    int n = 0;
    while (n < 300) {
        const double kappa = gen.log_uniform(1e-4, 1e-2);
        const double ratio = gen.uniform(0.05, 3.0);
        if (std::abs(ratio - 1.0) < 0.01) continue;
        const cplx c1(gen.uniform(-5, 5), gen.uniform(-5, 5)), c2(gen.uniform(-5, 5), gen.uniform(-5, 5));
        const ModalSolution s(c1, c2, ratio * kappa, kappa, gen.uniform(-2, 2));
        const double t = gen.uniform(0.0, 1.0 / kappa);
        const auto [a1, a2] = s(t);
        const auto [e1, e2] = s.expand(t);
        const double scale = std::hypot(std::abs(a1), std::abs(a2));
        REQUIRE(std::hypot(std::abs(a1 - e1), std::abs(a2 - e2)) < 1e-9 * scale);
        ++n;
    }
}

TEST_CASE("guard band around the exceptional point") {
    CHECK_THROWS_AS(ModalSolution(1.0, 1.0, 0.0015, 0.0015, 1.0), ExceptionalPointError);
    CHECK_THROWS_AS(ModalSolution(1.0, 1.0, 0.0015 * (1.0 + 5e-4), 0.0015, 1.0), ExceptionalPointError);
    CHECK_NOTHROW(ModalSolution(1.0, 1.0, 0.0015 * (1.0 + 2e-3), 0.0015, 1.0));
}

TEST_CASE("analytic trajectory sampling") {
    const std::vector<double> times{0.0, 1.0, 2.5};
    const auto t = analytic_solution(100.0, 100.0, 0.003, 0.0015, 1.0, times);
    CHECK(t.model() == ModelKind::Effective);
    CHECK(t.times() == times);
    CHECK(t.amplitude(0, Mode::A1) == cplx(100.0, 0.0));
}

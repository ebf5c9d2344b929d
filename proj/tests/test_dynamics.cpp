#include <catch_amalgamated.hpp>

#include <sstream>

#include "nhsim/dynamics.hpp"
#include "nhsim/error.hpp"
#include "nhsim/trajectory.hpp"
#include "support.hpp"

using namespace nhsim;
using namespace nhsim::dynamics;
using Catch::Approx;

TEST_CASE("flat layouts") {
    const ExactState s{cplx(1, 2), cplx(3, 4), cplx(5, 6), cplx(7, 8)};
    CHECK(flatten(s) == std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
    CHECK(flatten(EffectiveState{cplx(1, 2), cplx(3, 4)}) == std::vector<double>{1, 2, 3, 4});
    CHECK(flatten(ChaosState{0.5, -0.5, cplx(1, 2), cplx(3, 4)}) == std::vector<double>{0.5, -0.5, 1, 2, 3, 4});
    CHECK(state_width(ModelKind::Exact) == 8);
    CHECK(state_width(ModelKind::Effective) == 4);
    CHECK(state_width(ModelKind::Chaos) == 6);
    CHECK(parse_model_tag("chaos") == ModelKind::Chaos);
    CHECK_THROWS_AS(parse_model_tag("full"), InvalidParameter);
}

TEST_CASE("exact right-hand side, term by term") {
    OptomechParams p;
    p.coupling = {0.015, 0.005};
    const ExactState s{cplx(2, 1), cplx(0.1, -0.2), cplx(-1, 3), cplx(0.3, 0.4)};
    const auto d = exact_rhs(s, p);
    const cplx I(0, 1), gc = std::conj(p.coupling);
    CHECK(std::abs(d[0] - ((-0.00075 + I) * s[0] - I * gc * std::conj(s[1]) + 0.003 * s[2])) < 1e-15);
    CHECK(std::abs(d[1] - ((-0.292 - 1.05 * I) * s[1] - I * gc * std::conj(s[0]))) < 1e-15);
    CHECK(std::abs(d[2] - ((-0.00075 + I) * s[2] - I * gc * std::conj(s[3]) - 0.0015 * s[0])) < 1e-15);
    CHECK(std::abs(d[3] - ((-0.292 - 1.05 * I) * s[3] - I * gc * std::conj(s[2]))) < 1e-15);

    const auto x = flatten(s);
    std::vector<double> dx(8);
    flat_rhs(p, x, dx);
    CHECK(dx == flatten(d));
}

TEST_CASE("effective right-hand side matches i d/dt alpha = H alpha") {
    EffectiveParams p;
    p.dissipation = {0.0, 0.0};
    const EffectiveState s{cplx(1.5, -0.5), cplx(0.25, 2.0)};
    const auto d = effective_rhs(s, p);
    const cplx I(0, 1);
    // H = [[-Δ, iλ], [-i(λ-κ), -Δ]]
    CHECK(std::abs(I * d[0] - (-1.0 * s[0] + I * 0.003 * s[1])) < 1e-15);
    CHECK(std::abs(I * d[1] - (-I * 0.0015 * s[0] - 1.0 * s[1])) < 1e-15);
}

TEST_CASE("adiabatic elimination of the caption parameters") {
    // Oracle: 30-digit evaluation of κ - 4γ_m|G|²/(4(Δ-ω_m)²+γ_m²) and its detuning partner.
    const auto r = derive_effective_params(OptomechParams{});
    CHECK(r.params.dissipation[0] == Approx(2.80297160566975e-06).epsilon(1e-12));
    CHECK(r.params.dissipation[1] == r.params.dissipation[0]);
    CHECK(r.params.delta_eff[0] == Approx(1.00012818467708856).epsilon(1e-14));
    CHECK(r.params.lambda == 0.003);
    CHECK(r.params.kappa == 0.0015);
    CHECK(r.warnings.empty());

    OptomechParams close;
    close.omega_m = 1.01;
    close.gamma_m = 0.002;
    const auto w = derive_effective_params(close);
    CHECK(w.warnings.size() == 3);

    OptomechParams split;
    split.delta = {1.0, 1.2};
    const auto u = derive_effective_params(split);
    CHECK(u.params.dissipation[0] != u.params.dissipation[1]);

    const double g = balanced_gain_coupling(OptomechParams{});
    OptomechParams balanced;
    balanced.coupling = g;
    CHECK(derive_effective_params(balanced).params.dissipation[0] == Approx(0.0).margin(1e-18));
}

TEST_CASE("cavity-pair spectrum against a dense oracle") {
    // numpy eig of the linear cavity-pair matrix, E = i μ.
    ChaosParams p;
    auto e = chaos_subsystem_spectrum(p).energies;
    CHECK(e[0].real() == Approx(-1.0).epsilon(1e-14));
    CHECK(e[0].imag() == Approx(0.06180339887498949).epsilon(1e-13));
    CHECK(e[1].imag() == Approx(-0.16180339887498948).epsilon(1e-13));

    p.kappa_ceff = 0.2;
    e = chaos_subsystem_spectrum(p).energies;
    CHECK(std::abs(e[0].imag()) < 1e-12);
    CHECK(e[1].imag() == Approx(-0.2).epsilon(1e-13));

    p = {};
    p.asymmetric = false;
    e = chaos_subsystem_spectrum(p).energies;
    CHECK(e[0].imag() == Approx(-0.05).epsilon(1e-12));
    CHECK(e[1].imag() == Approx(-0.05).epsilon(1e-12));
    CHECK(e[1].real() == Approx(-1.0866025403784436).epsilon(1e-13));
}

TEST_CASE("parameter validation") {
    OptomechParams p;
    p.retardation = 1.0;
    CHECK_THROWS_AS(validate(p), InvalidParameter);
    p = {};
    p.kappa = -1.0;
    CHECK_THROWS_AS(validate(p), InvalidParameter);
    ChaosParams c;
    c.lambda_c = -0.1;
    CHECK_THROWS_AS(validate(c), InvalidParameter);
    EffectiveParams e;
    e.lambda = std::nan("");
    CHECK_THROWS_AS(validate(e), InvalidParameter);
}

TEST_CASE("beta initial state follows the ratio") {
    const auto s = exact_initial_state(cplx(100, 0), cplx(100, 0), 20.0);
    CHECK(s[1] == cplx(5, 0));
    CHECK(s[3] == cplx(5, 0));
}

TEST_CASE("effective integration agrees with a matrix exponential") {
    // scipy expm of the generator at t = 200 with Γ1 = 0.001, Γ2 = 0.002, Δ = (1, 1.2).
    EffectiveParams p;
    p.delta_eff = {1.0, 1.2};
    p.dissipation = {0.001, 0.002};
    ode::IntegratorConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;
    const auto x0 = flatten(EffectiveState{cplx(3, 1), cplx(-2, 0.5)});
    const auto t = integrate(p, x0, 200.0, cfg);
    const auto a1 = t.amplitude(t.size() - 1, Mode::A1);
    const auto a2 = t.amplitude(t.size() - 1, Mode::A2);
    CHECK(std::abs(a1 - cplx(2.055408321001212, -1.932050237670245)) < 1e-8);
    CHECK(std::abs(a2 - cplx(-0.9480645755547324, -1.4341302780336458)) < 1e-8);
}

TEST_CASE("trajectory accessors and CSV round trip") {
    ode::IntegratorConfig cfg;
    cfg.output_stride = 0.25;
    const auto traj = integrate(ChaosParams{}, flatten(ChaosState{0.0, 0.0, cplx(10, 0), cplx(100, 0)}), 5.0, cfg);
    CHECK(traj.size() == 21);
    CHECK(traj.uniform_step() == Approx(0.25));
    CHECK(traj.value(0, Field::AbsA2) == 100.0);
    CHECK(traj.has(Field::Q));
    CHECK_FALSE(traj.has(Field::ReB1));
    CHECK_THROWS_AS(traj.value(0, Field::ReB1), InvalidParameter);

    const std::string csv = to_csv(traj);
    CHECK(csv.find("t,re_a1,im_a1,re_a2,im_a2,q,p\n") != std::string::npos);
    std::istringstream in(csv);
    const auto back = read_csv(in);
    CHECK(back.model() == ModelKind::Chaos);
    CHECK(back.times() == traj.times());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        for (auto f : {Field::ReA1, Field::ImA2, Field::Q, Field::P}) CHECK(back.value(i, f) == traj.value(i, f));
    }
    CHECK(to_csv(back) == csv);
}

TEST_CASE("trajectory construction errors") {
    CHECK_THROWS_AS(Trajectory(ModelKind::Effective, {0.0, 1.0}, {1, 2, 3, 4}), InvalidParameter);
    CHECK_THROWS_AS(Trajectory(ModelKind::Effective, {1.0, 0.0}, std::vector<double>(8, 0.0)), InvalidParameter);
    std::istringstream bad("t,x,y\n0,1,2\n");
    CHECK_THROWS_AS(read_csv(bad), ConfigError);
}

TEST_CASE("property: number formatting round-trips exactly") {
    Gen gen(0x5eed0101);
    for (int i = 0; i < 2000; ++i) {
        const double v = gen.uniform(-1.0, 1.0) * std::pow(10.0, gen.integer(-20, 20));
        REQUIRE(std::stod(format_number(v)) == v);
    }
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(0.5) == "0.5");
}

#include <catch_amalgamated.hpp>

#include <cmath>

#include "nhsim/analysis.hpp"
#include "nhsim/error.hpp"
#include "support.hpp"

using namespace nhsim;
using namespace nhsim::analysis;
using Catch::Approx;

namespace {

std::vector<double> grid(double t_end, double dt) {
    std::vector<double> t;
    for (std::size_t i = 0; static_cast<double>(i) * dt <= t_end + 1e-12; ++i) t.push_back(static_cast<double>(i) * dt);
    return t;
}

template <class F>
std::vector<double> sample(const std::vector<double>& t, F f) {
    std::vector<double> out;
    for (double x : t) out.push_back(f(x));
    return out;
}

Trajectory effective_run(double lambda, double gamma = 0.0, double t_end = 5000.0) {
    dynamics::EffectiveParams p;
    p.lambda = lambda;
    p.dissipation = {gamma, gamma};
    return integrate(p, dynamics::flatten(dynamics::EffectiveState{cplx(100, 0), cplx(100, 0)}), t_end);
}

} // namespace

TEST_CASE("Pearson factor of identical, opposite and constant signals") {
    const auto t = grid(100.0, 0.5);
    const auto s = sample(t, [](double x) { return std::sin(x); });
    const auto n = sample(t, [](double x) { return -std::sin(x); });
    const auto c = sample(t, [](double) { return 3.0; });
    for (const auto& p : pearson_factor(t, s, s, {})) CHECK(*p.value == Approx(1.0).epsilon(1e-12));
    for (const auto& p : pearson_factor(t, s, n, {})) CHECK(*p.value == Approx(-1.0).epsilon(1e-12));
    const auto undefined = pearson_factor(t, s, c, {});
    CHECK_FALSE(undefined.front().value.has_value());
    CHECK(pearson_csv(undefined).find(",nan\n") != std::string::npos);
}

TEST_CASE("Pearson windows advance by half a window") {
    const auto t = grid(100.0, 0.5);
    const auto s = sample(t, [](double x) { return std::sin(x); });
    const auto c = pearson_factor(t, s, s, {});
    REQUIRE(c.size() == 19);
    CHECK(c[0].t == 0.0);
    CHECK(c[1].t == 5.0);
    CHECK(c.back().t == 90.0);
    PearsonConfig tight;
    tight.window = 3.0;
    CHECK_THROWS_AS(pearson_factor(t, s, s, tight), DiagnosticError);
}

TEST_CASE("property: Pearson factor is affine invariant") {
    Gen gen(0x5eed0301);
    const auto t = grid(200.0, 0.5);
    for (int i = 0; i < 200; ++i) {
        const double w1 = gen.uniform(0.2, 2.0), w2 = gen.uniform(0.2, 2.0), ph = gen.uniform(0, 6.28);
        const auto f = sample(t, [&](double x) { return std::sin(w1 * x) + 0.3 * std::cos(w2 * x + ph); });
        const auto g = sample(t, [&](double x) { return std::cos(w2 * x) - 0.5 * std::sin(w1 * x); });
        const double a = gen.uniform(0.1, 10.0) * (gen.unit() < 0.5 ? -1.0 : 1.0), b = gen.uniform(-50, 50);
        std::vector<double> fa;
        for (double v : f) fa.push_back(a * v + b);
        const auto base = pearson_factor(t, f, g, {});
        const auto moved = pearson_factor(t, fa, g, {});
        for (std::size_t k = 0; k < base.size(); ++k) {
            REQUIRE(*moved[k].value == Approx(std::copysign(1.0, a) * *base[k].value).margin(1e-9));
        }
    }
}

TEST_CASE("envelope peaks and growth fit") {
    const auto t = grid(4000.0, 0.5);
    const auto x = sample(t, [](double s) { return std::exp(0.001 * s) * std::cos(s); });
    const auto peaks = envelope_peaks(t, x);
    REQUIRE(peaks.size() > 1000);
    const auto fit = fit_growth(peaks);
    CHECK(fit.rate == Approx(0.001).epsilon(1e-3));
    CHECK(fit.significant());

    const auto flat = sample(t, [](double s) { return std::cos(s) * (1.0 + 0.5 * std::cos(0.004 * s)); });
    const auto bounded = fit_growth(envelope_peaks(t, flat));
    CHECK_FALSE(bounded.significant());
}

TEST_CASE("growth rate of the reduced model below the exceptional point") {
    const auto traj = effective_run(0.0012);
    const auto fit = envelope_growth_rate(traj, Field::ReA1);
    const double oracle = std::sqrt(0.0012 * 0.0003);
    CHECK(fit.rate == Approx(oracle).epsilon(0.02));
}

TEST_CASE("beat frequency of a synthetic two-tone signal") {
    const auto t = grid(5000.0, 0.5);
    std::vector<cplx> z;
    for (double s : t) z.push_back(std::exp(cplx(0, -0.998 * s)) + 0.6 * std::exp(cplx(0, -1.002 * s)));
    const auto b = beat_frequency(t, z);
    CHECK(b.splitting == Approx(0.004).epsilon(1e-6));
    CHECK(b.relative_residual < 1e-6);

    std::vector<cplx> single;
    for (double s : t) single.push_back(std::exp(cplx(0, -s)));
    CHECK_THROWS_AS(beat_frequency(t, single), DiagnosticError);
}

TEST_CASE("beat splitting past the exceptional point and rejection below it") {
    const auto above = beat_frequency(effective_run(0.003), Mode::A1);
    CHECK(above.splitting == Approx(2.0 * std::sqrt(0.003 * 0.0015)).epsilon(0.01));
    // λ = κ/2 is an amplifying point with a single real frequency.
    CHECK_THROWS_AS(beat_frequency(effective_run(0.00075), Mode::A1), DiagnosticError);
}

TEST_CASE("dip of the weaker mode with imbalanced dissipation") {
    const auto d = envelope_dip(effective_run(0.0012, 0.001), Field::AbsA2);
    REQUIRE(d.time);
    CHECK(*d.time > 0.0);
    CHECK(d.below_initial());
    CHECK(d.initial == 100.0);
}

TEST_CASE("Lyapunov exponent of a linear system") {
    // x' = A x with eigenvalues 0.05 ± i and -0.2.
    auto rhs = [](std::span<const double> x, std::span<double> d) {
        d[0] = 0.05 * x[0] + x[1];
        d[1] = -x[0] + 0.05 * x[1];
        d[2] = -0.2 * x[2];
    };
    LyapunovOptions opt;
    opt.horizon = 400.0;
    const auto est = lyapunov_exponent(rhs, {1.0, 0.0, 1.0}, 0, opt);
    CHECK(est.lle == Approx(0.05).epsilon(0.1));
    CHECK(est.segments == 40);
    CHECK(est.significance() > 3.0);

    auto contracting = [](std::span<const double> x, std::span<double> d) {
        d[0] = -0.1 * x[0] + x[1];
        d[1] = -x[0] - 0.1 * x[1];
    };
    const auto neg = lyapunov_exponent(contracting, {1.0, 0.0}, 0, opt);
    CHECK(neg.lle == Approx(-0.1).epsilon(0.1));
}

TEST_CASE("classification rules") {
    GrowthFit grow{0.001, 0.0, 1e-6, 100};
    GrowthFit flat{1e-6, 0.0, 1e-5, 100};
    LyapunovEstimate chaotic{0.05, 0.005, 300, {}};
    LyapunovEstimate quiet{0.0001, 0.001, 300, {}};
    LyapunovEstimate contracting{-0.05, 0.005, 300, {}};
    CHECK(classify({grow, std::nullopt}).regime == Regime::Amplifying);
    CHECK(classify({flat, std::nullopt}).regime == Regime::BoundedPeriodic);
    CHECK(classify({flat, chaotic}).regime == Regime::Chaotic);
    CHECK(classify({flat, quiet}).regime == Regime::BoundedPeriodic);
    CHECK(classify({grow, contracting}).regime == Regime::Inconclusive);
    CHECK(classify({std::nullopt, chaotic}).regime == Regime::Chaotic);
    CHECK(regime_name(Regime::BoundedPeriodic) == "bounded-periodic");
}

TEST_CASE("elimination error and divergence of identical runs") {
    const auto a = effective_run(0.003, 0.0, 100.0);
    const auto e = elimination_error(a, a);
    CHECK(e.overall_max() == 0.0);
    CHECK_FALSE(e.first_exceeding(1e-12));
    const auto d = trajectory_divergence(a, a);
    CHECK(d.max_distance == 0.0);
    CHECK_FALSE(d.time);
}

#include <catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>
#include <algorithm>

#include "nhsim/error.hpp"
#include "nhsim/spectra.hpp"
#include "support.hpp"

using namespace nhsim;
using namespace nhsim::spectra;
using Catch::Approx;

namespace {

// Greedy matching distance between two eigenvalue sets.
double set_distance(std::vector<cplx> a, std::vector<cplx> b) {
    double worst = 0.0;
    for (const auto& x : a) {
        auto it = std::min_element(b.begin(), b.end(), [&](cplx p, cplx q) { return std::abs(p - x) < std::abs(q - x); });
        worst = std::max(worst, std::abs(*it - x));
        b.erase(it);
    }
    return worst;
}

std::vector<cplx> eigen_values(const Eigen::MatrixXcd& m) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> s(m, false);
    return {s.eigenvalues().data(), s.eigenvalues().data() + s.eigenvalues().size()};
}

} // namespace

TEST_CASE("two-mode closed form") {
    auto r = two_mode_spectrum({1.0, 0.02, 0.01});
    CHECK(r.energies[0].real() == Approx(1.0 + std::sqrt(2e-4)).epsilon(1e-14));
    CHECK(r.energies[1].real() == Approx(1.0 - std::sqrt(2e-4)).epsilon(1e-14));
    CHECK(r.energies[0].imag() == 0.0);

    r = two_mode_spectrum({1.0, 0.005, 0.01});
    CHECK(r.energies[0].real() == 1.0);
    CHECK(r.energies[0].imag() == Approx(0.005).epsilon(1e-13));
    CHECK(r.energies[1].imag() == Approx(-0.005).epsilon(1e-13));

    r = two_mode_spectrum({1.0, 0.01, 0.01});
    CHECK(r.energies[0] == r.energies[1]);
}

TEST_CASE("gain-loss closed form") {
    auto r = gain_loss_spectrum({1.0, 0.003, 0.01});
    CHECK(r.energies[0].imag() == Approx(0.004).epsilon(1e-13));
    CHECK(r.energies[1].imag() == Approx(-0.004).epsilon(1e-13));
    r = gain_loss_spectrum({1.0, 0.013, 0.01});
    CHECK(r.energies[0].real() == Approx(1.012).epsilon(1e-14));
    CHECK(r.energies[0].imag() == 0.0);
}

TEST_CASE("energies are sorted by imaginary then real part") {
    std::vector<cplx> e{{1.0, 0.0}, {2.0, 1.0}, {3.0, 0.0}, {0.0, -1.0}};
    sort_energies(e);
    CHECK(e[0] == cplx(2.0, 1.0));
    CHECK(e[1] == cplx(3.0, 0.0));
    CHECK(e[2] == cplx(1.0, 0.0));
    CHECK(e[3] == cplx(0.0, -1.0));
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(two_mode_spectrum({1.0, -0.1, 0.0}), InvalidParameter);
    CHECK_THROWS_AS(gain_loss_spectrum({1.0, 0.1, -0.01}), InvalidParameter);
    CHECK_THROWS_AS(ChainParams::make(1.0, 0.1, {}).validate(), InvalidParameter);
    CHECK_THROWS_AS(with_parameter(TwoModeParams{}, "mu", 0.1), InvalidParameter);
    CHECK_THROWS_AS(parse_sweep("lambda:0:1"), InvalidParameter);
    CHECK_THROWS_AS(parse_sweep("lambda:1:0:10").validate(), InvalidParameter);
    CHECK_THROWS_AS(parse_sweep("lambda:0:1:1").validate(), InvalidParameter);
}

TEST_CASE("sweep endpoints are inclusive") {
    const auto s = parse_sweep("lambda:0:0.05:501");
    CHECK(s.parameter == "lambda");
    CHECK(s.count == 501);
    CHECK(s.at(0) == 0.0);
    CHECK(s.at(500) == 0.05);
    CHECK(s.at(200) == Approx(0.02).epsilon(1e-15));
}

TEST_CASE("property: two-mode closed form agrees with a dense eigensolver") {
    Gen gen(0x5eed0001);
    for (int i = 0; i < 10000; ++i) {
        const TwoModeParams p{gen.uniform(-2.0, 2.0), gen.uniform(0.0, 0.1), gen.uniform(-0.1, 0.1)};
        const auto closed = two_mode_spectrum(p).energies;
        const auto dense = eigen_values(two_mode_hamiltonian(p));
        INFO("omega=" << p.omega << " lambda=" << p.lambda << " epsilon=" << p.epsilon);
        REQUIRE(set_distance(closed, dense) < 5e-8);
    }
}

TEST_CASE("property: gain-loss closed form agrees with a dense eigensolver") {
    Gen gen(0x5eed0002);
    for (int i = 0; i < 2000; ++i) {
        const GainLossParams p{gen.uniform(-2.0, 2.0), gen.uniform(-0.1, 0.1), gen.uniform(0.0, 0.1)};
        REQUIRE(set_distance(gain_loss_spectrum(p).energies, eigen_values(gain_loss_hamiltonian(p))) < 5e-8);
    }
}

TEST_CASE("property: chain spectrum is mirror symmetric and trace preserving") {
    Gen gen(0x5eed0003);
    for (int i = 0; i < 2000; ++i) {
        const int n = gen.integer(2, 9);
        std::vector<double> eps(static_cast<std::size_t>(n - 1));
        for (auto& e : eps) e = gen.uniform(-0.1, 0.1);
        const auto p = ChainParams::make(gen.uniform(-1.0, 1.0), gen.uniform(0.0, 0.1), eps);
        const auto c = centered_spectrum(p);
        REQUIRE(c.size() == static_cast<std::size_t>(n));
        std::vector<cplx> neg;
        for (const auto& x : c) neg.push_back(-x);
        REQUIRE(set_distance(c, neg) <= 1e-12);
        cplx trace = 0.0;
        for (const auto& e : chain_spectrum(p).energies) trace += e;
        REQUIRE(std::abs(trace - static_cast<double>(n) * p.omega) < 1e-12);
    }
}

TEST_CASE("property: Hermitian limit gives a real chain spectrum") {
    Gen gen(0x5eed0004);
    for (int i = 0; i < 500; ++i) {
        const int n = gen.integer(2, 10);
        const double lambda = gen.uniform(0.0, 0.1);
        const auto p = ChainParams::make(1.0, lambda, std::vector<double>(static_cast<std::size_t>(n - 1), 0.0));
        const auto e = chain_spectrum(p).energies;
        std::vector<cplx> exact;
        for (int k = 1; k <= n; ++k) exact.emplace_back(1.0 + 2.0 * lambda * std::cos(k * M_PI / (n + 1)), 0.0);
        for (const auto& x : e) REQUIRE(std::abs(x.imag()) < 1e-14);
        REQUIRE(set_distance(e, exact) < 1e-13);
    }
}

TEST_CASE("property: chain spectrum matches the original non-symmetric matrix away from coalescence") {
    Gen gen(0x5eed0005);
    int tested = 0;
    while (tested < 500) {
        const int n = gen.integer(2, 8);
        const double lambda = gen.uniform(0.01, 0.1);
        std::vector<double> eps(static_cast<std::size_t>(n - 1));
        bool near = false;
        for (auto& e : eps) {
            e = gen.uniform(-0.1, 0.1);
            near = near || std::abs(lambda - e) < 0.3 * lambda;
        }
        if (near) continue;
        const auto p = ChainParams::make(1.0, lambda, eps);
        const auto e = chain_spectrum(p).energies;
        const auto dense = eigen_values(build_chain_hamiltonian(p));
        // Coalescences inside the sweep make both solves ill-conditioned; skip those draws.
        if (min_eigenvalue_gap(dense) < 1e-3 * lambda) continue;
        REQUIRE(set_distance(e, dense) < 1e-10);
        ++tested;
    }
}

TEST_CASE("chain eigenvectors satisfy H v = E v") {
    const auto p = ChainParams::make(1.0, 0.08, {0.05, 0.06, 0.04});
    const auto r = chain_spectrum(p, true);
    REQUIRE(r.eigenvectors);
    const auto h = build_chain_hamiltonian(p);
    for (std::size_t k = 0; k < r.energies.size(); ++k) {
        const auto& v = (*r.eigenvectors)[k];
        CHECK((h * v - r.energies[k] * v).norm() < 1e-12);
    }
}

TEST_CASE("exceptional points of the two-mode and gain-loss families") {
    auto eps = find_exceptional_points(TwoModeParams{1.0, 0.0, 0.01}, parse_sweep("lambda:0:0.05:501"));
    REQUIRE(count_converged(eps) == 1);
    CHECK(eps[0].location == Approx(0.01).margin(1e-12));

    eps = find_exceptional_points(TwoModeParams{1.0, 0.02, 0.0}, parse_sweep("epsilon:0:0.05:501"));
    REQUIRE(count_converged(eps) == 1);
    CHECK(eps[0].location == Approx(0.02).margin(1e-12));

    // Off-grid EP exercises the bisection.
    eps = find_exceptional_points(TwoModeParams{1.0, 0.0, 0.0123456}, parse_sweep("lambda:0:0.05:97"));
    REQUIRE(count_converged(eps) == 1);
    CHECK(eps[0].location == Approx(0.0123456).margin(1e-9));
    CHECK(eps[0].gap < 1e-8);

    eps = find_exceptional_points(GainLossParams{1.0, 0.0, 0.01}, parse_sweep("mu:0:0.05:333"));
    REQUIRE(count_converged(eps) == 1);
    CHECK(eps[0].location == Approx(0.005).margin(1e-9));

    eps = find_exceptional_points(TwoModeParams{1.0, 0.0, 0.01}, parse_sweep("lambda:0:0.05:501"), {1e-8, 1e-10, 1e-4, true});
    REQUIRE(eps.size() == 1);
    CHECK(eps[0].location == 0.01);
}

TEST_CASE("chain exceptional points match discriminant roots") {
    // Real roots in (0, 0.1) of the discriminant of det(E - H) in λ, from exact
    // symbolic factorisation. Roots of multiplicity > 2 in E are fourth-order
    // coalescences that floating point cannot resolve to the gap tolerance
    // and may come back as unconverged candidates.
    struct Case {
        std::vector<double> eps;
        std::vector<double> oracle;
    };
    const std::vector<Case> cases{
        {{0.05, 0.05, 0.05}, {0.05}},
        {{0.05, 0.05, 0.04}, {0.04, 0.05}},
        {{0.05, 0.06, 0.04}, {0.04, 0.05, 0.058}},
        {{0.05, 0.06, 0.04, 0.07, 0.01}, {0.01, 0.04, 0.05, 0.067880467920287}},
    };
    for (const auto& c : cases) {
        const auto eps = find_exceptional_points(ChainParams::make(1.0, 0.0, c.eps), parse_sweep("lambda:0:0.1:1001"));
        for (const auto& ep : eps) {
            const double tol = ep.converged ? 1e-8 : 1e-6;
            const bool known = std::any_of(c.oracle.begin(), c.oracle.end(),
                                           [&](double x) { return std::abs(x - ep.location) < tol; });
            INFO("EP at " << ep.location << " gap " << ep.gap);
            CHECK(known);
        }
        for (const double x : c.oracle) {
            const bool seen = std::any_of(eps.begin(), eps.end(), [&](const auto& ep) { return std::abs(x - ep.location) < 1e-6; });
            INFO("oracle EP at " << x);
            CHECK(seen);
        }
    }
}

TEST_CASE("biorthogonal basis algebra") {
    const auto b = biorthogonal_basis(0.003, 0.0015, 1.0);
    CHECK(b.energies[0].real() == Approx(-1.0 + std::sqrt(0.003 * 0.0015)).epsilon(1e-14));
    CHECK(b.energies[1].real() == Approx(-1.0 - std::sqrt(0.003 * 0.0015)).epsilon(1e-14));
    CHECK(std::abs(b.zeta - std::sqrt(2.0)) < 1e-14);
    const Eigen::Matrix2cd h = reduced_hamiltonian(0.003, 0.0015, 1.0);
    for (int i = 0; i < 2; ++i) CHECK((h * b.phi[i] - b.energies[i] * b.phi[i]).norm() < 1e-15);
    for (int i = 0; i < 2; ++i) CHECK((b.psi[i] * h - b.energies[i] * b.psi[i]).norm() < 1e-15);

    const auto amp = biorthogonal_basis(0.0012, 0.0015, 1.0);
    CHECK(amp.energies[0].imag() == Approx(std::sqrt(0.0012 * 0.0003)).epsilon(1e-13));

    CHECK_THROWS_AS(biorthogonal_basis(0.0015, 0.0015, 1.0), ExceptionalPointError);
    CHECK_THROWS_AS(biorthogonal_basis(0.0, 0.0015, 1.0), ExceptionalPointError);
}

TEST_CASE("property: biorthogonality and completeness over random draws") {
    Gen gen(0x5eed0006);
    int draws = 0;
    while (draws < 1000) {
        const double kappa = gen.log_uniform(1e-4, 1e-1);
        const double ratio = gen.uniform(0.01, 3.0);
        if (std::abs(ratio - 1.0) < 1e-3) continue;
        const auto b = biorthogonal_basis(ratio * kappa, kappa, gen.uniform(-2.0, 2.0));
        REQUIRE(b.biorthogonality_defect() < 1e-12);
        REQUIRE(b.completeness_defect() < 1e-12);
        ++draws;
    }
}

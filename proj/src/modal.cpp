#include "nhsim/modal.hpp"

#include <cmath>

#include "nhsim/error.hpp"

namespace nhsim::dynamics {

namespace {
constexpr cplx I{0.0, 1.0};
}

ModalSolution::ModalSolution(cplx c1, cplx c2, double lambda, double kappa, double delta)
    : c1_(c1), c2_(c2) {
    if (kappa < 0.0 || lambda < 0.0) {
        throw InvalidParameter("lambda and kappa must be >= 0");
    }
    if (kappa > 0.0 && std::abs(lambda - kappa) / kappa < kModalGuardBand) {
        throw ExceptionalPointError("closed form undefined near the exceptional point (|lambda-kappa|/kappa < 1e-3)");
    }
    basis_ = spectra::biorthogonal_basis(lambda, kappa, delta);
    Eigen::Vector2cd psi0(c1, c2);
    for (std::size_t i = 0; i < 2; ++i) {
        const cplx num = basis_.psi[i] * psi0;
        const cplx den = basis_.psi[i] * basis_.phi[i];
        coeff_[i] = num / den;
    }
}

std::pair<cplx, cplx> ModalSolution::operator()(double t) const {
    if (t == 0.0) {
        return {c1_, c2_};
    }
    const cplx up = std::exp(-I * basis_.energies[0] * t);
    const cplx down = std::exp(-I * basis_.energies[1] * t);
    const cplx even = (up + down) / 2.0;
    const cplx odd = (up - down) / 2.0;
    const cplx zeta = basis_.zeta;
    return {even * c1_ + I * zeta * odd * c2_, -I * odd / zeta * c1_ + even * c2_};
}

std::pair<cplx, cplx> ModalSolution::expand(double t) const {
    Eigen::Vector2cd out = Eigen::Vector2cd::Zero();
    for (std::size_t i = 0; i < 2; ++i) {
        out += std::exp(-I * basis_.energies[i] * t) * coeff_[i] * basis_.phi[i];
    }
    return {out(0), out(1)};
}

Trajectory analytic_solution(cplx c1, cplx c2, double lambda, double kappa, double delta,
                             std::span<const double> times) {
    const ModalSolution sol(c1, c2, lambda, kappa, delta);
    std::vector<double> data;
    data.reserve(times.size() * 4);
    for (double t : times) {
        const auto [a1, a2] = sol(t);
        data.insert(data.end(), {a1.real(), a1.imag(), a2.real(), a2.imag()});
    }
    Trajectory::Meta meta{{"model", "effective"},
                          {"source", "closed-form"},
                          {"params.lambda", format_number(lambda)},
                          {"params.kappa", format_number(kappa)},
                          {"params.delta", format_number(delta)}};
    return Trajectory(ModelKind::Effective, std::vector<double>(times.begin(), times.end()), std::move(data),
                      std::move(meta));
}

} // namespace nhsim::dynamics

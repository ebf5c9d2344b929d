#pragma once

// Closed-form propagation of the reduced two-cavity model with Γ = 0 and equal
// effective detunings.

#include <span>
#include <utility>

#include "nhsim/spectra.hpp"
#include "nhsim/trajectory.hpp"

namespace nhsim::dynamics {

/// Relative distance |λ-κ|/κ inside which the closed form is refused.
inline constexpr double kModalGuardBand = 1e-3;

class ModalSolution {
public:
    /// Throws ExceptionalPointError at or near λ = κ (see kModalGuardBand).
    ModalSolution(cplx c1, cplx c2, double lambda, double kappa, double delta);

    /// (α1(t), α2(t)) from the two-exponential closed form. Exact at t = 0.
    std::pair<cplx, cplx> operator()(double t) const;

    /// Same state rebuilt from the biorthogonal modal expansion
    ///   Σ_i e^{-iE_i t} |φ_i> <ψ_i|Ψ0> / <ψ_i|φ_i>.
    std::pair<cplx, cplx> expand(double t) const;

    /// <ψ_i|Ψ0> / <ψ_i|φ_i>
    std::array<cplx, 2> modal_coefficients() const { return coeff_; }

    const spectra::BiorthogonalBasis& basis() const { return basis_; }
    cplx c1() const { return c1_; }
    cplx c2() const { return c2_; }

private:
    cplx c1_, c2_;
    spectra::BiorthogonalBasis basis_;
    std::array<cplx, 2> coeff_{};
};

/// Samples the closed form on `times` (strictly increasing) as an effective-model trajectory.
Trajectory analytic_solution(cplx c1, cplx c2, double lambda, double kappa, double delta,
                             std::span<const double> times);

} // namespace nhsim::dynamics

#pragma once

// Mean-value Langevin models of the optomechanical realisation: the full
// cavity/oscillator system, its adiabatically reduced two-cavity form, and the
// nonlinear cavity pair used for the chaos study.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nhsim/spectra.hpp"

namespace nhsim::dynamics {

/// Linearised optomechanical pair joined by a beam splitter (λ) and a
/// unidirectional fibre. The fibre delay is carried for documentation only;
/// the equations use the short-fibre limit τ = 0.
struct OptomechParams {
    std::array<double, 2> delta{1.0, 1.0};
    double omega_m = 1.05;
    cplx coupling{0.015, 0.0}; // G
    double kappa = 0.0015;
    double gamma_m = 0.584;
    double lambda = 0.003;
    double retardation = 0.0;

    void validate() const;
    ParamEcho echo() const;
};

/// Reduced two-cavity parameters. The dissipation is kept per mode because
/// the elimination yields one value per detuning; they coincide when Δ_1 = Δ_2.
struct EffectiveParams {
    std::array<double, 2> delta_eff{1.0, 1.0};
    std::array<double, 2> dissipation{0.0, 0.0}; // Γ_1, Γ_2
    double lambda = 0.003;
    double kappa = 0.0015;

    void validate() const;
    ParamEcho echo() const;
};

struct ChaosParams {
    double omega_cm = 1.0;
    double gamma = 0.038 / 46.0;
    double g0 = 0.01;
    double delta_c = 1.0;
    double kappa_c = 0.2;
    double drive = 2.0;
    double delta_ceff = 1.0;
    double kappa_ceff = 0.0;
    double lambda_c = 0.1;
    bool asymmetric = true;

    void validate() const;
    ParamEcho echo() const;
};

/// State ordering (α1, β1, α2, β2).
using ExactState = std::array<cplx, 4>;
/// State ordering (α1, α2).
using EffectiveState = std::array<cplx, 2>;

struct ChaosState {
    double q = 0.0;
    double p = 0.0;
    cplx a1{};
    cplx a2{};
};

ExactState exact_rhs(const ExactState& s, const OptomechParams& p);
EffectiveState effective_rhs(const EffectiveState& s, const EffectiveParams& p);
ChaosState chaos_rhs(const ChaosState& s, const ChaosParams& p);

struct Reduction {
    EffectiveParams params;
    std::vector<std::string> warnings;
};

/// Adiabatic elimination of the mechanical modes:
///   Δ_eff,j = Δ_j - 4(Δ_j-ω_m)|G|² / [4(Δ_j-ω_m)² + γ_m²]
///   Γ_j     = κ   - 4γ_m|G|²       / [4(Δ_j-ω_m)² + γ_m²]
/// Emits warnings (never fails) when |ω_m-Δ_j| < 3|G| or γ_m < 3κ.
Reduction derive_effective_params(const OptomechParams& p);

/// |G| for which Γ_j = 0 on mode `mode`.
double balanced_gain_coupling(const OptomechParams& p, std::size_t mode = 0);

/// Eigenfrequencies E (α ∝ e^{-iEt}) of the linear cavity pair at g0 = 0.
spectra::SpectrumResult chaos_subsystem_spectrum(const ChaosParams& p);

// ---------------------------------------------------------------------------
// Flattened real-valued form used by the integrator. Complex components are
// interleaved (re, im).

using ModelSpec = std::variant<OptomechParams, EffectiveParams, ChaosParams>;

enum class ModelKind { Exact, Effective, Chaos };

ModelKind kind_of(const ModelSpec& m);
std::string model_tag(ModelKind k);
ModelKind parse_model_tag(const std::string& tag);
std::size_t state_width(ModelKind k);
ParamEcho echo(const ModelSpec& m);
void validate(const ModelSpec& m);

void flat_rhs(const ModelSpec& m, std::span<const double> x, std::span<double> dxdt);

std::vector<double> flatten(const ExactState& s);
std::vector<double> flatten(const EffectiveState& s);
std::vector<double> flatten(const ChaosState& s);

/// Exact-model initial state with β_j(0) = α_j(0) / ratio.
ExactState exact_initial_state(cplx a1, cplx a2, double ratio = 20.0);

} // namespace nhsim::dynamics

#pragma once

// Effective Hamiltonians of asymmetrically coupled resonators, their complex
// spectra, exceptional-point search and the biorthogonal eigenbasis of the
// two-mode reduced model.

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace nhsim {

using cplx = std::complex<double>;

// Ordered (name, value) pairs used to echo parameters into outputs.
using ParamEcho = std::vector<std::pair<std::string, double>>;

} // namespace nhsim

namespace nhsim::spectra {

/// Two modes at a common frequency with asymmetric couplings iλ and -i(λ-ε).
/// ε = 0 is the Hermitian beam-splitter coupling μ = iλ.
struct TwoModeParams {
    double omega = 1.0;
    double lambda = 0.0;
    double epsilon = 0.0;

    void validate() const;
    ParamEcho echo() const;
};

/// Balanced gain (+κ/2) and loss (-κ/2) modes with real coupling μ.
struct GainLossParams {
    double omega = 1.0;
    double mu = 0.0;
    double kappa = 0.0;

    void validate() const;
    ParamEcho echo() const;
};

/// N-site chain with forward coupling iλ and backward couplings -i(λ-ε_j).
struct ChainParams {
    double omega = 1.0;
    double lambda = 0.0;
    std::vector<double> epsilons; // N-1 entries
    std::size_t sites = 2;

    static ChainParams make(double omega, double lambda, std::vector<double> epsilons);

    void validate() const;
    ParamEcho echo() const;
};

using FamilyParams = std::variant<TwoModeParams, GainLossParams, ChainParams>;

std::string family_name(const FamilyParams& p);

struct SpectrumResult {
    /// Sorted by descending imaginary part, then descending real part.
    std::vector<cplx> energies;
    std::optional<std::vector<Eigen::VectorXcd>> eigenvectors;
    ParamEcho params_echo;
};

/// Sorts in place with the ordering documented on SpectrumResult. Imaginary
/// parts closer than `tie_tolerance` are treated as equal.
void sort_energies(std::vector<cplx>& energies, double tie_tolerance = -1.0);

/// E± = ω ± sqrt(λ² - ελ) on the principal branch.
SpectrumResult two_mode_spectrum(const TwoModeParams& p);

/// E'± = ω ± sqrt(μ² - κ²/4) on the principal branch.
SpectrumResult gain_loss_spectrum(const GainLossParams& p);

Eigen::Matrix2cd two_mode_hamiltonian(const TwoModeParams& p);
Eigen::Matrix2cd gain_loss_hamiltonian(const GainLossParams& p);

/// Tridiagonal chain Hamiltonian: ω on the diagonal, iλ above, -i(λ-ε_j) below.
Eigen::MatrixXcd build_chain_hamiltonian(const ChainParams& p);

/// All N eigenvalues of the chain Hamiltonian.
///
/// Eigenvalues are taken from the diagonally similar complex-symmetric
/// tridiagonal matrix with off-diagonal sqrt(λ(λ-ε_j)); both share the
/// characteristic polynomial, and the symmetric form stays well scaled near
/// coalescences where the original matrix is nearly triangular. The squared
/// energies come from the half-size even/odd block, so roots are returned in
/// exact ± pairs about ω. Eigenvectors, when requested, are computed from the
/// original matrix.
SpectrumResult chain_spectrum(const ChainParams& p, bool with_eigenvectors = false);

/// Dispatches on the family. Energies are ω-shifted like the dedicated calls.
SpectrumResult spectrum(const FamilyParams& p);

/// Spectrum relative to ω (E - ω), computed without the diagonal shift.
std::vector<cplx> centered_spectrum(const FamilyParams& p);

// ---------------------------------------------------------------------------
// Exceptional points

/// Inclusive sweep `start..end` with `count` points.
struct Sweep {
    std::string parameter;
    double start = 0.0;
    double end = 0.0;
    std::size_t count = 0;

    double at(std::size_t i) const;
    void validate() const;
};

/// Parses `name:start:end:count`.
Sweep parse_sweep(const std::string& text);

/// Returns a copy of `base` with the named sweep parameter set to `value`.
FamilyParams with_parameter(const FamilyParams& base, const std::string& name, double value);

struct EpSearchOptions {
    double gap_tolerance = 1e-8;
    double relative_width = 1e-10;
    /// Unconverged minima with a larger gap are avoided crossings and dropped.
    double candidate_gap = 1e-4;
    /// Two-mode family only: report λ = ε (or ε = λ) in closed form.
    bool analytic = false;
};

struct ExceptionalPoint {
    double location = 0.0;
    double gap = 0.0;           // smallest eigenvalue gap reached by refinement
    double bracket_width = 0.0; // final refinement interval
    bool converged = false;     // gap < gap_tolerance
};

/// Minimum pairwise distance between eigenvalues.
double min_eigenvalue_gap(const std::vector<cplx>& energies);

/// Scans the sweep for interior local minima of the minimum eigenvalue gap
/// and refines each one. Refinement bisects on the sign of Re(d²), d being
/// the difference of the closest pair (real splitting on one side of an EP,
/// imaginary on the other); without a sign change it falls back to a
/// golden-section minimisation of the gap. Candidates that never reach the
/// gap tolerance are returned with `converged == false`. Converged locations
/// closer than 1e-6 of the sweep width are merged.
std::vector<ExceptionalPoint> find_exceptional_points(const FamilyParams& base, const Sweep& sweep,
                                                      const EpSearchOptions& options = {});

/// Number of converged, distinct exceptional points.
std::size_t count_converged(const std::vector<ExceptionalPoint>& eps);

// ---------------------------------------------------------------------------
// Biorthogonal basis of the reduced two-mode model (Γ = 0, Δ_eff1 = Δ_eff2 = Δ)

struct BiorthogonalBasis {
    std::array<Eigen::Vector2cd, 2> phi;    // right eigenvectors |φ_1>, |φ_2>
    std::array<Eigen::RowVector2cd, 2> psi; // left row vectors <ψ_1|, <ψ_2|
    std::array<cplx, 2> energies;           // E_+ = E_1, E_- = E_2
    cplx zeta;                              // sqrt(λ) / sqrt(λ - κ)

    /// max_ij |<ψ_i|φ_j> - 2δ_ij|
    double biorthogonality_defect() const;
    /// max-entry norm of Σ_i |φ_i><ψ_i| / <ψ_i|φ_i> - I
    double completeness_defect() const;
};

/// Throws ExceptionalPointError when λ = κ or when λ = 0 with κ ≠ 0; both make
/// the eigenbasis defective.
BiorthogonalBasis biorthogonal_basis(double lambda, double kappa, double delta);

/// Effective Hamiltonian H with i d/dt (α1, α2) = H (α1, α2).
Eigen::Matrix2cd reduced_hamiltonian(double lambda, double kappa, double delta);

} // namespace nhsim::spectra

#include "nhsim/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "nhsim/error.hpp"

namespace nhsim::dynamics {

namespace {

constexpr cplx I{0.0, 1.0};

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw InvalidParameter(std::string(name) + " must be finite");
    }
}

void require_nonnegative(double v, const char* name) {
    require_finite(v, name);
    if (v < 0.0) {
        throw InvalidParameter(std::string(name) + " must be >= 0 (got " + std::to_string(v) + ")");
    }
}

double detuning_denominator(const OptomechParams& p, std::size_t j) {
    const double off = p.delta[j] - p.omega_m;
    return 4.0 * off * off + p.gamma_m * p.gamma_m;
}

} // namespace

void OptomechParams::validate() const {
    require_finite(delta[0], "delta1");
    require_finite(delta[1], "delta2");
    require_finite(omega_m, "omega_m");
    require_finite(coupling.real(), "G");
    require_finite(coupling.imag(), "G");
    require_nonnegative(kappa, "kappa");
    require_nonnegative(gamma_m, "gamma_m");
    require_nonnegative(lambda, "lambda");
    if (retardation != 0.0) {
        throw InvalidParameter("retardation must be 0 (short-fibre limit)");
    }
}

ParamEcho OptomechParams::echo() const {
    return {{"delta1", delta[0]},   {"delta2", delta[1]}, {"omega_m", omega_m},
            {"G_re", coupling.real()}, {"G_im", coupling.imag()}, {"kappa", kappa},
            {"gamma_m", gamma_m},   {"lambda", lambda},   {"tau", retardation}};
}

void EffectiveParams::validate() const {
    for (double v : {delta_eff[0], delta_eff[1], dissipation[0], dissipation[1], lambda, kappa}) {
        require_finite(v, "effective parameter");
    }
}

ParamEcho EffectiveParams::echo() const {
    return {{"delta_eff1", delta_eff[0]}, {"delta_eff2", delta_eff[1]}, {"Gamma1", dissipation[0]},
            {"Gamma2", dissipation[1]},   {"lambda", lambda},           {"kappa", kappa}};
}

void ChaosParams::validate() const {
    require_finite(omega_cm, "omega_cm");
    require_nonnegative(gamma, "gamma");
    require_finite(g0, "g0");
    require_finite(delta_c, "delta_c");
    require_nonnegative(kappa_c, "kappa_c");
    require_finite(drive, "drive");
    require_finite(delta_ceff, "delta_ceff");
    require_nonnegative(kappa_ceff, "kappa_ceff");
    require_nonnegative(lambda_c, "lambda_c");
}

ParamEcho ChaosParams::echo() const {
    return {{"omega_cm", omega_cm}, {"gamma", gamma},           {"g0", g0},
            {"delta_c", delta_c},   {"kappa_c", kappa_c},       {"drive", drive},
            {"delta_ceff", delta_ceff}, {"kappa_ceff", kappa_ceff}, {"lambda_c", lambda_c},
            {"asymmetric", asymmetric ? 1.0 : 0.0}};
}

// ---------------------------------------------------------------------------

ExactState exact_rhs(const ExactState& s, const OptomechParams& p) {
    const cplx a1 = s[0], b1 = s[1], a2 = s[2], b2 = s[3];
    const cplx gc = std::conj(p.coupling);
    const cplx mech = cplx(-p.gamma_m / 2.0, -p.omega_m);
    ExactState d;
    d[0] = cplx(-p.kappa / 2.0, p.delta[0]) * a1 - I * gc * std::conj(b1) + p.lambda * a2;
    d[1] = mech * b1 - I * gc * std::conj(a1);
    // Leakage of cavity 1 feeds cavity 2 through the fibre: +κ α1.
    d[2] = cplx(-p.kappa / 2.0, p.delta[1]) * a2 - I * gc * std::conj(b2) - p.lambda * a1 + p.kappa * a1;
    d[3] = mech * b2 - I * gc * std::conj(a2);
    return d;
}

EffectiveState effective_rhs(const EffectiveState& s, const EffectiveParams& p) {
    return {cplx(-p.dissipation[0] / 2.0, p.delta_eff[0]) * s[0] + p.lambda * s[1],
            cplx(-p.dissipation[1] / 2.0, p.delta_eff[1]) * s[1] - (p.lambda - p.kappa) * s[0]};
}

ChaosState chaos_rhs(const ChaosState& s, const ChaosParams& p) {
    ChaosState d;
    d.q = p.omega_cm * s.p;
    d.p = -p.omega_cm * s.q - p.gamma * s.p + p.g0 * std::norm(s.a1);
    d.a1 = cplx(-p.kappa_c / 2.0, p.delta_c) * s.a1 + I * p.g0 * s.a1 * s.q + p.drive + p.lambda_c * s.a2;
    d.a2 = cplx(-p.kappa_ceff / 2.0, p.delta_ceff) * s.a2 - p.lambda_c * s.a1;
    if (p.asymmetric) {
        d.a2 += p.kappa_c * s.a1;
    }
    return d;
}

Reduction derive_effective_params(const OptomechParams& p) {
    if (!(p.gamma_m > 0.0)) {
        throw InvalidParameter("adiabatic elimination needs gamma_m > 0");
    }
    p.validate();
    Reduction out;
    const double g2 = std::norm(p.coupling);
    for (std::size_t j = 0; j < 2; ++j) {
        const double den = detuning_denominator(p, j);
        out.params.delta_eff[j] = p.delta[j] - 4.0 * (p.delta[j] - p.omega_m) * g2 / den;
        out.params.dissipation[j] = p.kappa - 4.0 * p.gamma_m * g2 / den;

        const double separation = std::abs(p.omega_m - p.delta[j]);
        if (separation < 3.0 * std::abs(p.coupling)) {
            std::ostringstream msg;
            msg << "mode " << j + 1 << ": |omega_m - delta| = " << separation
                << " is not >> |G| = " << std::abs(p.coupling);
            out.warnings.push_back(msg.str());
        }
    }
    if (p.gamma_m < 3.0 * p.kappa) {
        std::ostringstream msg;
        msg << "gamma_m = " << p.gamma_m << " is not >> kappa = " << p.kappa;
        out.warnings.push_back(msg.str());
    }
    out.params.lambda = p.lambda;
    out.params.kappa = p.kappa;
    return out;
}

double balanced_gain_coupling(const OptomechParams& p, std::size_t mode) {
    if (!(p.gamma_m > 0.0)) {
        throw InvalidParameter("balanced coupling needs gamma_m > 0");
    }
    if (mode > 1) {
        throw InvalidParameter("mode index must be 0 or 1");
    }
    return std::sqrt(p.kappa * detuning_denominator(p, mode) / (4.0 * p.gamma_m));
}

spectra::SpectrumResult chaos_subsystem_spectrum(const ChaosParams& p) {
    p.validate();
    // α' = M α with α ∝ e^{-iEt}  =>  E = i μ for each eigenvalue μ of M.
    const cplx m11 = cplx(-p.kappa_c / 2.0, p.delta_c);
    const cplx m12 = p.lambda_c;
    const cplx m21 = -p.lambda_c + (p.asymmetric ? p.kappa_c : 0.0);
    const cplx m22 = cplx(-p.kappa_ceff / 2.0, p.delta_ceff);

    const cplx half_trace = (m11 + m22) / 2.0;
    const cplx half_diff = (m11 - m22) / 2.0;
    const cplx root = std::sqrt(half_diff * half_diff + m12 * m21);

    spectra::SpectrumResult r;
    r.energies = {I * (half_trace + root), I * (half_trace - root)};
    spectra::sort_energies(r.energies);
    r.params_echo = p.echo();
    return r;
}

// ---------------------------------------------------------------------------

ModelKind kind_of(const ModelSpec& m) {
    return static_cast<ModelKind>(m.index());
}

std::string model_tag(ModelKind k) {
    switch (k) {
    case ModelKind::Exact:
        return "exact";
    case ModelKind::Effective:
        return "effective";
    case ModelKind::Chaos:
        return "chaos";
    }
    return "unknown";
}

ModelKind parse_model_tag(const std::string& tag) {
    if (tag == "exact") return ModelKind::Exact;
    if (tag == "effective") return ModelKind::Effective;
    if (tag == "chaos") return ModelKind::Chaos;
    throw InvalidParameter("unknown model tag '" + tag + "'");
}

std::size_t state_width(ModelKind k) {
    switch (k) {
    case ModelKind::Exact:
        return 8;
    case ModelKind::Effective:
        return 4;
    case ModelKind::Chaos:
        return 6;
    }
    return 0;
}

ParamEcho echo(const ModelSpec& m) {
    return std::visit([](const auto& p) { return p.echo(); }, m);
}

void validate(const ModelSpec& m) {
    std::visit([](const auto& p) { p.validate(); }, m);
}

void flat_rhs(const ModelSpec& m, std::span<const double> x, std::span<double> dx) {
    switch (m.index()) {
    case 0: {
        const ExactState s{cplx(x[0], x[1]), cplx(x[2], x[3]), cplx(x[4], x[5]), cplx(x[6], x[7])};
        const ExactState d = exact_rhs(s, std::get<0>(m));
        for (std::size_t k = 0; k < 4; ++k) {
            dx[2 * k] = d[k].real();
            dx[2 * k + 1] = d[k].imag();
        }
        return;
    }
    case 1: {
        const EffectiveState s{cplx(x[0], x[1]), cplx(x[2], x[3])};
        const EffectiveState d = effective_rhs(s, std::get<1>(m));
        dx[0] = d[0].real();
        dx[1] = d[0].imag();
        dx[2] = d[1].real();
        dx[3] = d[1].imag();
        return;
    }
    default: {
        const ChaosState s{x[0], x[1], cplx(x[2], x[3]), cplx(x[4], x[5])};
        const ChaosState d = chaos_rhs(s, std::get<2>(m));
        dx[0] = d.q;
        dx[1] = d.p;
        dx[2] = d.a1.real();
        dx[3] = d.a1.imag();
        dx[4] = d.a2.real();
        dx[5] = d.a2.imag();
        return;
    }
    }
}

std::vector<double> flatten(const ExactState& s) {
    std::vector<double> out;
    for (const auto& c : s) {
        out.push_back(c.real());
        out.push_back(c.imag());
    }
    return out;
}

std::vector<double> flatten(const EffectiveState& s) {
    return {s[0].real(), s[0].imag(), s[1].real(), s[1].imag()};
}

std::vector<double> flatten(const ChaosState& s) {
    return {s.q, s.p, s.a1.real(), s.a1.imag(), s.a2.real(), s.a2.imag()};
}

ExactState exact_initial_state(cplx a1, cplx a2, double ratio) {
    if (!(ratio > 0.0)) {
        throw InvalidParameter("alpha/beta ratio must be positive");
    }
    return {a1, a1 / ratio, a2, a2 / ratio};
}

} // namespace nhsim::dynamics

#include "nhsim/spectra.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "nhsim/error.hpp"

namespace nhsim::spectra {

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

std::vector<cplx> shifted(std::vector<cplx> centered, double omega) {
    for (auto& e : centered) {
        e += omega;
    }
    return centered;
}

} // namespace

// ---------------------------------------------------------------------------

void TwoModeParams::validate() const {
    require_finite(omega, "omega");
    require_nonnegative(lambda, "lambda");
    require_finite(epsilon, "epsilon");
}

ParamEcho TwoModeParams::echo() const {
    return {{"omega", omega}, {"lambda", lambda}, {"epsilon", epsilon}};
}

void GainLossParams::validate() const {
    require_finite(omega, "omega");
    require_finite(mu, "mu");
    require_nonnegative(kappa, "kappa");
}

ParamEcho GainLossParams::echo() const {
    return {{"omega", omega}, {"mu", mu}, {"kappa", kappa}};
}

ChainParams ChainParams::make(double omega, double lambda, std::vector<double> epsilons) {
    ChainParams p;
    p.omega = omega;
    p.lambda = lambda;
    p.sites = epsilons.size() + 1;
    p.epsilons = std::move(epsilons);
    return p;
}

void ChainParams::validate() const {
    require_finite(omega, "omega");
    require_finite(lambda, "lambda");
    if (sites < 2) {
        throw InvalidParameter("chain needs at least 2 sites");
    }
    if (epsilons.size() + 1 != sites) {
        throw InvalidParameter("chain of " + std::to_string(sites) + " sites needs " +
                               std::to_string(sites - 1) + " asymmetries, got " +
                               std::to_string(epsilons.size()));
    }
    for (double e : epsilons) {
        require_finite(e, "epsilon");
    }
}

ParamEcho ChainParams::echo() const {
    ParamEcho out{{"omega", omega}, {"lambda", lambda}, {"n", static_cast<double>(sites)}};
    for (std::size_t j = 0; j < epsilons.size(); ++j) {
        out.emplace_back("epsilon" + std::to_string(j + 1), epsilons[j]);
    }
    return out;
}

std::string family_name(const FamilyParams& p) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, TwoModeParams>) {
                return "two-mode";
            } else if constexpr (std::is_same_v<T, GainLossParams>) {
                return "gain-loss";
            } else {
                return "chain";
            }
        },
        p);
}

// ---------------------------------------------------------------------------

void sort_energies(std::vector<cplx>& energies, double tie_tolerance) {
    if (tie_tolerance < 0.0) {
        double scale = 1.0;
        for (const auto& e : energies) {
            scale = std::max(scale, std::abs(e));
        }
        tie_tolerance = 1e-12 * scale;
    }
    auto before = [tie_tolerance](const cplx& a, const cplx& b) {
        if (std::abs(a.imag() - b.imag()) > tie_tolerance) {
            return a.imag() > b.imag();
        }
        return a.real() > b.real();
    };
    // Insertion sort: the tolerant comparison is not a strict weak ordering.
    for (std::size_t i = 1; i < energies.size(); ++i) {
        cplx key = energies[i];
        std::size_t j = i;
        while (j > 0 && before(key, energies[j - 1])) {
            energies[j] = energies[j - 1];
            --j;
        }
        energies[j] = key;
    }
}

Eigen::Matrix2cd two_mode_hamiltonian(const TwoModeParams& p) {
    Eigen::Matrix2cd h;
    h << p.omega, I * p.lambda, -I * (p.lambda - p.epsilon), p.omega;
    return h;
}

Eigen::Matrix2cd gain_loss_hamiltonian(const GainLossParams& p) {
    Eigen::Matrix2cd h;
    h << cplx(p.omega, p.kappa / 2.0), p.mu, p.mu, cplx(p.omega, -p.kappa / 2.0);
    return h;
}

namespace {

std::vector<cplx> two_mode_centered(const TwoModeParams& p) {
    // λ(λ-ε) is exactly zero at λ = ε.
    const cplx root = std::sqrt(cplx(p.lambda * (p.lambda - p.epsilon), 0.0));
    return {root, -root};
}

std::vector<cplx> gain_loss_centered(const GainLossParams& p) {
    const double half = p.kappa / 2.0;
    const cplx root = std::sqrt(cplx((p.mu - half) * (p.mu + half), 0.0));
    return {root, -root};
}

Eigen::MatrixXcd symmetric_chain_offset(const ChainParams& p) {
    const auto n = static_cast<Eigen::Index>(p.sites);
    Eigen::MatrixXcd j = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        // (iλ)(-i(λ-ε)) = λ(λ-ε)
        const double product = p.lambda * (p.lambda - p.epsilons[static_cast<std::size_t>(k)]);
        const cplx b = std::sqrt(cplx(product, 0.0));
        j(k, k + 1) = b;
        j(k + 1, k) = b;
    }
    return j;
}

// With a zero diagonal the chain is bipartite: ordering even sites before odd
// ones gives [[0, B], [Bᵀ, 0]], so E² runs over the eigenvalues of BᵀB and
// the spectrum is {±sqrt(μ)} plus a zero for odd N. Building the pairs from
// one root keeps E -> -E exact even where the roots are ill-conditioned.
std::vector<cplx> chain_centered(const ChainParams& p) {
    const Eigen::MatrixXcd j = symmetric_chain_offset(p);
    const Eigen::Index n = j.rows();
    const Eigen::Index odd = n / 2;
    const Eigen::Index even = n - odd;
    Eigen::MatrixXcd b(even, odd);
    for (Eigen::Index r = 0; r < even; ++r) {
        for (Eigen::Index c = 0; c < odd; ++c) b(r, c) = j(2 * r, 2 * c + 1);
    }
    const Eigen::MatrixXcd m = b.transpose() * b;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m, false);
    if (solver.info() != Eigen::Success) {
        throw EigensolverError("chain eigensolver did not converge");
    }
    std::vector<cplx> out;
    for (Eigen::Index k = 0; k < odd; ++k) {
        const cplx root = std::sqrt(solver.eigenvalues()(k));
        out.push_back(root);
        out.push_back(-root);
    }
    if (even > odd) out.emplace_back(0.0, 0.0);
    return out;
}

} // namespace

SpectrumResult two_mode_spectrum(const TwoModeParams& p) {
    p.validate();
    SpectrumResult r;
    r.energies = shifted(two_mode_centered(p), p.omega);
    sort_energies(r.energies);
    r.params_echo = p.echo();
    return r;
}

SpectrumResult gain_loss_spectrum(const GainLossParams& p) {
    p.validate();
    SpectrumResult r;
    r.energies = shifted(gain_loss_centered(p), p.omega);
    sort_energies(r.energies);
    r.params_echo = p.echo();
    return r;
}

Eigen::MatrixXcd build_chain_hamiltonian(const ChainParams& p) {
    p.validate();
    const auto n = static_cast<Eigen::Index>(p.sites);
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        h(k, k) = p.omega;
    }
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        h(k, k + 1) = I * p.lambda;
        h(k + 1, k) = -I * (p.lambda - p.epsilons[static_cast<std::size_t>(k)]);
    }
    return h;
}

SpectrumResult chain_spectrum(const ChainParams& p, bool with_eigenvectors) {
    p.validate();
    SpectrumResult r;
    r.energies = shifted(chain_centered(p), p.omega);
    sort_energies(r.energies);
    r.params_echo = p.echo();

    if (with_eigenvectors) {
        const Eigen::MatrixXcd h = build_chain_hamiltonian(p);
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(h, true);
        if (solver.info() != Eigen::Success) {
            throw EigensolverError("chain eigenvector solve did not converge");
        }
        // Pair each sorted energy with the closest eigenvalue of the direct solve.
        std::vector<Eigen::VectorXcd> vecs;
        std::vector<bool> used(static_cast<std::size_t>(solver.eigenvalues().size()), false);
        for (const auto& e : r.energies) {
            Eigen::Index best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
                const double d = std::abs(solver.eigenvalues()(k) - e);
                if (!used[static_cast<std::size_t>(k)] && d < best_d) {
                    best_d = d;
                    best = k;
                }
            }
            used[static_cast<std::size_t>(best)] = true;
            vecs.emplace_back(solver.eigenvectors().col(best).normalized());
        }
        r.eigenvectors = std::move(vecs);
    }
    return r;
}

SpectrumResult spectrum(const FamilyParams& p) {
    return std::visit(
        [](const auto& v) -> SpectrumResult {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, TwoModeParams>) {
                return two_mode_spectrum(v);
            } else if constexpr (std::is_same_v<T, GainLossParams>) {
                return gain_loss_spectrum(v);
            } else {
                return chain_spectrum(v);
            }
        },
        p);
}

std::vector<cplx> centered_spectrum(const FamilyParams& p) {
    return std::visit(
        [](const auto& v) -> std::vector<cplx> {
            using T = std::decay_t<decltype(v)>;
            v.validate();
            if constexpr (std::is_same_v<T, TwoModeParams>) {
                return two_mode_centered(v);
            } else if constexpr (std::is_same_v<T, GainLossParams>) {
                return gain_loss_centered(v);
            } else {
                return chain_centered(v);
            }
        },
        p);
}

// ---------------------------------------------------------------------------

double Sweep::at(std::size_t i) const {
    if (count == 1) {
        return start;
    }
    if (i + 1 == count) {
        return end;
    }
    return start + (end - start) * static_cast<double>(i) / static_cast<double>(count - 1);
}

void Sweep::validate() const {
    if (parameter.empty()) {
        throw InvalidParameter("sweep parameter name is empty");
    }
    if (!std::isfinite(start) || !std::isfinite(end) || !(end > start)) {
        throw InvalidParameter("sweep range must have positive width");
    }
    if (count < 2) {
        throw InvalidParameter("sweep needs at least 2 points");
    }
}

Sweep parse_sweep(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        parts.push_back(item);
    }
    if (parts.size() != 4) {
        throw InvalidParameter("sweep must look like name:start:end:count, got '" + text + "'");
    }
    Sweep s;
    s.parameter = parts[0];
    try {
        std::size_t pos = 0;
        s.start = std::stod(parts[1], &pos);
        if (pos != parts[1].size()) throw std::invalid_argument("trailing");
        s.end = std::stod(parts[2], &pos);
        if (pos != parts[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw InvalidParameter("sweep bounds are not numbers in '" + text + "'");
    }
    const auto& c = parts[3];
    auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), s.count);
    if (ec != std::errc() || ptr != c.data() + c.size()) {
        throw InvalidParameter("sweep count is not an integer in '" + text + "'");
    }
    s.validate();
    return s;
}

FamilyParams with_parameter(const FamilyParams& base, const std::string& name, double value) {
    FamilyParams out = base;
    std::visit(
        [&](auto& v) {
            using T = std::decay_t<decltype(v)>;
            double* slot = nullptr;
            if (name == "omega") {
                slot = &v.omega;
            }
            if constexpr (std::is_same_v<T, TwoModeParams>) {
                if (name == "lambda") slot = &v.lambda;
                if (name == "epsilon") slot = &v.epsilon;
            } else if constexpr (std::is_same_v<T, GainLossParams>) {
                if (name == "mu") slot = &v.mu;
                if (name == "kappa") slot = &v.kappa;
            } else {
                if (name == "lambda") slot = &v.lambda;
                if (name == "epsilon") {
                    for (double& e : v.epsilons) e = value;
                    return;
                }
            }
            if (slot == nullptr) {
                throw InvalidParameter("family " + family_name(base) + " has no sweepable parameter '" +
                                       name + "'");
            }
            *slot = value;
        },
        out);
    return out;
}

double min_eigenvalue_gap(const std::vector<cplx>& energies) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < energies.size(); ++i) {
        for (std::size_t j = i + 1; j < energies.size(); ++j) {
            best = std::min(best, std::abs(energies[i] - energies[j]));
        }
    }
    return best;
}

namespace {

struct GapProbe {
    double gap;
    double signed_discriminant; // Re(d²) of the closest pair
};

GapProbe probe(const FamilyParams& base, const std::string& name, double x) {
    const auto e = centered_spectrum(with_parameter(base, name, x));
    GapProbe out{std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t i = 0; i < e.size(); ++i) {
        for (std::size_t j = i + 1; j < e.size(); ++j) {
            const cplx d = e[i] - e[j];
            if (std::abs(d) < out.gap) {
                out.gap = std::abs(d);
                out.signed_discriminant = (d * d).real();
            }
        }
    }
    return out;
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// `center` is the grid minimum inside [a, b]; higher-order coalescences can
// sit exactly on it while no interior point reaches the gap tolerance.
ExceptionalPoint refine(const FamilyParams& base, const std::string& name, double a, double b, double center,
                        double center_gap, const EpSearchOptions& opt) {
    auto width_ok = [&](double lo, double hi) {
        const double scale = std::max({std::abs(lo), std::abs(hi), std::numeric_limits<double>::min()});
        return (hi - lo) <= opt.relative_width * scale;
    };

    GapProbe pa = probe(base, name, a);
    GapProbe pb = probe(base, name, b);
    ExceptionalPoint ep;
    ep.gap = std::numeric_limits<double>::infinity();
    auto take_best = [&](double x, const GapProbe& p) {
        if (p.gap < ep.gap) {
            ep.gap = p.gap;
            ep.location = x;
        }
    };
    take_best(center, GapProbe{center_gap, 0.0});

    if (sign_of(pa.signed_discriminant) * sign_of(pb.signed_discriminant) < 0) {
        // Bisection on the sign of Re(d²). Continue past the width target
        // until the gap criterion is met or the bracket is exhausted.
        for (int it = 0; it < 2000; ++it) {
            const double m = 0.5 * (a + b);
            if (!(m > a && m < b)) {
                break;
            }
            const GapProbe pm = probe(base, name, m);
            if (pm.signed_discriminant == 0.0) {
                a = b = m;
                pa = pb = pm;
                break;
            }
            if (sign_of(pm.signed_discriminant) == sign_of(pa.signed_discriminant)) {
                a = m;
                pa = pm;
            } else {
                b = m;
                pb = pm;
            }
            if (width_ok(a, b) && std::min(pa.gap, pb.gap) < opt.gap_tolerance) {
                break;
            }
        }
        take_best(a, pa);
        take_best(b, pb);
        const double m = 0.5 * (a + b);
        take_best(m, probe(base, name, m));
    } else {
        // Golden-section minimisation of the gap itself.
        const double r = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = b - r * (b - a);
        double d = a + r * (b - a);
        double fc = probe(base, name, c).gap;
        double fd = probe(base, name, d).gap;
        for (int it = 0; it < 400 && !width_ok(a, b); ++it) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = probe(base, name, c).gap;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = probe(base, name, d).gap;
            }
        }
        take_best(c, GapProbe{fc, 0.0});
        take_best(d, GapProbe{fd, 0.0});
    }
    ep.bracket_width = b - a;
    ep.converged = ep.gap < opt.gap_tolerance;
    return ep;
}

} // namespace

std::vector<ExceptionalPoint> find_exceptional_points(const FamilyParams& base, const Sweep& sweep,
                                                      const EpSearchOptions& options) {
    sweep.validate();
    if (!(options.gap_tolerance > 0.0) || !(options.relative_width > 0.0) ||
        !(options.candidate_gap >= options.gap_tolerance)) {
        throw InvalidParameter("EP search tolerances must be positive");
    }

    if (options.analytic) {
        if (const auto* tm = std::get_if<TwoModeParams>(&base)) {
            double loc = 0.0;
            if (sweep.parameter == "lambda") {
                loc = tm->epsilon;
            } else if (sweep.parameter == "epsilon") {
                loc = tm->lambda;
            } else {
                return {};
            }
            if (loc > sweep.start && loc < sweep.end) {
                return {ExceptionalPoint{loc, 0.0, 0.0, true}};
            }
            return {};
        }
    }

    std::vector<double> xs(sweep.count);
    std::vector<double> gaps(sweep.count);
    for (std::size_t i = 0; i < sweep.count; ++i) {
        xs[i] = sweep.at(i);
        gaps[i] = probe(base, sweep.parameter, xs[i]).gap;
    }

    std::vector<ExceptionalPoint> found;
    for (std::size_t i = 1; i + 1 < sweep.count; ++i) {
        if (!(gaps[i] <= gaps[i - 1] && gaps[i] < gaps[i + 1])) {
            continue;
        }
        ExceptionalPoint ep = refine(base, sweep.parameter, xs[i - 1], xs[i + 1], xs[i], gaps[i], options);
        if (!ep.converged && ep.gap > options.candidate_gap) {
            continue;
        }
        const double merge = 1e-6 * (sweep.end - sweep.start);
        bool duplicate = false;
        for (auto& prev : found) {
            if (prev.converged && ep.converged && std::abs(prev.location - ep.location) <= merge) {
                if (ep.gap < prev.gap) {
                    prev = ep;
                }
                duplicate = true;
                break;
            }
        }
        if (!duplicate) {
            found.push_back(ep);
        }
    }
    return found;
}

std::size_t count_converged(const std::vector<ExceptionalPoint>& eps) {
    return static_cast<std::size_t>(
        std::count_if(eps.begin(), eps.end(), [](const ExceptionalPoint& e) { return e.converged; }));
}

// ---------------------------------------------------------------------------

Eigen::Matrix2cd reduced_hamiltonian(double lambda, double kappa, double delta) {
    Eigen::Matrix2cd h;
    h << -delta, I * lambda, -I * (lambda - kappa), -delta;
    return h;
}

BiorthogonalBasis biorthogonal_basis(double lambda, double kappa, double delta) {
    if (!std::isfinite(lambda) || !std::isfinite(kappa) || !std::isfinite(delta)) {
        throw InvalidParameter("biorthogonal basis parameters must be finite");
    }
    if (lambda == kappa) {
        throw ExceptionalPointError("defective eigenbasis: lambda == kappa is an exceptional point");
    }
    if (lambda == 0.0) {
        throw ExceptionalPointError("defective eigenbasis: lambda == 0 with kappa != 0");
    }

    const cplx s = std::sqrt(cplx(lambda * (lambda - kappa), 0.0));
    BiorthogonalBasis basis;
    basis.energies = {-delta + s, -delta - s};
    basis.zeta = std::sqrt(cplx(lambda, 0.0)) / std::sqrt(cplx(lambda - kappa, 0.0));

    const cplx right = I * s / (lambda - kappa);
    const cplx left = I * s / lambda;
    basis.phi[0] << right, 1.0;
    basis.phi[1] << -right, 1.0;
    basis.psi[0] << -left, 1.0;
    basis.psi[1] << left, 1.0;
    return basis;
}

double BiorthogonalBasis::biorthogonality_defect() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            const cplx overlap = psi[i] * phi[j];
            const double target = (i == j) ? 2.0 : 0.0;
            worst = std::max(worst, std::abs(overlap - target));
        }
    }
    return worst;
}

double BiorthogonalBasis::completeness_defect() const {
    Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
    for (std::size_t i = 0; i < 2; ++i) {
        const cplx norm = psi[i] * phi[i];
        sum += (phi[i] * psi[i]) / norm;
    }
    return (sum - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
}

} // namespace nhsim::spectra

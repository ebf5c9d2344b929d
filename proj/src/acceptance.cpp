#include "nhsim/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "nhsim/error.hpp"
#include "nhsim/modal.hpp"
#include "nhsim/scenarios.hpp"
#include "nhsim/spectra.hpp"

namespace nhsim::acceptance {

namespace {

using scenarios::ScenarioResult;

std::string num(double v) { return format_number(v); }

// Collects named checks; the detail string lists the failing ones first.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        (ok ? passed_ : failed_).push_back(what);
    }
    bool ok() const { return failed_.empty(); }
    std::string detail() const {
        std::string out;
        for (const auto& f : failed_) out += (out.empty() ? "FAILED " : "; FAILED ") + f;
        for (const auto& p : passed_) out += (out.empty() ? "" : "; ") + p;
        return out;
    }

private:
    std::vector<std::string> passed_, failed_;
};

struct Outcome {
    Checks checks;
    std::vector<std::pair<std::string, std::string>> digests;

    void artifact(const std::string& name, const std::string& bytes) {
        digests.push_back({name, scenarios::sha256_hex(bytes)});
    }
    void scenario(const ScenarioResult& r) {
        for (const auto& [f, d] : r.manifest.digests) digests.push_back({r.manifest.scenario + "/" + f, d});
    }
};

ScenarioResult run_preset(const std::string& name, Outcome& out) {
    auto r = scenarios::run_scenario(scenarios::load_scenario(name));
    for (const auto& e : r.manifest.errors) out.checks.expect(false, name + " error: " + e);
    out.scenario(r);
    return r;
}

std::optional<double> metric(const ScenarioResult& r, const std::string& label, const std::string& name) {
    const auto* run = r.run(label);
    if (!run) return std::nullopt;
    const auto* m = run->metric(name);
    return m ? m->number : std::nullopt;
}

std::string metric_text(const ScenarioResult& r, const std::string& label, const std::string& name) {
    const auto* run = r.run(label);
    if (!run) return "missing";
    const auto* m = run->metric(name);
    return m ? m->text : "missing";
}

std::string show(const std::optional<double>& v) { return v ? num(*v) : "n/a"; }

// ---------------------------------------------------------------------------

void spectrum_dichotomy(Outcome& out) {
    const spectra::TwoModeParams base{1.0, 0.0, 0.01};
    const auto sweep = spectra::parse_sweep("lambda:0:0.05:501");
    out.artifact("fig1a.csv", scenarios::spectrum_sweep_csv(base, sweep));
    double worst_im = 0.0, worst_re = 0.0;
    for (std::size_t i = 0; i < sweep.count; ++i) {
        const double lambda = sweep.at(i);
        const auto e = spectra::two_mode_spectrum({1.0, lambda, 0.01}).energies;
        if (lambda >= 0.01) {
            worst_im = std::max({worst_im, std::abs(e[0].imag()), std::abs(e[1].imag())});
        } else {
            worst_re = std::max(worst_re, std::abs(e[0].real() - e[1].real()));
        }
    }
    out.checks.expect(worst_im <= 1e-12, "max |Im E| for lambda >= eps = " + num(worst_im));
    out.checks.expect(worst_re <= 1e-12, "max |Re E+ - Re E-| for lambda < eps = " + num(worst_re));
    const auto eps = spectra::find_exceptional_points(base, sweep);
    const auto n = spectra::count_converged(eps);
    out.checks.expect(n == 1, "EP count " + std::to_string(n));
    for (const auto& ep : eps) {
        if (ep.converged) out.checks.expect(std::abs(ep.location - 0.01) <= 1e-8, "EP at " + num(ep.location));
    }
}

void gain_loss(Outcome& out) {
    const spectra::GainLossParams base{1.0, 0.0, 0.01};
    const auto sweep = spectra::parse_sweep("mu:0:0.05:501");
    out.artifact("fig1e.csv", scenarios::spectrum_sweep_csv(base, sweep));
    bool iff = true;
    for (std::size_t i = 0; i < sweep.count; ++i) {
        const double mu = sweep.at(i);
        const auto e = spectra::gain_loss_spectrum({1.0, mu, 0.01}).energies;
        const double im = std::max(std::abs(e[0].imag()), std::abs(e[1].imag()));
        const bool real = im <= 1e-12;
        if (real != (mu >= 0.005)) iff = false;
    }
    out.checks.expect(iff, "real spectrum iff mu >= kappa/2 on 501 points");
    const auto eps = spectra::find_exceptional_points(base, sweep);
    const auto n = spectra::count_converged(eps);
    out.checks.expect(n == 1, "EP count " + std::to_string(n));
    for (const auto& ep : eps) {
        if (ep.converged) out.checks.expect(std::abs(ep.location - 0.005) <= 1e-8, "EP at " + num(ep.location));
    }
}

void chain_symmetry(Outcome& out) {
    struct Case {
        const char* name;
        std::vector<double> eps;
        bool equal;
    };
    const std::vector<Case> cases{{"fig2a", {0.05, 0.05, 0.05}, true},
                                  {"fig2b", {0.05, 0.05, 0.04}, false},
                                  {"fig2c", {0.05, 0.06, 0.04}, false},
                                  {"fig2d", {0.05, 0.06, 0.04, 0.07, 0.01}, false}};
    const auto sweep = spectra::parse_sweep("lambda:0:0.1:1001");
    for (const auto& c : cases) {
        const auto base = spectra::ChainParams::make(1.0, 0.0, c.eps);
        out.artifact(std::string(c.name) + ".csv", scenarios::spectrum_sweep_csv(base, sweep));
        double worst = 0.0;
        for (std::size_t i = 0; i < sweep.count; ++i) {
            const auto e = spectra::centered_spectrum(spectra::with_parameter(base, "lambda", sweep.at(i)));
            for (const auto& x : e) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& y : e) best = std::min(best, std::abs(x + y));
                worst = std::max(worst, best);
            }
        }
        out.checks.expect(worst <= 1e-9, std::string(c.name) + " negation defect " + num(worst));
        const auto n = spectra::count_converged(spectra::find_exceptional_points(base, sweep));
        out.checks.expect(c.equal ? n == 1 : n >= 2, std::string(c.name) + " EP count " + std::to_string(n));
    }
}

void elimination(Outcome& out) {
    const auto r = run_preset("fig3", out);
    const auto gamma = metric(r, "main", "elimination.gamma");
    out.checks.expect(gamma && std::abs(*gamma - 2.8e-6) <= 5e-8, "Gamma " + show(gamma));
    for (const auto& [label, what] : {std::pair{"before", "lambda=0.8kappa"}, std::pair{"main", "lambda=2kappa"}}) {
        const auto err = metric(r, label, "elimination.max_error");
        out.checks.expect(err && *err < 2.0, std::string(what) + " max error " + show(err) + " (bound 2, first breach t=" +
                                                 metric_text(r, label, "elimination.breach_time") + ")");
    }
}

void phase_transition(Outcome& out) {
    const double kappa = 0.0015;
    const auto a = run_preset("fig4a", out);
    const double rate_oracle = std::sqrt(0.0012 * (kappa - 0.0012));
    const auto rate = metric(a, "main", "growth.rate");
    out.checks.expect(metric_text(a, "main", "classification") == "amplifying",
                      "lambda=0.8kappa " + metric_text(a, "main", "classification"));
    out.checks.expect(rate && std::abs(*rate - rate_oracle) <= 0.05 * rate_oracle,
                      "rate " + show(rate) + " vs " + num(rate_oracle));
    const auto b = run_preset("fig4b", out);
    const double split_oracle = 2.0 * std::sqrt(0.003 * (0.003 - kappa));
    const auto split = metric(b, "main", "beat.splitting");
    out.checks.expect(metric_text(b, "main", "classification") == "bounded-periodic",
                      "lambda=2kappa " + metric_text(b, "main", "classification"));
    out.checks.expect(split && std::abs(*split - split_oracle) <= 0.02 * split_oracle,
                      "splitting " + show(split) + " vs " + num(split_oracle));
}

void analytic_equivalence(Outcome& out) {
    const double kappa = 0.0015;
    ode::IntegratorConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-12;
    for (const double lambda : {0.8 * kappa, 2.0 * kappa}) {
        dynamics::EffectiveParams p;
        p.lambda = lambda;
        p.kappa = kappa;
        const cplx c(100.0, 0.0);
        const auto x0 = dynamics::flatten(dynamics::EffectiveState{c, c});
        const Trajectory num_traj = integrate(p, x0, 5000.0, cfg);
        const Trajectory an = dynamics::analytic_solution(c, c, lambda, kappa, 1.0, num_traj.times());
        out.artifact("numeric_" + num(lambda) + ".csv", to_csv(num_traj));
        out.artifact("analytic_" + num(lambda) + ".csv", to_csv(an));
        double worst = 0.0;
        for (std::size_t i = 0; i < an.size(); ++i) {
            const cplx d1 = num_traj.amplitude(i, Mode::A1) - an.amplitude(i, Mode::A1);
            const cplx d2 = num_traj.amplitude(i, Mode::A2) - an.amplitude(i, Mode::A2);
            const double scale = std::hypot(std::abs(an.amplitude(i, Mode::A1)), std::abs(an.amplitude(i, Mode::A2)));
            worst = std::max(worst, std::hypot(std::abs(d1), std::abs(d2)) / scale);
        }
        out.checks.expect(worst < 1e-6, "lambda=" + num(lambda / kappa) + "kappa relative deviation " + num(worst));
    }
}

void biorthogonal(Outcome& out) {
    std::mt19937_64 rng(20240607);
    std::uniform_real_distribution<double> log_kappa(-4.0, -1.0), ratio(0.01, 3.0), delta(-2.0, 2.0);
    double worst_bi = 0.0, worst_comp = 0.0;
    std::ostringstream log;
    int draws = 0;
    while (draws < 1000) {
        const double kappa = std::pow(10.0, log_kappa(rng));
        const double r = ratio(rng);
        const double d = delta(rng);
        if (std::abs(r - 1.0) < dynamics::kModalGuardBand) continue;
        const auto b = spectra::biorthogonal_basis(r * kappa, kappa, d);
        const double bi = b.biorthogonality_defect();
        const double comp = b.completeness_defect();
        worst_bi = std::max(worst_bi, bi);
        worst_comp = std::max(worst_comp, comp);
        log << num(r * kappa) << ',' << num(kappa) << ',' << num(d) << ',' << num(bi) << ',' << num(comp) << '\n';
        ++draws;
    }
    out.artifact("draws.csv", log.str());
    out.checks.expect(worst_bi < 1e-12, "max |<psi_i|phi_j> - 2delta_ij| " + num(worst_bi));
    out.checks.expect(worst_comp < 1e-12, "max completeness defect " + num(worst_comp));
}

void synchronization(Outcome& out) {
    const auto r = run_preset("fig5d", out);
    const auto lock_min = metric(r, "before", "pearson.min");
    const auto undefined = metric(r, "before", "pearson.undefined");
    out.checks.expect(lock_min && *lock_min > 0.9 && undefined && *undefined == 0.0,
                      "lambda=0.8kappa min C " + show(lock_min) + ", undefined windows " + show(undefined));
    const auto hi = metric(r, "main", "pearson.max");
    const auto lo = metric(r, "main", "pearson.min");
    out.checks.expect(hi && *hi > 0.9, "lambda=2kappa max C " + show(hi));
    out.checks.expect(lo && *lo < -0.9, "lambda=2kappa min C " + show(lo));
}

void dip(Outcome& out) {
    const auto r = run_preset("fig5c", out);
    const auto t = metric(r, "inset", "dip.time");
    const auto v = metric(r, "inset", "dip.value");
    const auto a0 = metric(r, "inset", "dip.initial");
    out.checks.expect(t && *t > 0.0, "first envelope minimum at t=" + show(t));
    out.checks.expect(v && a0 && *v < *a0, "minimum " + show(v) + " vs initial " + show(a0));
}

void chaos(Outcome& out) {
    const auto c = run_preset("fig7c", out);
    const auto lle = metric(c, "main", "lle");
    const auto sig = metric(c, "main", "lle.significance");
    out.checks.expect(lle && *lle > 0.0 && sig && *sig > 3.0, "fig7c LLE " + show(lle) + " at " + show(sig) + " sigma");
    for (const char* name : {"fig7a", "fig8b", "fig8c"}) {
        const auto r = run_preset(name, out);
        const auto s = metric(r, "main", "lle.significance");
        const auto regime = metric_text(r, "main", "classification");
        out.checks.expect(s && *s <= 2.0 && regime == "bounded-periodic",
                          std::string(name) + " LLE " + show(metric(r, "main", "lle")) + " at " + show(s) +
                              " sigma, " + regime);
    }
    const auto d = run_preset("fig8d", out);
    const auto frac = metric(d, "main", "divergence.max_fraction");
    const auto when = metric(d, "main", "divergence.time");
    out.checks.expect(frac && *frac > 0.1 && when && *when < 3000.0,
                      "fig8d separation " + show(frac) + " of scale, 10% crossed at t=" + show(when));
    const auto s = run_preset("fig8a", out);
    const auto max_im = metric(s, "dashed", "spectrum.max_im");
    const auto argmax = metric(s, "dashed", "spectrum.argmax");
    out.checks.expect(max_im && std::abs(*max_im) <= 1e-12 && argmax && std::abs(*argmax - 0.1) < 1e-9,
                      "kappa_ceff=kappa_c max Im E " + show(max_im) + " at lambda_c=" + show(argmax));
    const auto point = metric(s, "main", "point.im_e_plus");
    out.checks.expect(point && std::abs(*point - 0.0618) <= 1e-4, "Im E+ at point A " + show(point));
}

struct Definition {
    int id;
    const char* name;
    const char* suite;
    double budget;
    std::function<void(Outcome&)> run;
};

const std::vector<Definition>& definitions() {
    static const std::vector<Definition> defs{
        {1, "spectrum-dichotomy", "spectra", 1.0, spectrum_dichotomy},
        {2, "gain-loss-comparison", "spectra", 1.0, gain_loss},
        {3, "chain-symmetry", "spectra", 5.0, chain_symmetry},
        {4, "elimination-validity", "elimination", 30.0, elimination},
        {5, "phase-transition", "phase", 10.0, phase_transition},
        {6, "analytic-numeric", "modal", 10.0, analytic_equivalence},
        {7, "biorthogonal-algebra", "biorthogonal", 1.0, biorthogonal},
        {8, "synchronization", "sync", 10.0, synchronization},
        {9, "dissipation-dip", "dip", 10.0, dip},
        {10, "chaos-pattern", "chaos", 120.0, chaos},
    };
    return defs;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"spectra", "elimination", "phase",       "modal", "biorthogonal",
                                                "sync",    "dip",         "determinism", "chaos", "all"};
    return names;
}

std::vector<int> suite_criteria(const std::string& suite) {
    if (suite == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    if (suite == "determinism") return {11};
    std::vector<int> ids;
    for (const auto& d : definitions()) {
        if (suite == d.suite) ids.push_back(d.id);
    }
    if (ids.empty()) throw ConfigError("unknown suite '" + suite + "'");
    return ids;
}

CriterionResult run_criterion(int id) {
    for (const auto& d : definitions()) {
        if (d.id != id) continue;
        CriterionResult r;
        r.id = d.id;
        r.name = d.name;
        r.suite = d.suite;
        r.budget = d.budget;
        Outcome out;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            d.run(out);
        } catch (const std::exception& e) {
            out.checks.expect(false, std::string("exception: ") + e.what());
        }
        r.seconds = elapsed(t0);
        r.checks_passed = out.checks.ok();
        r.detail = out.checks.detail();
        r.digests = std::move(out.digests);
        return r;
    }
    throw ConfigError("no criterion " + std::to_string(id) + " (criterion 11 runs through run_suite)");
}

std::vector<CriterionResult> run_suite(const std::string& suite) {
    std::vector<CriterionResult> results;
    std::map<int, const CriterionResult*> first;
    for (const int id : suite_criteria(suite)) {
        if (id != 11) {
            results.push_back(run_criterion(id));
            continue;
        }
        for (const auto& r : results) first[r.id] = &r;
        CriterionResult det;
        det.id = 11;
        det.name = "determinism";
        det.suite = "determinism";
        det.budget = 600.0;
        const auto t0 = std::chrono::steady_clock::now();
        Checks checks;
        std::size_t compared = 0;
        std::vector<CriterionResult> own;
        own.reserve(10);
        for (int k = 1; k <= 10; ++k) {
            const CriterionResult* a = first.count(k) ? first[k] : &own.emplace_back(run_criterion(k));
            const CriterionResult b = run_criterion(k);
            bool same = a->digests == b.digests;
            compared += a->digests.size();
            checks.expect(same && !a->digests.empty(),
                          "criterion " + std::to_string(k) + ": " + std::to_string(a->digests.size()) + " artifacts " +
                              (same ? "identical" : "differ"));
        }
        det.seconds = elapsed(t0);
        det.checks_passed = checks.ok();
        det.detail = std::to_string(compared) + " digests compared; " + checks.detail();
        results.push_back(det);
    }
    return results;
}

std::string summary_line(const CriterionResult& r) {
    std::string detail = r.detail;
    if (!r.within_budget()) detail = "over runtime budget; " + detail;
    for (auto& ch : detail) {
        if (ch == '"') ch = '\'';
    }
    std::ostringstream os;
    os << "criterion=" << r.id << " suite=" << r.suite << " name=" << r.name << " status=" << (r.pass() ? "pass" : "fail")
       << " seconds=" << std::fixed << std::setprecision(3) << r.seconds << " budget=" << std::setprecision(0) << r.budget
       << " detail=\"" << detail << '"';
    return os.str();
}

} // namespace nhsim::acceptance

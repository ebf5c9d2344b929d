#include "nhsim/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "nhsim/error.hpp"

namespace nhsim::scenarios {

using config::Config;

namespace {

enum class Kind { Number, Text, Flag, List, Method, Sweep, FieldOrOff, ModeOrOff, FieldPair, FieldPairOrOff };

struct KeySpec {
    std::string key;
    std::string def; // empty: required
    Kind kind;
    bool nonnegative = false;
};

using Schema = std::vector<KeySpec>;

const std::vector<std::string> kModels{"two-mode", "gain-loss", "chain", "cavity-pair", "exact", "effective", "chaos"};

void append(Schema& s, const Schema& more) { s.insert(s.end(), more.begin(), more.end()); }

Schema chaos_params() {
    return {{"params.omega_cm", "1", Kind::Number},
            {"params.gamma", "0.038/46", Kind::Number, true},
            {"params.g0", "0.01", Kind::Number},
            {"params.delta_c", "1", Kind::Number},
            {"params.kappa_c", "0.2", Kind::Number, true},
            {"params.drive", "2", Kind::Number},
            {"params.delta_ceff", "1", Kind::Number},
            {"params.kappa_ceff", "0", Kind::Number, true},
            {"params.lambda_c", "0.1", Kind::Number, true},
            {"params.asymmetric", "on", Kind::Flag}};
}

Schema integration_keys(const std::string& t_end) {
    return {{"t_end", t_end, Kind::Number},
            {"integrator.method", "dopri45", Kind::Method},
            {"integrator.rel_tol", "1e-9", Kind::Number},
            {"integrator.abs_tol", "1e-12", Kind::Number},
            {"integrator.max_step", "0.1", Kind::Number},
            {"integrator.output_stride", "0.5", Kind::Number}};
}

Schema diagnostic_keys() {
    return {{"diagnostics.growth", "off", Kind::FieldOrOff},
            {"diagnostics.growth_from", "0.5", Kind::Number},
            {"diagnostics.beat", "off", Kind::ModeOrOff},
            {"diagnostics.pearson", "off", Kind::FieldPairOrOff},
            {"diagnostics.pearson_window", "10", Kind::Number},
            {"diagnostics.dip", "off", Kind::FieldOrOff},
            {"diagnostics.lyapunov", "off", Kind::Flag},
            {"diagnostics.lyapunov_horizon", "3000", Kind::Number},
            {"diagnostics.lyapunov_interval", "10", Kind::Number},
            {"diagnostics.lyapunov_perturbation", "1e-8", Kind::Number},
            {"diagnostics.classify", "off", Kind::Flag},
            {"diagnostics.divergence", "off", Kind::Text},
            {"diagnostics.divergence_fraction", "0.1", Kind::Number}};
}

Schema initial_keys() {
    return {{"init.re_a1", "100", Kind::Number},
            {"init.im_a1", "0", Kind::Number},
            {"init.re_a2", "100", Kind::Number},
            {"init.im_a2", "0", Kind::Number}};
}

Schema schema_for(const std::string& model) {
    Schema s{{"name", "custom", Kind::Text}, {"description", "none", Kind::Text}, {"model", "", Kind::Text}};
    if (model == "two-mode") {
        append(s, {{"params.omega", "1", Kind::Number},
                   {"params.lambda", "0", Kind::Number, true},
                   {"params.epsilon", "0", Kind::Number},
                   {"sweep", "lambda:0:0.05:501", Kind::Sweep},
                   {"diagnostics.exceptional_points", "on", Kind::Flag}});
    } else if (model == "gain-loss") {
        append(s, {{"params.omega", "1", Kind::Number},
                   {"params.mu", "0", Kind::Number},
                   {"params.kappa", "0", Kind::Number, true},
                   {"sweep", "mu:0:0.05:501", Kind::Sweep},
                   {"diagnostics.exceptional_points", "on", Kind::Flag}});
    } else if (model == "chain") {
        append(s, {{"params.omega", "1", Kind::Number},
                   {"params.lambda", "0", Kind::Number, true},
                   {"params.n", "4", Kind::Number},
                   {"params.epsilons", "0.05,0.05,0.05", Kind::List},
                   {"sweep", "lambda:0:0.1:1001", Kind::Sweep},
                   {"diagnostics.exceptional_points", "on", Kind::Flag}});
    } else if (model == "cavity-pair") {
        append(s, chaos_params());
        append(s, {{"sweep", "lambda_c:0:0.3:301", Kind::Sweep}});
    } else if (model == "exact") {
        append(s, {{"params.delta1", "1", Kind::Number},
                   {"params.delta2", "1", Kind::Number},
                   {"params.omega_m", "1.05", Kind::Number},
                   {"params.G", "0.015", Kind::Number},
                   {"params.G_im", "0", Kind::Number},
                   {"params.kappa", "0.0015", Kind::Number, true},
                   {"params.gamma_m", "0.584", Kind::Number, true},
                   {"params.lambda", "0.003", Kind::Number, true},
                   {"params.tau", "0", Kind::Number, true}});
        append(s, initial_keys());
        append(s, {{"init.beta_ratio", "20", Kind::Number}});
        append(s, integration_keys("5000"));
        append(s, diagnostic_keys());
        append(s, {{"diagnostics.elimination", "off", Kind::Flag}, {"diagnostics.elimination_bound", "2", Kind::Number}});
    } else if (model == "effective") {
        append(s, {{"params.delta_eff1", "1", Kind::Number},
                   {"params.delta_eff2", "1", Kind::Number},
                   {"params.Gamma", "0", Kind::Number},
                   {"params.lambda", "0.003", Kind::Number, true},
                   {"params.kappa", "0.0015", Kind::Number, true}});
        append(s, initial_keys());
        append(s, integration_keys("5000"));
        append(s, diagnostic_keys());
    } else if (model == "chaos") {
        append(s, chaos_params());
        append(s, {{"init.q", "0", Kind::Number},
                   {"init.p", "0", Kind::Number},
                   {"init.re_a1", "10", Kind::Number},
                   {"init.im_a1", "0", Kind::Number},
                   {"init.re_a2", "100", Kind::Number},
                   {"init.im_a2", "0", Kind::Number}});
        append(s, integration_keys("3000"));
        append(s, diagnostic_keys());
        append(s, {{"diagnostics.phase_plane", "re_a1,im_a1", Kind::FieldPair}});
    } else {
        throw ConfigError("unknown model '" + model + "'");
    }
    return s;
}

const KeySpec* spec_of(const Schema& s, const std::string& key) {
    for (const auto& k : s) {
        if (k.key == key) return &k;
    }
    return nullptr;
}

bool variant_overridable(const std::string& key) {
    return key.rfind("params.", 0) == 0 || key.rfind("init.", 0) == 0 || key.rfind("integrator.", 0) == 0 ||
           key == "t_end" || key == "sweep";
}

const std::vector<std::string> kAssertFields{"metric", "variant", "op", "value", "tol"};
const std::set<std::string> kOps{"<", "<=", ">", ">=", "==", "is"};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(config::trim(item));
    return out;
}

void check_value(const Config& c, const KeySpec& k) {
    const std::string v = c.text(k.key);
    try {
        switch (k.kind) {
        case Kind::Number: {
            const double x = config::evaluate(v);
            if (k.nonnegative && x < 0.0) c.fail(k.key, "out of range, must be >= 0 (got " + v + ")");
            break;
        }
        case Kind::Flag: config::parse_flag(v); break;
        case Kind::List:
            for (const auto& item : split(v, ',')) config::evaluate(item);
            break;
        case Kind::Method: ode::parse_method(v); break;
        case Kind::Sweep: spectra::parse_sweep(v).validate(); break;
        case Kind::FieldOrOff:
            if (v != "off") parse_field(v);
            break;
        case Kind::ModeOrOff:
            if (v != "off") parse_mode(v);
            break;
        case Kind::FieldPairOrOff:
            if (v == "off") break;
            [[fallthrough]];
        case Kind::FieldPair: {
            const auto parts = split(v, ',');
            if (parts.size() != 2) throw ConfigError("expected two comma-separated fields");
            parse_field(parts[0]);
            parse_field(parts[1]);
            break;
        }
        case Kind::Text: break;
        }
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        if (msg.rfind("line ", 0) == 0 || msg.rfind(k.key, 0) == 0) throw;
        c.fail(k.key, msg);
    } catch (const InvalidParameter& e) {
        c.fail(k.key, e.what());
    }
}

// Orders entries canonically, fills defaults and validates everything.
Config canonicalize(const Config& in) {
    if (!in.has("model")) {
        throw ConfigError("missing required key 'model'");
    }
    const std::string model = in.text("model");
    if (std::find(kModels.begin(), kModels.end(), model) == kModels.end()) {
        in.fail("model", "unknown model '" + model + "'");
    }
    const Schema schema = schema_for(model);

    std::vector<std::string> variant_labels, assert_ids;
    for (const auto& e : in.entries()) {
        if (spec_of(schema, e.key)) continue;
        const auto parts = split(e.key, '.');
        if (parts[0] == "variant") {
            if (parts.size() < 3) in.fail(e.key, "expected variant.<label>.<key>");
            const std::string& label = parts[1];
            if (label == "main") in.fail(e.key, "'main' is reserved for the base run");
            const std::string sub = e.key.substr(8 + label.size() + 1);
            if (!spec_of(schema, sub) || !variant_overridable(sub)) {
                in.fail(e.key, "variant cannot override '" + sub + "'");
            }
            if (std::find(variant_labels.begin(), variant_labels.end(), label) == variant_labels.end()) {
                variant_labels.push_back(label);
            }
        } else if (parts[0] == "assert") {
            if (parts.size() != 3 ||
                std::find(kAssertFields.begin(), kAssertFields.end(), parts[2]) == kAssertFields.end()) {
                in.fail(e.key, "expected assert.<id>.{metric,variant,op,value,tol}");
            }
            if (std::find(assert_ids.begin(), assert_ids.end(), parts[1]) == assert_ids.end()) {
                assert_ids.push_back(parts[1]);
            }
        } else {
            in.fail(e.key, "unknown key for model '" + model + "'");
        }
    }

    Config out;
    auto copy = [&](const std::string& key) -> bool {
        if (const auto* e = in.find(key)) {
            out.set(key, e->value, e->defaulted).line = e->line;
            return true;
        }
        return false;
    };
    for (const auto& k : schema) {
        if (!copy(k.key)) {
            if (k.def.empty()) throw ConfigError("missing required key '" + k.key + "'");
            out.set(k.key, k.def, true);
        }
    }
    for (const auto& label : variant_labels) {
        for (const auto& e : in.with_prefix("variant." + label + ".")) copy(e.key);
    }
    for (const auto& id : assert_ids) {
        const std::string base = "assert." + id + ".";
        for (const auto& f : kAssertFields) {
            if (copy(base + f)) continue;
            if (f == "variant") out.set(base + f, "main", true);
            else if (f == "tol") out.set(base + f, "0", true);
            else throw ConfigError("assertion '" + id + "' is missing '" + f + "'");
        }
    }

    // Validation of every value, including variant overrides.
    for (const auto& k : schema) check_value(out, k);
    for (const auto& label : variant_labels) {
        for (const auto& e : out.with_prefix("variant." + label + ".")) {
            const std::string sub = e.key.substr(8 + label.size() + 1);
            KeySpec k = *spec_of(schema, sub);
            k.key = e.key;
            check_value(out, k);
        }
    }
    for (const auto& id : assert_ids) {
        const std::string base = "assert." + id + ".";
        const std::string op = out.text(base + "op");
        if (!kOps.count(op)) out.fail(base + "op", "unknown operator '" + op + "'");
        if (op != "is") out.number(base + "value");
        if (out.number(base + "tol") < 0.0) out.fail(base + "tol", "must be >= 0");
        const std::string v = out.text(base + "variant");
        if (v != "main" && std::find(variant_labels.begin(), variant_labels.end(), v) == variant_labels.end()) {
            out.fail(base + "variant", "unknown variant '" + v + "'");
        }
    }
    if (out.has("diagnostics.divergence")) {
        const std::string target = out.text("diagnostics.divergence");
        if (target != "off" && std::find(variant_labels.begin(), variant_labels.end(), target) == variant_labels.end()) {
            out.fail("diagnostics.divergence", "unknown variant '" + target + "'");
        }
    }
    return out;
}

std::string fmt(double v) { return format_number(v); }

} // namespace

const std::vector<std::string>& model_tags() { return kModels; }

bool is_spectral(const std::string& model) {
    return model == "two-mode" || model == "gain-loss" || model == "chain" || model == "cavity-pair";
}

// ---------------------------------------------------------------------------

Scenario::Scenario(Config cfg) : cfg_(canonicalize(cfg)) {
    // Typed construction catches cross-field problems (chain length, τ != 0, ...).
    for (const auto& label : runs()) {
        const Config c = resolved(label);
        try {
            if (model() == "cavity-pair") {
                std::get<dynamics::ChaosParams>(build_model(c)).validate();
            } else if (is_spectral(model())) {
                build_family(c);
            } else {
                dynamics::validate(build_model(c));
                build_initial_state(c);
                build_integrator(c).validate();
                if (!(c.number("t_end") > 0.0)) throw InvalidParameter("t_end must be > 0");
            }
        } catch (const InvalidParameter& e) {
            throw ConfigError((label == "main" ? "" : "variant " + label + ": ") + std::string(e.what()));
        }
    }
}

std::vector<std::string> Scenario::runs() const {
    std::vector<std::string> out{"main"};
    for (const auto& e : cfg_.with_prefix("variant.")) {
        const std::string label = split(e.key, '.')[1];
        if (std::find(out.begin(), out.end(), label) == out.end()) out.push_back(label);
    }
    return out;
}

Config Scenario::resolved(const std::string& label) const {
    Config c;
    for (const auto& e : cfg_.entries()) {
        if (e.key.rfind("variant.", 0) == 0 || e.key.rfind("assert.", 0) == 0) continue;
        c.set(e.key, e.value, e.defaulted).line = e.line;
    }
    if (label != "main") {
        const std::string prefix = "variant." + label + ".";
        const auto over = cfg_.with_prefix(prefix);
        if (over.empty()) throw ConfigError("unknown variant '" + label + "'");
        for (const auto& e : over) c.set(e.key.substr(prefix.size()), e.value, false).line = e.line;
    }
    return c;
}

void Scenario::apply_override(const std::string& key, const std::string& value) {
    if (!cfg_.has(key)) {
        throw ConfigError("override of unknown key '" + key + "'");
    }
    if (key == "model") {
        throw ConfigError("the model of a scenario cannot be overridden");
    }
    Config next = cfg_;
    next.set(key, value, false).line = 0;
    *this = Scenario(next);
}

// ---------------------------------------------------------------------------

dynamics::ModelSpec build_model(const Config& c) {
    const std::string model = c.text("model");
    if (model == "exact") {
        dynamics::OptomechParams p;
        p.delta = {c.number("params.delta1"), c.number("params.delta2")};
        p.omega_m = c.number("params.omega_m");
        p.coupling = cplx(c.number("params.G"), c.number("params.G_im"));
        p.kappa = c.number("params.kappa");
        p.gamma_m = c.number("params.gamma_m");
        p.lambda = c.number("params.lambda");
        p.retardation = c.number("params.tau");
        return p;
    }
    if (model == "effective") {
        dynamics::EffectiveParams p;
        p.delta_eff = {c.number("params.delta_eff1"), c.number("params.delta_eff2")};
        const double gamma = c.number("params.Gamma");
        p.dissipation = {gamma, gamma};
        p.lambda = c.number("params.lambda");
        p.kappa = c.number("params.kappa");
        return p;
    }
    if (model == "chaos" || model == "cavity-pair") {
        dynamics::ChaosParams p;
        p.omega_cm = c.number("params.omega_cm");
        p.gamma = c.number("params.gamma");
        p.g0 = c.number("params.g0");
        p.delta_c = c.number("params.delta_c");
        p.kappa_c = c.number("params.kappa_c");
        p.drive = c.number("params.drive");
        p.delta_ceff = c.number("params.delta_ceff");
        p.kappa_ceff = c.number("params.kappa_ceff");
        p.lambda_c = c.number("params.lambda_c");
        p.asymmetric = c.flag("params.asymmetric");
        return p;
    }
    throw ConfigError("model '" + model + "' is not integrable");
}

std::vector<double> build_initial_state(const Config& c) {
    const std::string model = c.text("model");
    const cplx a1(c.number("init.re_a1"), c.number("init.im_a1"));
    const cplx a2(c.number("init.re_a2"), c.number("init.im_a2"));
    if (model == "exact") {
        return dynamics::flatten(dynamics::exact_initial_state(a1, a2, c.number("init.beta_ratio")));
    }
    if (model == "effective") {
        return dynamics::flatten(dynamics::EffectiveState{a1, a2});
    }
    if (model == "chaos") {
        return dynamics::flatten(dynamics::ChaosState{c.number("init.q"), c.number("init.p"), a1, a2});
    }
    throw ConfigError("model '" + model + "' has no initial state");
}

ode::IntegratorConfig build_integrator(const Config& c) {
    ode::IntegratorConfig cfg;
    cfg.method = ode::parse_method(c.text("integrator.method"));
    cfg.rel_tol = c.number("integrator.rel_tol");
    cfg.abs_tol = c.number("integrator.abs_tol");
    cfg.max_step = c.number("integrator.max_step");
    cfg.output_stride = c.number("integrator.output_stride");
    return cfg;
}

spectra::FamilyParams build_family(const Config& c) {
    const std::string model = c.text("model");
    if (model == "two-mode") {
        spectra::TwoModeParams p{c.number("params.omega"), c.number("params.lambda"), c.number("params.epsilon")};
        p.validate();
        return p;
    }
    if (model == "gain-loss") {
        spectra::GainLossParams p{c.number("params.omega"), c.number("params.mu"), c.number("params.kappa")};
        p.validate();
        return p;
    }
    if (model == "chain") {
        auto p = spectra::ChainParams::make(c.number("params.omega"), c.number("params.lambda"),
                                            c.numbers("params.epsilons"));
        const double n = c.number("params.n");
        if (n != static_cast<double>(p.sites)) {
            c.fail("params.n", "chain of " + fmt(n) + " sites needs " + fmt(n - 1) + " epsilons, got " +
                                   std::to_string(p.epsilons.size()));
        }
        p.validate();
        return p;
    }
    throw ConfigError("model '" + model + "' is not a Hamiltonian family");
}

dynamics::ChaosParams with_chaos_parameter(const dynamics::ChaosParams& base, const std::string& name, double value) {
    dynamics::ChaosParams p = base;
    if (name == "lambda_c") p.lambda_c = value;
    else if (name == "kappa_c") p.kappa_c = value;
    else if (name == "kappa_ceff") p.kappa_ceff = value;
    else if (name == "delta_c") p.delta_c = value;
    else if (name == "delta_ceff") p.delta_ceff = value;
    else throw InvalidParameter("cavity pair has no sweepable parameter '" + name + "'");
    return p;
}

std::string spectrum_sweep_csv(const spectra::FamilyParams& base, const spectra::Sweep& sweep) {
    sweep.validate();
    std::ostringstream os;
    os << "sweep_param,k,re_E,im_E\n";
    for (std::size_t i = 0; i < sweep.count; ++i) {
        const double x = sweep.at(i);
        const auto r = spectra::spectrum(spectra::with_parameter(base, sweep.parameter, x));
        for (std::size_t k = 0; k < r.energies.size(); ++k) {
            os << fmt(x) << ',' << k << ',' << fmt(r.energies[k].real()) << ',' << fmt(r.energies[k].imag()) << '\n';
        }
    }
    return os.str();
}

std::string cavity_pair_sweep_csv(const dynamics::ChaosParams& base, const spectra::Sweep& sweep) {
    sweep.validate();
    std::ostringstream os;
    os << "sweep_param,k,re_E,im_E\n";
    for (std::size_t i = 0; i < sweep.count; ++i) {
        const double x = sweep.at(i);
        const auto r = dynamics::chaos_subsystem_spectrum(with_chaos_parameter(base, sweep.parameter, x));
        for (std::size_t k = 0; k < r.energies.size(); ++k) {
            os << fmt(x) << ',' << k << ',' << fmt(r.energies[k].real()) << ',' << fmt(r.energies[k].imag()) << '\n';
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Presets

namespace {

struct Preset {
    const char* name;
    const char* text;
};

const Preset kPresets[] = {
    {"fig1a", R"(name = fig1a
description = Two-mode spectrum against lambda at epsilon = 0.01
model = two-mode
params.omega = 1
params.epsilon = 0.01
sweep = lambda:0:0.05:501
assert.ep_count.metric = ep.count
assert.ep_count.op = ==
assert.ep_count.value = 1
assert.ep_location.metric = ep.first
assert.ep_location.op = ==
assert.ep_location.value = 0.01
assert.ep_location.tol = 1e-8
)"},
    {"fig1b", R"(name = fig1b
description = Two-mode spectrum against epsilon at lambda = 0.02
model = two-mode
params.omega = 1
params.lambda = 0.02
sweep = epsilon:0:0.05:501
assert.ep_count.metric = ep.count
assert.ep_count.op = ==
assert.ep_count.value = 1
assert.ep_location.metric = ep.first
assert.ep_location.op = ==
assert.ep_location.value = 0.02
assert.ep_location.tol = 1e-8
)"},
    {"fig1e", R"(name = fig1e
description = Gain-loss spectrum against mu at kappa = 0.01
model = gain-loss
params.omega = 1
params.kappa = 0.01
sweep = mu:0:0.05:501
assert.ep_count.metric = ep.count
assert.ep_count.op = ==
assert.ep_count.value = 1
assert.ep_location.metric = ep.first
assert.ep_location.op = ==
assert.ep_location.value = 0.005
assert.ep_location.tol = 1e-8
)"},
    {"fig2a", R"(name = fig2a
description = Four-site chain, equal asymmetries
model = chain
params.omega = 1
params.n = 4
params.epsilons = 0.05,0.05,0.05
sweep = lambda:0:0.1:1001
assert.single_ep.metric = ep.count
assert.single_ep.op = ==
assert.single_ep.value = 1
)"},
    {"fig2b", R"(name = fig2b
description = Four-site chain, one asymmetry detuned
model = chain
params.omega = 1
params.n = 4
params.epsilons = 0.05,0.05,0.04
sweep = lambda:0:0.1:1001
assert.split_eps.metric = ep.count
assert.split_eps.op = >=
assert.split_eps.value = 2
)"},
    {"fig2c", R"(name = fig2c
description = Four-site chain, all asymmetries distinct
model = chain
params.omega = 1
params.n = 4
params.epsilons = 0.05,0.06,0.04
sweep = lambda:0:0.1:1001
assert.split_eps.metric = ep.count
assert.split_eps.op = >=
assert.split_eps.value = 2
)"},
    {"fig2d", R"(name = fig2d
description = Six-site chain with distinct asymmetries
model = chain
params.omega = 1
params.n = 6
params.epsilons = 0.05,0.06,0.04,0.07,0.01
sweep = lambda:0:0.1:1001
assert.split_eps.metric = ep.count
assert.split_eps.op = >=
assert.split_eps.value = 2
)"},
    {"fig3", R"(name = fig3
description = Full optomechanical model against its reduced form
model = exact
params.delta1 = 1
params.delta2 = 1
params.omega_m = 1.05
params.G = 0.015
params.kappa = 0.0015
params.gamma_m = 0.584
params.lambda = 0.003
init.re_a1 = 100
init.re_a2 = 100
init.beta_ratio = 20
t_end = 5000
diagnostics.elimination = on
variant.before.params.lambda = 0.0012
assert.gamma.metric = elimination.gamma
assert.gamma.op = ==
assert.gamma.value = 2.8e-6
assert.gamma.tol = 5e-8
assert.error_after.metric = elimination.max_error
assert.error_after.op = <
assert.error_after.value = 2
assert.error_before.metric = elimination.max_error
assert.error_before.variant = before
assert.error_before.op = <
assert.error_before.value = 2
)"},
    {"fig4a", R"(name = fig4a
description = Reduced model before the exceptional point
model = effective
params.delta_eff1 = 1
params.delta_eff2 = 1
params.Gamma = 0
params.lambda = 0.0012
params.kappa = 0.0015
t_end = 5000
diagnostics.growth = re_a1
diagnostics.classify = on
assert.regime.metric = classification
assert.regime.op = is
assert.regime.value = amplifying
assert.rate.metric = growth.rate
assert.rate.op = ==
assert.rate.value = 6.0e-4
assert.rate.tol = 3.0e-5
)"},
    {"fig4b", R"(name = fig4b
description = Reduced model past the exceptional point
model = effective
params.delta_eff1 = 1
params.delta_eff2 = 1
params.Gamma = 0
params.lambda = 0.003
params.kappa = 0.0015
t_end = 5000
diagnostics.growth = re_a1
diagnostics.beat = a1
diagnostics.classify = on
assert.regime.metric = classification
assert.regime.op = is
assert.regime.value = bounded-periodic
assert.splitting.metric = beat.splitting
assert.splitting.op = ==
assert.splitting.value = 4.2426e-3
assert.splitting.tol = 8.5e-5
)"},
    {"fig5a", R"(name = fig5a
description = Field amplitudes before the exceptional point
model = effective
params.delta_eff1 = 1
params.delta_eff2 = 1
params.Gamma = 0
params.lambda = 0.0012
params.kappa = 0.0015
t_end = 5000
diagnostics.growth = re_a1
diagnostics.classify = on
assert.regime.metric = classification
assert.regime.op = is
assert.regime.value = amplifying
)"},
    {"fig5b", R"(name = fig5b
description = Field amplitudes past the exceptional point
model = effective
params.delta_eff1 = 1
params.delta_eff2 = 1
params.Gamma = 0
params.lambda = 0.003
params.kappa = 0.0015
t_end = 5000
diagnostics.growth = re_a1
diagnostics.beat = a1
diagnostics.classify = on
assert.regime.metric = classification
assert.regime.op = is
assert.regime.value = bounded-periodic
)"},
    {"fig5c", R"(name = fig5c
description = Unbalanced dissipation; the inset run dips before growing
model = effective
params.delta_eff1 = 1
params.delta_eff2 = 1
params.Gamma = 0.001
params.lambda = 0.003
params.kappa = 0.0015
t_end = 5000
diagnostics.dip = abs_a2
variant.inset.params.lambda = 0.0012
assert.inset_dip.metric = dip.below_initial
assert.inset_dip.variant = inset
assert.inset_dip.op = ==
assert.inset_dip.value = 1
)"},
    {"fig5d", R"(name = fig5d
description = Windowed Pearson factor of Re a1 and Re a2
model = effective
params.delta_eff1 = 1
params.delta_eff2 = 1
params.Gamma = 0
params.lambda = 0.003
params.kappa = 0.0015
t_end = 5000
diagnostics.pearson = re_a1,re_a2
diagnostics.pearson_window = 10
variant.before.params.lambda = 0.0012
assert.sync.metric = pearson.max
assert.sync.op = >
assert.sync.value = 0.9
assert.antisync.metric = pearson.min
assert.antisync.op = <
assert.antisync.value = -0.9
assert.locked.metric = pearson.min
assert.locked.variant = before
assert.locked.op = >
assert.locked.value = 0.9
)"},
    {"fig7a", R"(name = fig7a
description = Symmetric coupling: periodic motion
model = chaos
params.omega_cm = 1
params.gamma = 0.038/46
params.g0 = 0.01
params.delta_c = 1
params.kappa_c = 0.2
params.drive = 2
params.delta_ceff = 1
params.kappa_ceff = 0
params.lambda_c = 0.1
params.asymmetric = off
init.q = 0
init.p = 0
init.re_a1 = 10
init.re_a2 = 100
t_end = 3000
diagnostics.growth = re_a1
diagnostics.lyapunov = on
diagnostics.classify = on
assert.regime.metric = classification
assert.regime.op = is
assert.regime.value = bounded-periodic
assert.lle.metric = lle.significance
assert.lle.op = <=
assert.lle.value = 2
)"},
    {"fig7c", R"(name = fig7c
description = Asymmetric coupling: chaotic motion
model = chaos
params.omega_cm = 1
params.gamma = 0.038/46
params.g0 = 0.01
params.delta_c = 1
params.kappa_c = 0.2
params.drive = 2
params.delta_ceff = 1
params.kappa_ceff = 0
params.lambda_c = 0.1
params.asymmetric = on
init.q = 0
init.p = 0
init.re_a1 = 10
init.re_a2 = 100
t_end = 3000
diagnostics.growth = re_a1
diagnostics.lyapunov = on
diagnostics.classify = on
assert.regime.metric = classification
assert.regime.op = is
assert.regime.value = chaotic
assert.lle.metric = lle.significance
assert.lle.op = >
assert.lle.value = 3
)"},
    {"fig8a", R"(name = fig8a
description = Cavity-pair spectrum without the optomechanical term
model = cavity-pair
params.omega_cm = 1
params.gamma = 0.038/46
params.g0 = 0.01
params.delta_c = 1
params.kappa_c = 0.2
params.drive = 2
params.delta_ceff = 1
params.kappa_ceff = 0
params.lambda_c = 0.1
params.asymmetric = on
sweep = lambda_c:0:0.3:301
variant.dashed.params.kappa_ceff = 0.2
assert.point_a.metric = point.im_e_plus
assert.point_a.op = ==
assert.point_a.value = 0.0618
assert.point_a.tol = 1e-4
assert.dashed_max.metric = spectrum.max_im
assert.dashed_max.variant = dashed
assert.dashed_max.op = ==
assert.dashed_max.value = 0
assert.dashed_max.tol = 1e-12
)"},
    {"fig8b", R"(name = fig8b
description = Coupling past the exceptional point: no chaos
model = chaos
params.omega_cm = 1
params.gamma = 0.038/46
params.g0 = 0.01
params.delta_c = 1
params.kappa_c = 0.2
params.drive = 2
params.delta_ceff = 1
params.kappa_ceff = 0
params.lambda_c = 0.25
params.asymmetric = on
init.q = 0
init.p = 0
init.re_a1 = 10
init.re_a2 = 100
t_end = 3000
diagnostics.growth = re_a1
diagnostics.lyapunov = on
diagnostics.classify = on
assert.regime.metric = classification
assert.regime.op = is
assert.regime.value = bounded-periodic
assert.lle.metric = lle.significance
assert.lle.op = <=
assert.lle.value = 2
)"},
    {"fig8c", R"(name = fig8c
description = No heating mechanism: periodic motion returns
model = chaos
params.omega_cm = 1
params.gamma = 0.038/46
params.g0 = 0.01
params.delta_c = 1
params.kappa_c = 0.2
params.drive = 2
params.delta_ceff = 1
params.kappa_ceff = 0.2
params.lambda_c = 0.1
params.asymmetric = on
init.q = 0
init.p = 0
init.re_a1 = 10
init.re_a2 = 100
t_end = 3000
diagnostics.growth = re_a1
diagnostics.lyapunov = on
diagnostics.classify = on
assert.regime.metric = classification
assert.regime.op = is
assert.regime.value = bounded-periodic
assert.lle.metric = lle.significance
assert.lle.op = <=
assert.lle.value = 2
)"},
    {"fig8d", R"(name = fig8d
description = Sensitivity to the initial field
model = chaos
params.omega_cm = 1
params.gamma = 0.038/46
params.g0 = 0.01
params.delta_c = 1
params.kappa_c = 0.2
params.drive = 2
params.delta_ceff = 1
params.kappa_ceff = 0
params.lambda_c = 0.1
params.asymmetric = on
init.q = 0
init.p = 0
init.re_a1 = 10
init.re_a2 = 100
t_end = 3000
diagnostics.divergence = shifted
variant.shifted.init.re_a1 = 10.5
assert.diverges.metric = divergence.max_fraction
assert.diverges.op = >
assert.diverges.value = 0.1
assert.before_end.metric = divergence.time
assert.before_end.op = <
assert.before_end.value = 3000
)"},
};

} // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& p : kPresets) out.emplace_back(p.name);
    return out;
}

std::string preset_text(const std::string& name) {
    for (const auto& p : kPresets) {
        if (name == p.name) return p.text;
    }
    throw ConfigError("unknown scenario '" + name + "'");
}

Scenario scenario_from_text(const std::string& text, const std::string& source) {
    return Scenario(config::parse_string(text, source));
}

Scenario load_scenario(const std::string& name_or_path) {
    for (const auto& p : kPresets) {
        if (name_or_path == p.name) return scenario_from_text(p.text, p.name);
    }
    std::ifstream in(name_or_path);
    if (!in) {
        throw ConfigError("unknown scenario '" + name_or_path + "' (not a preset and not a readable file)");
    }
    Config cfg = config::parse(in, name_or_path);
    if (!cfg.has("name")) {
        cfg.set("name", std::filesystem::path(name_or_path).stem().string(), true);
    }
    return Scenario(cfg);
}

std::string serialize(const Scenario& s) { return config::serialize(s.config()); }

// ---------------------------------------------------------------------------
// Running

namespace {

struct FileOut {
    std::string name;
    std::string bytes;
};

void put(VariantResult& r, const std::string& key, double v) {
    r.metrics.push_back({key, Metric{v, fmt(v)}});
}

void put_text(VariantResult& r, const std::string& key, const std::string& v) {
    r.metrics.push_back({key, Metric{std::nullopt, v}});
}

template <class F>
void guarded(VariantResult& r, const std::string& what, F&& f) {
    try {
        f();
    } catch (const Error& e) {
        r.report.notes.push_back(what + ": " + e.what());
    }
}

void run_spectral(const Config& c, VariantResult& r) {
    const auto sweep = spectra::parse_sweep(c.text("sweep"));
    if (c.text("model") == "cavity-pair") {
        const auto base = std::get<dynamics::ChaosParams>(build_model(c));
        r.spectrum_csv = cavity_pair_sweep_csv(base, sweep);
        double best = -std::numeric_limits<double>::infinity(), at = 0.0;
        for (std::size_t i = 0; i < sweep.count; ++i) {
            const auto e = dynamics::chaos_subsystem_spectrum(with_chaos_parameter(base, sweep.parameter, sweep.at(i)));
            if (e.energies[0].imag() > best) {
                best = e.energies[0].imag();
                at = sweep.at(i);
            }
        }
        const auto point = dynamics::chaos_subsystem_spectrum(base);
        put(r, "spectrum.points", static_cast<double>(sweep.count));
        put(r, "spectrum.max_im", best);
        put(r, "spectrum.argmax", at);
        put(r, "point.im_e_plus", point.energies[0].imag());
        put(r, "point.im_e_minus", point.energies[1].imag());
        put(r, "point.re_e_plus", point.energies[0].real());
        return;
    }
    const auto base = build_family(c);
    r.spectrum_csv = spectrum_sweep_csv(base, sweep);
    double max_im = 0.0;
    for (std::size_t i = 0; i < sweep.count; ++i) {
        for (const auto& e : spectra::spectrum(spectra::with_parameter(base, sweep.parameter, sweep.at(i))).energies) {
            max_im = std::max(max_im, std::abs(e.imag()));
        }
    }
    put(r, "spectrum.points", static_cast<double>(sweep.count));
    put(r, "spectrum.max_abs_im", max_im);
    if (c.flag("diagnostics.exceptional_points")) {
        const auto eps = spectra::find_exceptional_points(base, sweep);
        std::vector<double> locs;
        std::string list;
        for (const auto& ep : eps) {
            if (!ep.converged) {
                r.report.notes.push_back("unconverged exceptional-point candidate at " + fmt(ep.location) +
                                         " (gap " + fmt(ep.gap) + ")");
                continue;
            }
            locs.push_back(ep.location);
            list += (list.empty() ? "" : ",") + fmt(ep.location);
        }
        put(r, "ep.count", static_cast<double>(spectra::count_converged(eps)));
        put(r, "ep.candidates", static_cast<double>(eps.size()));
        if (!locs.empty()) {
            put(r, "ep.first", locs.front());
            put(r, "ep.last", locs.back());
        }
        put_text(r, "ep.locations", list.empty() ? "none" : list);
    }
}

void run_evolution(const Config& c, VariantResult& r, std::vector<FileOut>& files, const std::string& scenario) {
    const auto model = build_model(c);
    const auto x0 = build_initial_state(c);
    const auto icfg = build_integrator(c);
    const double t_end = c.number("t_end");

    Trajectory traj = integrate(model, x0, t_end, icfg);
    traj.meta().insert(traj.meta().begin(), {"scenario", scenario});
    traj.meta().insert(traj.meta().begin() + 1, {"variant", r.label});
    if (c.has("diagnostics.phase_plane")) traj.meta().push_back({"phase_plane", c.text("diagnostics.phase_plane")});
    files.push_back({"trajectory_" + r.label + ".csv", to_csv(traj)});

    put(r, "samples", static_cast<double>(traj.size()));
    put(r, "t_end", traj.times().back());
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        m1 = std::max(m1, std::abs(traj.amplitude(i, Mode::A1)));
        m2 = std::max(m2, std::abs(traj.amplitude(i, Mode::A2)));
    }
    put(r, "max.abs_a1", m1);
    put(r, "max.abs_a2", m2);
    put(r, "final.abs_a1", std::abs(traj.amplitude(traj.size() - 1, Mode::A1)));
    put(r, "final.abs_a2", std::abs(traj.amplitude(traj.size() - 1, Mode::A2)));

    if (c.has("diagnostics.elimination") && c.flag("diagnostics.elimination")) {
        guarded(r, "elimination", [&] {
            const auto& exact = std::get<dynamics::OptomechParams>(model);
            const auto red = dynamics::derive_effective_params(exact);
            for (const auto& w : red.warnings) r.report.notes.push_back("elimination warning: " + w);
            const std::vector<double> y0{x0[0], x0[1], x0[4], x0[5]};
            Trajectory eff = integrate(red.params, y0, t_end, icfg);
            eff.meta().insert(eff.meta().begin(), {"scenario", scenario});
            eff.meta().insert(eff.meta().begin() + 1, {"variant", r.label});
            files.push_back({"effective_" + r.label + ".csv", to_csv(eff)});
            const auto err = analysis::elimination_error(traj, eff);
            files.push_back({"error_" + r.label + ".csv", analysis::error_csv(err)});
            put(r, "elimination.gamma", red.params.dissipation[0]);
            put(r, "elimination.delta_eff", red.params.delta_eff[0]);
            put(r, "elimination.max_error", err.overall_max());
            put(r, "elimination.max_error_a1", err.max[0]);
            put(r, "elimination.max_error_a2", err.max[1]);
            const double bound = c.number("diagnostics.elimination_bound");
            if (const auto t = err.first_exceeding(bound)) put(r, "elimination.breach_time", *t);
            else put_text(r, "elimination.breach_time", "none");
        });
    }

    const std::string growth = c.text("diagnostics.growth");
    if (growth != "off") {
        guarded(r, "growth", [&] {
            analysis::EnvelopeOptions opt;
            opt.fit_from_fraction = c.number("diagnostics.growth_from");
            r.report.growth = analysis::envelope_growth_rate(traj, parse_field(growth), opt);
            put(r, "growth.rate", r.report.growth->rate);
            put(r, "growth.residual", r.report.growth->residual);
            put(r, "growth.peaks", static_cast<double>(r.report.growth->peaks));
        });
    }
    const std::string beat = c.text("diagnostics.beat");
    if (beat != "off") {
        guarded(r, "beat", [&] {
            r.report.beat = analysis::beat_frequency(traj, parse_mode(beat));
            put(r, "beat.splitting", r.report.beat->splitting);
            put(r, "beat.residual", r.report.beat->relative_residual);
        });
    }
    const std::string pearson = c.text("diagnostics.pearson");
    if (pearson != "off") {
        guarded(r, "pearson", [&] {
            const auto parts = split(pearson, ',');
            analysis::PearsonConfig pc;
            pc.window = c.number("diagnostics.pearson_window");
            pc.f = parse_field(parts[0]);
            pc.g = parse_field(parts[1]);
            r.report.pearson_series = analysis::pearson_factor(traj, pc);
            files.push_back({"pearson_" + r.label + ".csv", analysis::pearson_csv(r.report.pearson_series)});
            double lo = 2.0, hi = -2.0;
            std::size_t undefined = 0;
            for (const auto& p : r.report.pearson_series) {
                if (!p.value) {
                    ++undefined;
                    continue;
                }
                lo = std::min(lo, *p.value);
                hi = std::max(hi, *p.value);
            }
            put(r, "pearson.windows", static_cast<double>(r.report.pearson_series.size()));
            put(r, "pearson.undefined", static_cast<double>(undefined));
            if (undefined < r.report.pearson_series.size()) {
                put(r, "pearson.min", lo);
                put(r, "pearson.max", hi);
            }
        });
    }
    const std::string dip = c.text("diagnostics.dip");
    if (dip != "off") {
        guarded(r, "dip", [&] {
            const auto d = analysis::envelope_dip(traj, parse_field(dip));
            put(r, "dip.initial", d.initial);
            if (d.time) {
                put(r, "dip.time", *d.time);
                put(r, "dip.value", *d.value);
            }
            put(r, "dip.below_initial", d.below_initial() ? 1.0 : 0.0);
        });
    }
    if (c.flag("diagnostics.lyapunov")) {
        guarded(r, "lyapunov", [&] {
            analysis::LyapunovOptions lo;
            lo.horizon = c.number("diagnostics.lyapunov_horizon");
            lo.renorm_interval = c.number("diagnostics.lyapunov_interval");
            lo.perturbation = c.number("diagnostics.lyapunov_perturbation");
            r.report.lyapunov = analysis::lyapunov_exponent(model, x0, lo);
            put(r, "lle", r.report.lyapunov->lle);
            put(r, "lle.stderr", r.report.lyapunov->std_error);
            put(r, "lle.significance", r.report.lyapunov->significance());
        });
    }
    if (c.flag("diagnostics.classify")) {
        r.report.classification = analysis::classify({r.report.growth, r.report.lyapunov});
        put_text(r, "classification", analysis::regime_name(r.report.classification.regime));
    } else {
        r.report.classification = {analysis::Regime::Inconclusive, "classification not requested"};
    }
    r.trajectory = std::move(traj);
}

bool compare(double actual, const std::string& op, double expected, double tol) {
    if (op == "<") return actual < expected;
    if (op == "<=") return actual <= expected;
    if (op == ">") return actual > expected;
    if (op == ">=") return actual >= expected;
    return std::abs(actual - expected) <= tol;
}

AssertionOutcome evaluate_assertion(const Config& cfg, const std::string& id, const std::vector<VariantResult>& runs) {
    const std::string base = "assert." + id + ".";
    AssertionOutcome a;
    a.id = id;
    a.metric = cfg.text(base + "metric");
    a.variant = cfg.text(base + "variant");
    a.op = cfg.text(base + "op");
    a.expected = cfg.text(base + "value");
    a.tolerance = cfg.number(base + "tol");

    const VariantResult* run = nullptr;
    for (const auto& r : runs) {
        if (r.label == a.variant) run = &r;
    }
    if (!run || run->error) {
        a.note = run ? "run failed: " + *run->error : "run missing";
        return a;
    }
    const Metric* m = run->metric(a.metric);
    if (!m) {
        a.note = "metric unavailable";
        for (const auto& n : run->report.notes) a.note += "; " + n;
        return a;
    }
    a.actual = m->text;
    if (a.op == "is") {
        a.pass = m->text == a.expected;
    } else if (m->number) {
        a.pass = compare(*m->number, a.op, config::evaluate(a.expected), a.tolerance);
    } else {
        a.note = "metric is not numeric";
    }
    return a;
}

std::string report_text(const std::string& scenario, const std::string& model, const std::vector<VariantResult>& runs) {
    std::ostringstream os;
    os << "scenario=" << scenario << '\n' << "model=" << model << '\n';
    for (const auto& r : runs) {
        os << "\n[" << r.label << "]\n";
        if (r.error) {
            os << "error=" << *r.error << '\n';
            continue;
        }
        if (!is_spectral(model)) os << analysis::to_kv(r.report);
        else {
            for (std::size_t i = 0; i < r.report.notes.size(); ++i) os << "note." << i << '=' << r.report.notes[i] << '\n';
        }
        for (const auto& [k, m] : r.metrics) os << "metric." << k << '=' << m.text << '\n';
    }
    return os.str();
}

} // namespace

const Metric* VariantResult::metric(const std::string& name) const {
    for (const auto& [k, m] : metrics) {
        if (k == name) return &m;
    }
    return nullptr;
}

const VariantResult* ScenarioResult::run(const std::string& label) const {
    for (const auto& r : runs) {
        if (r.label == label) return &r;
    }
    return nullptr;
}

bool RunManifest::passed() const {
    if (!errors.empty()) return false;
    return std::all_of(assertions.begin(), assertions.end(), [](const AssertionOutcome& a) { return a.pass; });
}

std::string RunManifest::to_text() const {
    std::ostringstream os;
    os << "manifest.begin\n";
    os << "scenario=" << scenario << '\n';
    os << "version=" << version << '\n';
    for (const auto& e : config.entries()) {
        os << "config." << e.key << '=' << e.value << (e.defaulted ? "  # defaulted" : "") << '\n';
    }
    for (const auto& [k, v] : overrides) os << "override." << k << '=' << v << '\n';
    for (const auto& [f, d] : digests) os << "digest." << f << "=sha256:" << d << '\n';
    for (const auto& e : errors) os << "error=" << e << '\n';
    for (const auto& a : assertions) {
        os << "assert." << a.id << '=' << (a.pass ? "pass" : "fail") << " variant=" << a.variant
           << " metric=" << a.metric << " op=" << a.op << " expected=" << a.expected;
        if (a.op == "==") os << " tol=" << fmt(a.tolerance);
        os << " actual=" << (a.actual ? *a.actual : std::string("n/a"));
        if (!a.note.empty()) os << " note=" << a.note;
        os << '\n';
    }
    os << "status=" << (passed() ? "pass" : "fail") << '\n';
    os << "manifest.end\n";
    return os.str();
}

std::filesystem::path default_output_dir() {
    if (const char* env = std::getenv("NHSIM_OUT"); env && *env) return env;
    return "nhsim-out";
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 digest failed");
    }
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

ScenarioResult run_scenario(const Scenario& s, const RunOptions& opt) {
    ScenarioResult res;
    res.manifest.scenario = s.name();
    res.manifest.version = NHSIM_VERSION;
    res.manifest.config = s.config();
    res.manifest.overrides = opt.overrides;

    std::vector<FileOut> files;
    for (const auto& label : s.runs()) {
        VariantResult r;
        r.label = label;
        try {
            const Config c = s.resolved(label);
            if (is_spectral(s.model())) {
                run_spectral(c, r);
                files.push_back({"spectrum_" + label + ".csv", r.spectrum_csv});
            } else {
                run_evolution(c, r, files, s.name());
            }
        } catch (const Error& e) {
            r.error = e.what();
            res.manifest.errors.push_back(label + ": " + e.what());
        }
        res.runs.push_back(std::move(r));
    }

    if (s.config().has("diagnostics.divergence")) {
        const std::string target = s.config().text("diagnostics.divergence");
        if (target != "off") {
            VariantResult& main = res.runs.front();
            const VariantResult* other = res.run(target);
            if (main.trajectory && other && other->trajectory) {
                guarded(main, "divergence", [&] {
                    const auto d = analysis::trajectory_divergence(*main.trajectory, *other->trajectory,
                                                                   s.config().number("diagnostics.divergence_fraction"));
                    put(main, "divergence.scale", d.scale);
                    put(main, "divergence.max_fraction", d.scale > 0.0 ? d.max_distance / d.scale : 0.0);
                    if (d.time) put(main, "divergence.time", *d.time);
                    else put_text(main, "divergence.time", "none");
                });
            }
        }
    }

    std::vector<std::string> ids;
    for (const auto& e : s.config().with_prefix("assert.")) {
        const std::string id = split(e.key, '.')[1];
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
    for (const auto& id : ids) res.manifest.assertions.push_back(evaluate_assertion(s.config(), id, res.runs));

    res.report = report_text(s.name(), s.model(), res.runs);
    files.push_back({"report.txt", res.report});
    for (const auto& f : files) res.manifest.digests.push_back({f.name, sha256_hex(f.bytes)});

    if (!opt.out_dir.empty()) {
        const auto dir = opt.out_dir / s.name();
        std::filesystem::create_directories(dir);
        for (const auto& f : files) {
            std::ofstream out(dir / f.name, std::ios::binary | std::ios::trunc);
            out << f.bytes;
            if (!out) throw Error("cannot write " + (dir / f.name).string());
        }
        std::ofstream man(dir / "manifest.txt", std::ios::binary | std::ios::app);
        man << res.manifest.to_text();
        if (!man) throw Error("cannot write " + (dir / "manifest.txt").string());
    }
    return res;
}

} // namespace nhsim::scenarios

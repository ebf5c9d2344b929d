// nhsim: spectra, evolutions, sweeps and the acceptance suite from the shell.
//
// Exit codes: 0 success, 1 assertion or criterion failure, 2 usage or config error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "nhsim/acceptance.hpp"
#include "nhsim/error.hpp"
#include "nhsim/scenarios.hpp"
#include "nhsim/spectra.hpp"

namespace sc = nhsim::scenarios;

namespace {

struct ScenarioArgs {
    std::string scenario;
    std::string config;
    std::vector<std::string> sets;
};

void add_scenario_options(CLI::App* cmd, ScenarioArgs& a) {
    auto* s = cmd->add_option("--scenario", a.scenario, "Preset name (see list-scenarios)");
    auto* c = cmd->add_option("--config", a.config, "Scenario config file");
    s->excludes(c);
    cmd->add_option("--set", a.sets, "Override an existing key, key=value (repeatable)");
}

std::vector<std::pair<std::string, std::string>> parse_sets(const std::vector<std::string>& sets) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw nhsim::ConfigError("--set expects key=value, got '" + s + "'");
        }
        out.emplace_back(nhsim::config::trim(s.substr(0, eq)), nhsim::config::trim(s.substr(eq + 1)));
    }
    return out;
}

sc::Scenario resolve(const ScenarioArgs& a, std::vector<std::pair<std::string, std::string>>& overrides) {
    if (a.scenario.empty() && a.config.empty()) {
        throw nhsim::ConfigError("one of --scenario or --config is required");
    }
    sc::Scenario s = sc::load_scenario(a.scenario.empty() ? a.config : a.scenario);
    overrides = parse_sets(a.sets);
    for (const auto& [k, v] : overrides) s.apply_override(k, v);
    return s;
}

// Sets a diagnostic key unless the scenario already enables it.
void ensure(sc::Scenario& s, const std::string& key, const std::string& value) {
    if (!s.config().has(key)) return;
    const std::string cur = s.config().text(key);
    if (cur == "off" || cur == "false" || cur == "no" || cur == "0") s.apply_override(key, value);
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path, std::ios::binary | std::ios::trunc);
    if (!file) throw nhsim::Error("cannot write " + path);
    return file;
}

const sc::VariantResult& pick_run(const sc::ScenarioResult& r, const std::string& label) {
    const auto* run = r.run(label);
    if (!run) throw nhsim::ConfigError("unknown variant '" + label + "'");
    if (run->error) throw nhsim::Error("run " + label + " failed: " + *run->error);
    return *run;
}

void print_errors(const sc::ScenarioResult& r) {
    for (const auto& e : r.manifest.errors) std::cerr << "nhsim: run error: " << e << '\n';
    for (const auto& a : r.manifest.assertions) {
        if (!a.pass) {
            std::cerr << "nhsim: assertion " << a.id << " failed: " << a.variant << ' ' << a.metric << ' ' << a.op << ' '
                      << a.expected << " (actual " << (a.actual ? *a.actual : "n/a") << ")"
                      << (a.note.empty() ? "" : " " + a.note) << '\n';
        }
    }
}

// ---------------------------------------------------------------------------

struct SpectrumArgs {
    std::string family;
    double omega = 1.0, lambda = 0.0, epsilon = 0.0, mu = 0.0, kappa = 0.0;
    std::size_t n = 0;
    std::vector<double> epsilons;
    std::string sweep;
    std::string output;
};

int cmd_spectrum(const SpectrumArgs& a) {
    nhsim::spectra::FamilyParams base;
    if (a.family == "two-mode") {
        base = nhsim::spectra::TwoModeParams{a.omega, a.lambda, a.epsilon};
    } else if (a.family == "gain-loss") {
        base = nhsim::spectra::GainLossParams{a.omega, a.mu, a.kappa};
    } else if (a.family == "chain") {
        auto p = nhsim::spectra::ChainParams::make(a.omega, a.lambda, a.epsilons);
        if (a.n != 0 && a.n != p.sites) {
            throw nhsim::InvalidParameter("--n " + std::to_string(a.n) + " needs " + std::to_string(a.n - 1) +
                                          " --epsilons values, got " + std::to_string(a.epsilons.size()));
        }
        base = p;
    } else {
        throw nhsim::InvalidParameter("unknown family '" + a.family + "' (two-mode, gain-loss, chain)");
    }
    std::visit([](const auto& p) { p.validate(); }, base);

    std::string csv;
    if (a.sweep.empty()) {
        const double v = a.family == "gain-loss" ? a.mu : a.lambda;
        const auto e = nhsim::spectra::spectrum(base).energies;
        csv = "sweep_param,k,re_E,im_E\n";
        for (std::size_t k = 0; k < e.size(); ++k) {
            csv += nhsim::format_number(v) + ',' + std::to_string(k) + ',' + nhsim::format_number(e[k].real()) + ',' +
                   nhsim::format_number(e[k].imag()) + '\n';
        }
    } else {
        const auto sweep = nhsim::spectra::parse_sweep(a.sweep);
        csv = sc::spectrum_sweep_csv(base, sweep);
        for (const auto& ep : nhsim::spectra::find_exceptional_points(base, sweep)) {
            std::cerr << "exceptional_point " << sweep.parameter << '=' << nhsim::format_number(ep.location)
                      << " gap=" << nhsim::format_number(ep.gap) << (ep.converged ? "" : " unconverged") << '\n';
        }
    }
    std::ofstream file;
    open_output(a.output, file) << csv;
    return 0;
}

struct EvolveArgs {
    ScenarioArgs scenario;
    std::string out;
    std::string format = "csv";
    std::string variant = "main";
};

int cmd_evolve(const EvolveArgs& a) {
    std::vector<std::pair<std::string, std::string>> overrides;
    const sc::Scenario s = resolve(a.scenario, overrides);
    sc::RunOptions opt;
    opt.out_dir = a.out.empty() ? sc::default_output_dir() : std::filesystem::path(a.out);
    opt.overrides = overrides;
    const auto r = sc::run_scenario(s, opt);
    print_errors(r);
    if (a.format == "kv-report") {
        std::cout << r.report << '\n' << r.manifest.to_text();
    } else {
        const auto* run = r.run(a.variant);
        if (!run) throw nhsim::ConfigError("unknown variant '" + a.variant + "'");
        if (run->trajectory) nhsim::write_csv(std::cout, *run->trajectory);
        else std::cout << run->spectrum_csv;
    }
    std::cerr << "nhsim: outputs in " << (opt.out_dir / s.name()).string() << '\n';
    return r.manifest.passed() ? 0 : 1;
}

struct SweepArgs {
    ScenarioArgs scenario;
    std::string vary;
    std::vector<std::string> metrics;
    std::string variant = "main";
};

int cmd_sweep(const SweepArgs& a) {
    std::vector<std::pair<std::string, std::string>> overrides;
    const sc::Scenario base = resolve(a.scenario, overrides);
    const auto colon = a.vary.find(':');
    if (colon == std::string::npos) throw nhsim::ConfigError("--vary expects key:start:end:count");
    const std::string key = a.vary.substr(0, colon);
    // Reuse the spectra sweep grammar for the numeric range.
    const auto range = nhsim::spectra::parse_sweep("x" + a.vary.substr(colon));
    range.validate();
    if (!base.config().has(key)) throw nhsim::ConfigError("cannot vary unknown key '" + key + "'");

    std::cout << key;
    for (const auto& m : a.metrics) std::cout << ',' << m;
    std::cout << '\n';
    int status = 0;
    for (std::size_t i = 0; i < range.count; ++i) {
        sc::Scenario s = base;
        const std::string value = nhsim::format_number(range.at(i));
        s.apply_override(key, value);
        const auto r = sc::run_scenario(s);
        const auto* run = r.run(a.variant);
        if (!run) throw nhsim::ConfigError("unknown variant '" + a.variant + "'");
        if (run->error) {
            std::cerr << "nhsim: " << key << '=' << value << ": " << *run->error << '\n';
            status = 1;
        }
        std::cout << value;
        for (const auto& m : a.metrics) {
            const auto* metric = run->metric(m);
            std::cout << ',' << (metric ? metric->text : "nan");
        }
        std::cout << '\n';
    }
    return status;
}

struct PearsonArgs {
    ScenarioArgs scenario;
    std::string variant = "main";
    std::optional<double> window;
    std::string fields;
};

int cmd_pearson(const PearsonArgs& a) {
    std::vector<std::pair<std::string, std::string>> overrides;
    sc::Scenario s = resolve(a.scenario, overrides);
    if (sc::is_spectral(s.model())) throw nhsim::ConfigError("pearson needs an integrated model");
    if (!a.fields.empty()) s.apply_override("diagnostics.pearson", a.fields);
    ensure(s, "diagnostics.pearson", "re_a1,re_a2");
    if (a.window) s.apply_override("diagnostics.pearson_window", nhsim::format_number(*a.window));
    const auto r = sc::run_scenario(s);
    const auto& run = pick_run(r, a.variant);
    for (const auto& n : run.report.notes) std::cerr << "nhsim: " << n << '\n';
    std::cout << nhsim::analysis::pearson_csv(run.report.pearson_series);
    return run.report.notes.empty() ? 0 : 1;
}

struct ChaosArgs {
    ScenarioArgs scenario;
    std::string variant = "main";
};

int cmd_chaos(const ChaosArgs& a) {
    std::vector<std::pair<std::string, std::string>> overrides;
    sc::Scenario s = resolve(a.scenario, overrides);
    if (s.model() != "chaos") throw nhsim::ConfigError("chaos needs a chaos-model scenario");
    ensure(s, "diagnostics.lyapunov", "on");
    ensure(s, "diagnostics.growth", "re_a1");
    ensure(s, "diagnostics.classify", "on");
    const auto r = sc::run_scenario(s);
    const auto& run = pick_run(r, a.variant);
    for (const auto& n : run.report.notes) std::cerr << "nhsim: " << n << '\n';
    std::cout << "scenario=" << s.name() << '\n' << "variant=" << a.variant << '\n';
    std::cout << nhsim::analysis::to_kv(run.report);
    for (const auto& [k, m] : run.metrics) std::cout << "metric." << k << '=' << m.text << '\n';
    return 0;
}

int cmd_validate(const std::string& suite) {
    nhsim::acceptance::suite_criteria(suite); // rejects unknown names before any work
    bool ok = true;
    for (const auto& r : nhsim::acceptance::run_suite(suite)) {
        std::cout << nhsim::acceptance::summary_line(r) << std::endl;
        ok = ok && r.pass();
    }
    std::cout << "suite=" << suite << " status=" << (ok ? "pass" : "fail") << '\n';
    return ok ? 0 : 1;
}

int cmd_list() {
    for (const auto& name : sc::preset_names()) {
        const auto s = sc::load_scenario(name);
        std::cout << name << '\t' << s.model() << '\t' << s.config().text("description") << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-Hermitian coupled-mode simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", NHSIM_VERSION);

    SpectrumArgs spec;
    auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues of a Hamiltonian family, optionally over a sweep");
    spectrum->add_option("--family", spec.family, "two-mode, gain-loss or chain")->required();
    spectrum->add_option("--omega", spec.omega, "Mode frequency");
    spectrum->add_option("--lambda", spec.lambda, "Coupling strength");
    spectrum->add_option("--epsilon", spec.epsilon, "Coupling asymmetry (two-mode)");
    spectrum->add_option("--mu", spec.mu, "Real coupling (gain-loss)");
    spectrum->add_option("--kappa", spec.kappa, "Gain/loss rate (gain-loss)");
    spectrum->add_option("--n", spec.n, "Chain length");
    spectrum->add_option("--epsilons", spec.epsilons, "Chain asymmetries, comma separated")->delimiter(',');
    spectrum->add_option("--sweep", spec.sweep, "name:start:end:count, endpoints inclusive");
    spectrum->add_option("--output,-o", spec.output, "Output file (default stdout)");

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Vary one scenario key and tabulate metrics");
    add_scenario_options(sweep, sw.scenario);
    sweep->add_option("--vary", sw.vary, "key:start:end:count")->required();
    sweep->add_option("--metric", sw.metrics, "Metric column (repeatable)")->required();
    sweep->add_option("--variant", sw.variant, "Run label to read metrics from");

    EvolveArgs ev;
    auto* evolve = app.add_subcommand("evolve", "Run a scenario and write its outputs");
    add_scenario_options(evolve, ev.scenario);
    evolve->add_option("--out", ev.out, "Output directory (default $NHSIM_OUT or ./nhsim-out)");
    evolve->add_option("--format", ev.format, "stdout format")->check(CLI::IsMember({"csv", "kv-report"}));
    evolve->add_option("--variant", ev.variant, "Run printed in csv format");

    PearsonArgs pe;
    auto* pearson = app.add_subcommand("pearson", "Windowed Pearson factor of two fields");
    add_scenario_options(pearson, pe.scenario);
    pearson->add_option("--variant", pe.variant, "Run label");
    pearson->add_option("--window", pe.window, "Window length");
    pearson->add_option("--fields", pe.fields, "Two fields, e.g. re_a1,re_a2");

    ChaosArgs ch;
    auto* chaos = app.add_subcommand("chaos", "Lyapunov exponent and regime of a chaos scenario");
    add_scenario_options(chaos, ch.scenario);
    chaos->add_option("--variant", ch.variant, "Run label");

    std::string suite = "all";
    auto* validate = app.add_subcommand("validate", "Run acceptance criteria");
    validate->add_option("--suite", suite, "Suite name")->check(CLI::IsMember(nhsim::acceptance::suite_names()));

    auto* list = app.add_subcommand("list-scenarios", "Print built-in presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*spectrum) return cmd_spectrum(spec);
        if (*sweep) return cmd_sweep(sw);
        if (*evolve) return cmd_evolve(ev);
        if (*pearson) return cmd_pearson(pe);
        if (*chaos) return cmd_chaos(ch);
        if (*validate) return cmd_validate(suite);
        if (*list) return cmd_list();
    } catch (const nhsim::ConfigError& e) {
        std::cerr << "nhsim: config error: " << e.what() << '\n';
        return 2;
    } catch (const nhsim::InvalidParameter& e) {
        std::cerr << "nhsim: invalid parameter: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "nhsim: error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

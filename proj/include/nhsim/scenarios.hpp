#pragma once

// Named figure presets, scenario resolution and run persistence.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nhsim/analysis.hpp"
#include "nhsim/config.hpp"
#include "nhsim/dynamics.hpp"
#include "nhsim/spectra.hpp"
#include "nhsim/trajectory.hpp"

namespace nhsim::scenarios {

/// Model tags accepted in `model = ...`. The first four are spectral sweeps;
/// exact, effective and chaos are integrated.
const std::vector<std::string>& model_tags();
bool is_spectral(const std::string& model);

/// A fully resolved scenario: every schema key is present, defaults are marked.
class Scenario {
public:
    explicit Scenario(config::Config cfg);

    const config::Config& config() const { return cfg_; }
    std::string name() const { return cfg_.text("name"); }
    std::string model() const { return cfg_.text("model"); }

    /// "main" followed by declared variant labels.
    std::vector<std::string> runs() const;
    /// Base configuration with the variant's overrides applied.
    config::Config resolved(const std::string& label) const;

    /// Replaces an existing key (including variant.* and assert.* keys) and re-validates.
    void apply_override(const std::string& key, const std::string& value);

private:
    config::Config cfg_;
};

std::vector<std::string> preset_names();
std::string preset_text(const std::string& name);

/// Preset name, or else a path to a config file.
Scenario load_scenario(const std::string& name_or_path);
Scenario scenario_from_text(const std::string& text, const std::string& source = "<config>");
std::string serialize(const Scenario& s);

// Typed views of a resolved run configuration.
dynamics::ModelSpec build_model(const config::Config& c);
std::vector<double> build_initial_state(const config::Config& c);
ode::IntegratorConfig build_integrator(const config::Config& c);
spectra::FamilyParams build_family(const config::Config& c);

/// sweep_param,k,re_E,im_E rows for every sweep point.
std::string spectrum_sweep_csv(const spectra::FamilyParams& base, const spectra::Sweep& sweep);
std::string cavity_pair_sweep_csv(const dynamics::ChaosParams& base, const spectra::Sweep& sweep);
dynamics::ChaosParams with_chaos_parameter(const dynamics::ChaosParams& base, const std::string& name, double value);

// ---------------------------------------------------------------------------

struct Metric {
    std::optional<double> number;
    std::string text;
};

struct VariantResult {
    std::string label;
    std::vector<std::pair<std::string, Metric>> metrics;
    analysis::DiagnosticsReport report;
    std::optional<Trajectory> trajectory;
    std::string spectrum_csv;
    std::optional<std::string> error;

    const Metric* metric(const std::string& name) const;
};

struct AssertionOutcome {
    std::string id;
    std::string metric;
    std::string variant;
    std::string op;
    std::string expected;
    double tolerance = 0.0;
    std::optional<std::string> actual;
    bool pass = false;
    std::string note;
};

struct RunManifest {
    std::string scenario;
    std::string version;
    config::Config config;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::vector<std::pair<std::string, std::string>> digests; // file name -> sha256
    std::vector<AssertionOutcome> assertions;
    std::vector<std::string> errors;

    bool passed() const;
    std::string to_text() const;
};

struct RunOptions {
    /// Files go to out_dir/<scenario name>/; nothing is written when empty.
    std::filesystem::path out_dir;
    std::vector<std::pair<std::string, std::string>> overrides; // echoed only
};

struct ScenarioResult {
    RunManifest manifest;
    std::vector<VariantResult> runs;
    std::string report;

    const VariantResult* run(const std::string& label) const;
};

/// Integrates or sweeps each run, evaluates diagnostics and assertions and
/// persists outputs. Integration and diagnostic failures become manifest
/// errors and failed assertions; they are not rethrown.
ScenarioResult run_scenario(const Scenario& s, const RunOptions& opt = {});

/// $NHSIM_OUT, or ./nhsim-out.
std::filesystem::path default_output_dir();

std::string sha256_hex(const std::string& bytes);

} // namespace nhsim::scenarios

#pragma once

// Diagnostics over trajectories: windowed Pearson correlation, elimination
// error, envelope growth, beat splitting, largest Lyapunov exponent and the
// regime classification built from them.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nhsim/dynamics.hpp"
#include "nhsim/ode.hpp"
#include "nhsim/trajectory.hpp"

namespace nhsim::analysis {

// ---------------------------------------------------------------------------
// Pearson factor

struct PearsonConfig {
    double window = 10.0;
    /// Hop between window starts; <= 0 means window / 2.
    double stride = 0.0;
    Field f = Field::ReA1;
    Field g = Field::ReA2;

    double effective_stride() const { return stride > 0.0 ? stride : window / 2.0; }
    void validate() const;
};

struct PearsonPoint {
    double t = 0.0;               // window start
    std::optional<double> value;  // empty when either window has zero variance
};

/// Windows [t, t+Δt) start at times[0] and advance by the stride while they fit.
/// Throws DiagnosticError when a window holds fewer than 8 samples.
std::vector<PearsonPoint> pearson_factor(std::span<const double> times, std::span<const double> f,
                                         std::span<const double> g, const PearsonConfig& cfg);
std::vector<PearsonPoint> pearson_factor(const Trajectory& traj, const PearsonConfig& cfg);

// ---------------------------------------------------------------------------
// Elimination error

struct EliminationError {
    std::vector<double> times;
    std::array<std::vector<double>, 2> error; // |α_j - α'_j|
    std::array<double, 2> max{0.0, 0.0};
    std::array<double, 2> max_time{0.0, 0.0};

    double overall_max() const { return std::max(max[0], max[1]); }
    /// Earliest grid time where either error reaches `bound`.
    std::optional<double> first_exceeding(double bound) const;
};

/// Compares the cavity amplitudes of two trajectories. When the grids differ,
/// both are linearly interpolated onto the union of their samples inside the
/// common time range.
EliminationError elimination_error(const Trajectory& a, const Trajectory& b);

// ---------------------------------------------------------------------------
// Envelope

struct Peak {
    double t = 0.0;
    double value = 0.0;
};

/// Local maxima of |x|, refined by a parabola through the three samples around each one.
std::vector<Peak> envelope_peaks(std::span<const double> times, std::span<const double> x);

struct GrowthFit {
    double rate = 0.0;      // slope of log(peak) against time
    double intercept = 0.0;
    double residual = 0.0;  // RMS log residual divided by the fitted time span
    std::size_t peaks = 0;

    bool significant() const { return rate > 10.0 * residual; }
};

struct EnvelopeOptions {
    /// Peaks before this fraction of the run are ignored by the fit.
    double fit_from_fraction = 0.5;
};

/// Least-squares fit of log envelope peaks. Throws DiagnosticError with fewer than 3 peaks.
GrowthFit fit_growth(std::span<const Peak> peaks);
GrowthFit envelope_growth_rate(const Trajectory& traj, Field field, const EnvelopeOptions& opt = {});

struct EnvelopeDip {
    double initial = 0.0;
    std::optional<double> time;  // first envelope minimum, if any
    std::optional<double> value;

    bool below_initial() const { return value && time && *time > 0.0 && *value < initial; }
};

/// First local minimum of the envelope of `field`. Modulus fields are used as
/// their own envelope; signed fields go through envelope_peaks.
EnvelopeDip envelope_dip(const Trajectory& traj, Field field);

// ---------------------------------------------------------------------------
// Beat splitting

struct BeatEstimate {
    double splitting = 0.0;          // |ω_1 - ω_2|, rad per time unit
    std::array<double, 2> frequencies{0.0, 0.0};
    std::array<double, 2> amplitudes{0.0, 0.0};
    double relative_residual = 0.0;  // two-tone fit residual / signal norm
};

/// Locates the two strongest lines in a Hann-windowed spectrum of the complex
/// amplitude and refines them with a two-tone least-squares fit. Throws
/// DiagnosticError when a second line cannot be resolved.
BeatEstimate beat_frequency(std::span<const double> times, std::span<const cplx> signal);
BeatEstimate beat_frequency(const Trajectory& traj, Mode mode);

// ---------------------------------------------------------------------------
// Lyapunov exponent

struct LyapunovOptions {
    double horizon = 3000.0;
    double renorm_interval = 10.0;
    /// Separation relative to the state norm, seeded on Re α1 and restored at each renormalisation.
    double perturbation = 1e-8;
    ode::IntegratorConfig integrator{ode::Method::DormandPrince45, 1e-10, 1e-12, 0.1, 0.5};

    void validate() const;
};

struct LyapunovEstimate {
    double lle = 0.0;
    double std_error = 0.0;  // spread of segment rates / sqrt(segments)
    std::size_t segments = 0;
    std::vector<double> segment_rates;

    /// lle / std_error, signed infinity when std_error is zero.
    double significance() const;
};

/// Two-trajectory divergence with renormalisation every renorm_interval.
LyapunovEstimate lyapunov_exponent(const dynamics::ModelSpec& model, std::span<const double> initial,
                                   const LyapunovOptions& opt = {});

/// Same estimator on an arbitrary real system.
template <class Rhs>
LyapunovEstimate lyapunov_exponent(Rhs rhs, std::vector<double> x, std::size_t perturbed_index,
                                   const LyapunovOptions& opt);

// ---------------------------------------------------------------------------
// Sensitivity

struct Divergence {
    double scale = 0.0;            // max |α1| of the reference run
    double max_distance = 0.0;     // max |α1 - α1'| over the common grid
    std::optional<double> time;    // first time the distance exceeds fraction * scale
};

Divergence trajectory_divergence(const Trajectory& reference, const Trajectory& other, double fraction = 0.1);

// ---------------------------------------------------------------------------
// Classification

enum class Regime { Amplifying, BoundedPeriodic, Chaotic, Inconclusive };

std::string regime_name(Regime r);

struct ClassifyInput {
    std::optional<GrowthFit> growth;
    std::optional<LyapunovEstimate> lyapunov;
};

struct Classification {
    Regime regime = Regime::Inconclusive;
    std::string reason;
};

/// amplifying: growth rate > 10x its residual; chaotic: bounded and LLE > 3σ;
/// otherwise bounded-periodic. Growth together with an LLE below -3σ is
/// contradictory and yields Inconclusive.
Classification classify(const ClassifyInput& in);

struct DiagnosticsReport {
    Classification classification;
    std::optional<LyapunovEstimate> lyapunov;
    std::optional<GrowthFit> growth;
    std::optional<BeatEstimate> beat;
    std::vector<PearsonPoint> pearson_series;
    std::vector<std::string> notes;
};

/// Flat key=value block, one entry per line.
std::string to_kv(const DiagnosticsReport& r);
/// t,C rows; undefined windows are written as "nan".
std::string pearson_csv(const std::vector<PearsonPoint>& series);
/// t,err_a1,err_a2 rows.
std::string error_csv(const EliminationError& e);

} // namespace nhsim::analysis

#include "nhsim/detail/lyapunov_impl.hpp"

#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nhsim/dynamics.hpp"
#include "nhsim/ode.hpp"

namespace nhsim {

/// Real projections of a trajectory sample.
enum class Field {
    ReA1, ImA1, AbsA1,
    ReA2, ImA2, AbsA2,
    ReB1, ImB1, ReB2, ImB2,
    Q, P,
    Norm, // sqrt(|α1|² + |α2|²)
};

/// Complex mode amplitudes.
enum class Mode { A1, A2, B1, B2 };

Field parse_field(const std::string& name);
std::string field_name(Field f);
Mode parse_mode(const std::string& name);
std::string mode_name(Mode m);

/// Sampled solution of one model. Samples are stored in the integrator's
/// flattened layout, row-major.
class Trajectory {
public:
    using Meta = std::vector<std::pair<std::string, std::string>>;

    Trajectory() = default;
    Trajectory(dynamics::ModelKind model, std::vector<double> times, std::vector<double> data, Meta meta = {});

    dynamics::ModelKind model() const { return model_; }
    std::size_t size() const { return times_.size(); }
    std::size_t width() const { return dynamics::state_width(model_); }
    const std::vector<double>& times() const { return times_; }
    std::span<const double> state(std::size_t i) const;

    cplx amplitude(std::size_t i, Mode m) const;
    double value(std::size_t i, Field f) const;

    std::vector<cplx> amplitudes(Mode m) const;
    std::vector<double> series(Field f) const;

    bool has(Mode m) const;
    bool has(Field f) const;

    const Meta& meta() const { return meta_; }
    Meta& meta() { return meta_; }

    /// Uniform sample spacing, or throws DiagnosticError when irregular.
    double uniform_step() const;

private:
    dynamics::ModelKind model_ = dynamics::ModelKind::Effective;
    std::vector<double> times_;
    std::vector<double> data_;
    Meta meta_;
};

/// Integrates a model from t = 0 to t_end, sampling at the configured stride.
Trajectory integrate(const dynamics::ModelSpec& model, std::span<const double> initial, double t_end,
                     const ode::IntegratorConfig& cfg = {});

// ---------------------------------------------------------------------------
// CSV: t, re_a1, im_a1, re_a2, im_a2 [, re_b1, im_b1, re_b2, im_b2 | q, p]
// preceded by '#'-prefixed key=value metadata lines.

std::vector<std::string> csv_columns(dynamics::ModelKind model);
void write_csv(std::ostream& os, const Trajectory& traj);
std::string to_csv(const Trajectory& traj);
Trajectory read_csv(std::istream& is);

/// Shortest round-trip decimal representation.
std::string format_number(double v);

} // namespace nhsim

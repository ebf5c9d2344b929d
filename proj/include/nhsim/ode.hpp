#pragma once

// Explicit Runge-Kutta integration of real-valued systems: classic fixed-step
// RK4 and the Dormand-Prince 5(4) embedded pair with step-size control.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nhsim/error.hpp"

namespace nhsim::ode {

enum class Method { Rk4, DormandPrince45 };

std::string method_name(Method m);
Method parse_method(const std::string& name);

struct IntegratorConfig {
    Method method = Method::DormandPrince45;
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    /// Upper bound on the adaptive step; the step itself for RK4.
    double max_step = 0.1;
    double output_stride = 0.5;
    std::size_t max_steps = 200'000'000;

    void validate() const;
};

/// Advances a state in time, hitting requested end times exactly.
/// Holds the adaptive step proposal between calls so that chained segments
/// behave like one run.
template <class Rhs>
class Stepper {
public:
    Stepper(Rhs rhs, std::size_t dim, IntegratorConfig cfg)
        : rhs_(std::move(rhs)), cfg_(cfg), k_(7, std::vector<double>(dim)), tmp_(dim), next_(dim) {
        cfg_.validate();
    }

    /// Integrates `x` from `t` to `t_end` in place.
    void advance(std::vector<double>& x, double& t, double t_end) {
        if (cfg_.method == Method::Rk4) {
            advance_rk4(x, t, t_end);
        } else {
            advance_dopri(x, t, t_end);
        }
    }

    std::size_t steps() const { return steps_; }

    /// Call after modifying the state outside advance(); drops the cached derivative.
    void state_changed() { fsal_valid_ = false; }

private:
    void eval(std::span<const double> x, std::vector<double>& out) { rhs_(x, std::span<double>(out)); }

    void check_finite(const std::vector<double>& x, double t) const {
        for (double v : x) {
            if (!std::isfinite(v)) {
                throw IntegrationError("non-finite state", t);
            }
        }
    }

    void count_step(double t) {
        if (++steps_ > cfg_.max_steps) {
            throw IntegrationError("step budget exhausted", t);
        }
    }

    void advance_rk4(std::vector<double>& x, double& t, double t_end) {
        const std::size_t n = x.size();
        while (t < t_end) {
            double h = cfg_.max_step;
            bool last = false;
            if (t + h >= t_end - 1e-9 * h) {
                h = t_end - t;
                last = true;
            }
            eval(x, k_[0]);
            for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * h * k_[0][i];
            eval(tmp_, k_[1]);
            for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * h * k_[1][i];
            eval(tmp_, k_[2]);
            for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + h * k_[2][i];
            eval(tmp_, k_[3]);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += h / 6.0 * (k_[0][i] + 2.0 * k_[1][i] + 2.0 * k_[2][i] + k_[3][i]);
            }
            t = last ? t_end : t + h;
            count_step(t);
            check_finite(x, t);
        }
    }

    double initial_step(const std::vector<double>& x) {
        // Hairer-Norsett-Wanner starting step heuristic.
        const std::size_t n = x.size();
        eval(x, k_[0]);
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sc = cfg_.abs_tol + cfg_.rel_tol * std::abs(x[i]);
            d0 += (x[i] / sc) * (x[i] / sc);
            d1 += (k_[0][i] / sc) * (k_[0][i] / sc);
        }
        d0 = std::sqrt(d0 / static_cast<double>(n));
        d1 = std::sqrt(d1 / static_cast<double>(n));
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, cfg_.max_step);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + h0 * k_[0][i];
        eval(tmp_, k_[1]);
        double d2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sc = cfg_.abs_tol + cfg_.rel_tol * std::abs(x[i]);
            const double v = (k_[1][i] - k_[0][i]) / sc;
            d2 += v * v;
        }
        d2 = std::sqrt(d2 / static_cast<double>(n)) / h0;
        const double h1 = (std::max(d1, d2) <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                      : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
        return std::min({100.0 * h0, h1, cfg_.max_step});
    }

    void advance_dopri(std::vector<double>& x, double& t, double t_end);

    Rhs rhs_;
    IntegratorConfig cfg_;
    std::vector<std::vector<double>> k_;
    std::vector<double> tmp_, next_;
    double h_ = 0.0; // proposed next step, 0 until initialised
    bool fsal_valid_ = false;
    std::size_t steps_ = 0;
};

template <class Rhs>
void Stepper<Rhs>::advance_dopri(std::vector<double>& x, double& t, double t_end) {
    // Dormand-Prince 5(4) tableau.
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    const std::size_t n = x.size();
    if (h_ == 0.0) {
        h_ = initial_step(x);
        fsal_valid_ = false;
    }
    while (t < t_end) {
        if (!fsal_valid_) {
            eval(x, k_[0]);
            fsal_valid_ = true;
        }
        double h = std::min(h_, cfg_.max_step);
        bool clamped = false;
        if (t + h >= t_end - 1e-6 * h) {
            h = t_end - t;
            clamped = true;
        }
        if (!clamped && h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
            throw IntegrationError("step size underflow (stiff or singular system)", t);
        }

        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + h * a21 * k_[0][i];
        eval(tmp_, k_[1]);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + h * (a31 * k_[0][i] + a32 * k_[1][i]);
        eval(tmp_, k_[2]);
        for (std::size_t i = 0; i < n; ++i)
            tmp_[i] = x[i] + h * (a41 * k_[0][i] + a42 * k_[1][i] + a43 * k_[2][i]);
        eval(tmp_, k_[3]);
        for (std::size_t i = 0; i < n; ++i)
            tmp_[i] = x[i] + h * (a51 * k_[0][i] + a52 * k_[1][i] + a53 * k_[2][i] + a54 * k_[3][i]);
        eval(tmp_, k_[4]);
        for (std::size_t i = 0; i < n; ++i)
            tmp_[i] = x[i] + h * (a61 * k_[0][i] + a62 * k_[1][i] + a63 * k_[2][i] + a64 * k_[3][i] +
                                  a65 * k_[4][i]);
        eval(tmp_, k_[5]);
        for (std::size_t i = 0; i < n; ++i)
            next_[i] = x[i] + h * (b1 * k_[0][i] + b3 * k_[2][i] + b4 * k_[3][i] + b5 * k_[4][i] +
                                   b6 * k_[5][i]);
        eval(next_, k_[6]);

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i] +
                                  e6 * k_[5][i] + e7 * k_[6][i]);
            const double sc = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(x[i]), std::abs(next_[i]));
            err += (e / sc) * (e / sc);
        }
        err = std::sqrt(err / static_cast<double>(n));
        if (!std::isfinite(err)) {
            throw IntegrationError("non-finite state", t);
        }

        if (err <= 1.0) {
            t = clamped ? t_end : t + h;
            x.swap(next_);
            std::swap(k_[0], k_[6]);
            count_step(t);
            const double factor = (err == 0.0) ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            // A step shortened to land on t_end does not shrink the proposal.
            if (!clamped || h * factor > h_) {
                h_ = h * factor;
            }
            check_finite(x, t);
        } else {
            h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
            count_step(t);
        }
    }
}

/// Integrates from t0 to t_end, sampling at t0 + k*output_stride and at t_end.
/// Returns the sample times; states are appended to `out_states` row-major.
template <class Rhs>
std::vector<double> integrate_sampled(Rhs rhs, std::vector<double> x, double t0, double t_end,
                                      const IntegratorConfig& cfg, std::vector<double>& out_states) {
    cfg.validate();
    if (!(t_end > t0)) {
        throw InvalidParameter("t_end must be greater than the start time");
    }
    Stepper<Rhs> stepper(std::move(rhs), x.size(), cfg);
    std::vector<double> times{t0};
    out_states.insert(out_states.end(), x.begin(), x.end());
    double t = t0;
    for (std::size_t k = 1;; ++k) {
        double target = t0 + static_cast<double>(k) * cfg.output_stride;
        if (target > t_end - 1e-9 * cfg.output_stride) {
            target = t_end;
        }
        stepper.advance(x, t, target);
        times.push_back(t);
        out_states.insert(out_states.end(), x.begin(), x.end());
        if (target == t_end) {
            break;
        }
    }
    return times;
}

} // namespace nhsim::ode

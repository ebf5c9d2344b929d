#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nhsim::analysis {

template <class Rhs>
LyapunovEstimate lyapunov_exponent(Rhs rhs, std::vector<double> x, std::size_t perturbed_index,
                                   const LyapunovOptions& opt) {
    opt.validate();
    if (perturbed_index >= x.size()) {
        throw InvalidParameter("perturbed component out of range");
    }
    // Separation relative to the current state norm, so it stays resolvable
    // when the reference trajectory grows or decays.
    auto scaled = [&opt](std::span<const double> v) {
        double norm = 0.0;
        for (double c : v) norm += c * c;
        norm = std::sqrt(norm);
        return opt.perturbation * (norm > 0.0 ? norm : 1.0);
    };
    double d0 = scaled(x);

    // Reference and perturbed copies share one stepper so they see the same
    // step sequence; otherwise step-size noise swamps the separation.
    const std::size_t n = x.size();
    auto pair_rhs = [&rhs, n](std::span<const double> z, std::span<double> dz) {
        rhs(z.subspan(0, n), dz.subspan(0, n));
        rhs(z.subspan(n, n), dz.subspan(n, n));
    };
    std::vector<double> z(2 * n);
    std::copy(x.begin(), x.end(), z.begin());
    std::copy(x.begin(), x.end(), z.begin() + static_cast<std::ptrdiff_t>(n));
    z[n + perturbed_index] += d0;

    ode::Stepper<decltype(pair_rhs)> stepper(pair_rhs, 2 * n, opt.integrator);

    LyapunovEstimate est;
    double t = 0.0;
    while (t < opt.horizon) {
        double target = t + opt.renorm_interval;
        if (target > opt.horizon - 1e-9 * opt.renorm_interval) target = opt.horizon;
        double tz = t;
        stepper.advance(z, tz, target);

        double dist = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = z[n + i] - z[i];
            dist += d * d;
        }
        dist = std::sqrt(dist);
        if (!std::isfinite(dist) || dist == 0.0) {
            throw DiagnosticError("separation collapsed or diverged at t=" + std::to_string(target));
        }
        est.segment_rates.push_back(std::log(dist / d0) / (target - t));
        d0 = scaled(std::span<const double>(z).subspan(0, n));
        const double shrink = d0 / dist;
        for (std::size_t i = 0; i < n; ++i) {
            z[n + i] = z[i] + (z[n + i] - z[i]) * shrink;
        }
        stepper.state_changed();
        t = target;
    }

    const auto& r = est.segment_rates;
    est.segments = r.size();
    est.lle = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
    if (r.size() > 1) {
        double ss = 0.0;
        for (double v : r) ss += (v - est.lle) * (v - est.lle);
        est.std_error = std::sqrt(ss / static_cast<double>(r.size() - 1)) / std::sqrt(static_cast<double>(r.size()));
    }
    return est;
}

} // namespace nhsim::analysis

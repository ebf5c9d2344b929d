#include <cmath>
#include <limits>

#include "nhsim/analysis.hpp"
#include "nhsim/error.hpp"

namespace nhsim::analysis {

void LyapunovOptions::validate() const {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw InvalidParameter("lyapunov horizon must be > 0");
    }
    if (!(renorm_interval > 0.0) || renorm_interval > horizon) {
        throw InvalidParameter("renormalisation interval must be in (0, horizon]");
    }
    if (!(perturbation > 0.0) || perturbation >= 1.0) {
        throw InvalidParameter("relative perturbation must be in (0, 1)");
    }
    integrator.validate();
}

double LyapunovEstimate::significance() const {
    if (std_error > 0.0) return lle / std_error;
    if (lle == 0.0) return 0.0;
    return lle > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

LyapunovEstimate lyapunov_exponent(const dynamics::ModelSpec& model, std::span<const double> initial,
                                   const LyapunovOptions& opt) {
    dynamics::validate(model);
    const auto kind = dynamics::kind_of(model);
    if (initial.size() != dynamics::state_width(kind)) {
        throw InvalidParameter("initial state does not match the " + dynamics::model_tag(kind) + " model");
    }
    // Re α1 sits after (q, p) in the chaos layout and first otherwise.
    const std::size_t re_a1 = kind == dynamics::ModelKind::Chaos ? 2 : 0;
    auto rhs = [&model](std::span<const double> x, std::span<double> dx) { dynamics::flat_rhs(model, x, dx); };
    return lyapunov_exponent(rhs, std::vector<double>(initial.begin(), initial.end()), re_a1, opt);
}

} // namespace nhsim::analysis

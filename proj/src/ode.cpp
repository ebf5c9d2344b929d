#include "nhsim/ode.hpp"

#include <cmath>

namespace nhsim::ode {

std::string method_name(Method m) {
    return m == Method::Rk4 ? "rk4" : "dopri45";
}

Method parse_method(const std::string& name) {
    if (name == "rk4") return Method::Rk4;
    if (name == "dopri45") return Method::DormandPrince45;
    throw InvalidParameter("unknown integrator method '" + name + "' (expected rk4 or dopri45)");
}

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
        throw InvalidParameter("integrator tolerances must be > 0");
    }
    if (!(max_step > 0.0) || !std::isfinite(max_step)) {
        throw InvalidParameter("integrator max_step must be > 0");
    }
    if (!(output_stride > 0.0) || !std::isfinite(output_stride)) {
        throw InvalidParameter("integrator output_stride must be > 0");
    }
}

} // namespace nhsim::ode

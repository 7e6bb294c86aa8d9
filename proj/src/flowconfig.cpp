#include "possio/flowconfig.hpp"

#include "possio/errors.hpp"
#include "possio/yaml_util.hpp"

#include <cmath>
#include <sstream>

namespace possio {

std::string_view to_string(ErrorCategory c) noexcept {
    switch (c) {
        case ErrorCategory::config: return "config";
        case ErrorCategory::domain: return "domain";
        case ErrorCategory::convergence: return "convergence";
        case ErrorCategory::characteristic_value: return "characteristic-value";
    }
    return "unknown";
}

FlowParams derive_params(double a, double M, double sigma1, double sigma2, double sigma_prime) {
    if (!(a > 0.0) || !std::isfinite(a)) {
        throw ConfigError("speed of sound must be positive and finite");
    }
    if (!(M >= 0.0) || !(M < 1.0)) {
        std::ostringstream os;
        os << "Mach number " << M << " outside the subsonic range [0, 1)";
        throw ConfigError(os.str());
    }
    if (!(sigma1 < sigma2)) throw ConfigError("strip requires sigma1 < sigma2");
    if (!(sigma_prime >= sigma1 && sigma_prime <= sigma2)) {
        throw ConfigError("sigma_prime must lie inside [sigma1, sigma2]");
    }
    FlowParams p;
    p.a = a;
    p.M = M;
    p.U = M * a;
    p.c = M / (a * (1.0 - M * M));
    p.sigma1 = sigma1;
    p.sigma2 = sigma2;
    p.sigma_prime = sigma_prime;
    return p;
}

FlowParams derive_params(double a, double M, double sigma1, double sigma2) {
    return derive_params(a, M, sigma1, sigma2, 0.5 * (sigma1 + sigma2));
}

FlowParams derive_params(double a, double M) {
    const FlowParams defaults;
    return derive_params(a, M, defaults.sigma1, defaults.sigma2);
}

cplx lambda_of(cplx s, const FlowParams& params) {
    if (params.U == 0.0) throw DomainError("lambda(s) undefined for U = 0 (no free stream)");
    return -s * (1.0 + params.c * params.U) / params.U;
}

LaplaceParameter make_laplace_parameter(cplx s, const FlowParams& params) {
    return {s, lambda_of(s, params)};
}

FlowParams flow_params_from_yaml(const YAML::Node& flow) {
    yaml::require_map(flow, "flow");
    yaml::reject_unknown_keys(flow, "flow", {"a", "M", "sigma1", "sigma2", "sigma_prime"});
    const FlowParams defaults;
    const double a = yaml::required_double(flow, "a", "flow");
    const double M = yaml::required_double(flow, "M", "flow");
    const double s1 = yaml::optional_double(flow, "sigma1", "flow", defaults.sigma1);
    const double s2 = yaml::optional_double(flow, "sigma2", "flow", defaults.sigma2);
    const double sp = yaml::optional_double(flow, "sigma_prime", "flow", 0.5 * (s1 + s2));
    try {
        return derive_params(a, M, s1, s2, sp);
    } catch (const ConfigError& e) {
        throw ConfigError(yaml::where(flow) + e.what());
    }
}

}  // namespace possio

#include <cmath>
#include <sstream>

#include "bnmimo/bounds.hpp"
#include "bnmimo/errors.hpp"
#include "bounds_internal.hpp"

namespace bnmimo {

namespace {

[[noreturn]] void unsupported(Scheme scheme, const char* limit, const char* why) {
    std::ostringstream msg;
    msg << "limit " << limit << " is not available for scheme " << to_string(scheme) << ": " << why;
    throw UnsupportedLimit(msg.str());
}

const char* limit_name(Limit l) {
    switch (l) {
        case Limit::C_to_inf:
            return "C->inf";
        case Limit::M_to_inf:
            return "M->inf";
        case Limit::rho_to_inf:
            return "rho->inf";
    }
    return "?";
}

// K E[log2(1 + 1/a)] with a = sigma^2 / G, G ~ Gamma(M-K+1, 1).
double qci_infinite_c(const SystemParams& params) {
    if (params.K() > params.M()) {
        throw DomainError("QCI requires K <= M");
    }
    const int n = params.M() - params.K() + 1;
    const double s2 = params.sigma2();
    const double log_norm = log_gamma(n);
    const ScalarFn integrand = [n, s2, log_norm](double g) {
        if (g <= 0.0) {
            return 0.0;
        }
        return std::log2(1.0 + g / s2) * std::exp((n - 1) * std::log(g) - g - log_norm);
    };
    const double bulk = n + 15.0 * std::sqrt(static_cast<double>(n)) + 40.0;
    return params.K() * integrate_decaying(integrand, 0.0, {}, {bulk, n}).value;
}

double mmse_infinite_c(const SystemParams& params) {
    const EigDensity density(params);
    const double s2 = params.sigma2();
    const double mu = density.expect([s2](double l) { return l / (l + s2); });
    const double first = density.expect([s2](double l) { return std::log2(l / (l + s2)); });
    return params.K() * first - params.K() * std::log2(mu - mu * mu);
}

}  // namespace

double asymptote(const SystemParams& params, Scheme scheme, Limit limit, const AsymptoteOptions& opt) {
    const char* name = limit_name(limit);
    switch (scheme) {
        case Scheme::ub:
            return limit == Limit::C_to_inf ? capacity(params) : params.C();
        case Scheme::capacity:
            if (limit == Limit::C_to_inf) {
                return capacity(params);
            }
            unsupported(scheme, name, "capacity grows without bound");
        case Scheme::ndt:
            if (limit == Limit::C_to_inf) {
                return capacity(params);
            }
            if (limit == Limit::rho_to_inf) {
                return detail::ndt_maximize(params, 0.0).value;
            }
            unsupported(scheme, name, "the optimal distortion tends to 1 and no finite limit is defined");
        case Scheme::qci:
            if (limit == Limit::C_to_inf) {
                return qci_infinite_c(params);
            }
            return params.C();
        case Scheme::tci: {
            if (params.K() > params.M()) {
                throw DomainError("TCI requires K <= M");
            }
            if (limit == Limit::M_to_inf) {
                return params.C();
            }
            const TruncStats st = trunc_stats(params, opt.lambda_th, opt.mc);
            if (limit == Limit::rho_to_inf) {
                return params.C() - st.h_th;
            }
            return detail::tci_evaluate(params, st, true).rate.value;
        }
        case Scheme::mmse:
            if (limit == Limit::M_to_inf) {
                return params.C();
            }
            if (params.K() > params.M()) {
                unsupported(scheme, name, "the limit is only established for K <= M");
            }
            if (limit == Limit::rho_to_inf) {
                return params.C();
            }
            return mmse_infinite_c(params);
    }
    unsupported(scheme, name, "unknown scheme");
}

}  // namespace bnmimo

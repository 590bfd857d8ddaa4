#include "bnmimo/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bnmimo/errors.hpp"
#include "bnmimo/wishart.hpp"

namespace bnmimo {

SystemParams::SystemParams(int k, int m, double sigma2, double c_bits)
    : k_(k), m_(m), sigma2_(sigma2), c_(c_bits) {
    if (k < 1 || m < 1) {
        throw DomainError("K and M must be positive integers");
    }
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
        throw DomainError("noise variance must be positive and finite");
    }
    if (!(c_bits >= 0.0) || std::isnan(c_bits)) {
        throw DomainError("bottleneck capacity C must be non-negative");
    }
}

SystemParams SystemParams::from_snr_db(int k, int m, double snr_db, double c_bits) {
    if (!std::isfinite(snr_db)) {
        throw DomainError("SNR in dB must be finite");
    }
    return {k, m, 1.0 / db_to_linear(snr_db), c_bits};
}

double SystemParams::snr_db() const { return linear_to_db(rho()); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

std::string_view to_string(Method m) {
    switch (m) {
        case Method::quadrature:
            return "quadrature";
        case Method::monte_carlo:
            return "monte_carlo";
        case Method::closed_form:
            return "closed_form";
    }
    return "unknown";
}

std::string_view to_string(Scheme s) {
    switch (s) {
        case Scheme::ub:
            return "ub";
        case Scheme::ndt:
            return "ndt";
        case Scheme::qci:
            return "qci";
        case Scheme::tci:
            return "tci";
        case Scheme::mmse:
            return "mmse";
        case Scheme::capacity:
            return "capacity";
    }
    return "unknown";
}

Scheme scheme_from_string(std::string_view name) {
    for (Scheme s : {Scheme::ub, Scheme::ndt, Scheme::qci, Scheme::tci, Scheme::mmse, Scheme::capacity}) {
        if (to_string(s) == name) {
            return s;
        }
    }
    throw DomainError("unknown scheme '" + std::string(name) + "' (expected ub, ndt, qci, tci, mmse or capacity)");
}

std::string_view to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::C:
            return "C";
        case SweepAxis::rho_db:
            return "rho_db";
        case SweepAxis::M:
            return "M";
        case SweepAxis::K_equals_M:
            return "K_equals_M";
    }
    return "unknown";
}

SweepAxis sweep_axis_from_string(std::string_view name) {
    for (SweepAxis a : {SweepAxis::C, SweepAxis::rho_db, SweepAxis::M, SweepAxis::K_equals_M}) {
        if (to_string(a) == name) {
            return a;
        }
    }
    throw DomainError("unknown sweep axis '" + std::string(name) + "' (expected C, rho_db, M or K_equals_M)");
}

namespace {

int integer_axis_value(double v, std::string_view axis) {
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e6) {
        std::ostringstream msg;
        msg << "axis " << axis << " needs positive integer values, got " << v;
        throw DomainError(msg.str());
    }
    return static_cast<int>(v);
}

}  // namespace

std::vector<SystemParams> SweepSpec::expand() const {
    if (values.empty()) {
        throw DomainError("sweep has no axis values");
    }
    if (values.size() > 1) {
        const bool increasing = values[1] > values[0];
        for (std::size_t i = 1; i < values.size(); ++i) {
            const bool ok = increasing ? values[i] > values[i - 1] : values[i] < values[i - 1];
            if (!ok) {
                throw DomainError("sweep values must be strictly ordered");
            }
        }
    }
    std::vector<SystemParams> out;
    out.reserve(values.size());
    for (double v : values) {
        switch (axis) {
            case SweepAxis::C:
                out.push_back(fixed.with_C(v));
                break;
            case SweepAxis::rho_db:
                out.push_back(SystemParams::from_snr_db(fixed.K(), fixed.M(), v, fixed.C()));
                break;
            case SweepAxis::M:
                out.push_back(fixed.with_dims(fixed.K(), integer_axis_value(v, "M")));
                break;
            case SweepAxis::K_equals_M: {
                const int n = integer_axis_value(v, "K_equals_M");
                const double c = c_per_k ? *c_per_k * n : fixed.C();
                out.emplace_back(n, n, fixed.sigma2(), c);
                break;
            }
        }
    }
    return out;
}

double capacity(const SystemParams& params) {
    const EigDensity density(params);
    const double rho = params.rho();
    const double mean_nats = density.expect([rho](double l) { return std::log1p(rho * l); });
    return params.T() * mean_nats / std::log(2.0);
}

double scalar_ib_rate(double snr, double c) {
    if (!(snr >= 0.0) || !(c >= 0.0)) {
        throw DomainError("scalar_ib_rate needs snr >= 0 and c >= 0");
    }
    const double full = std::log1p(snr) / std::log(2.0);
    if (std::isinf(c)) {
        return full;
    }
    const double residual = std::log1p(snr * std::exp2(-c)) / std::log(2.0);
    return std::clamp(full - residual, 0.0, std::min(c, full));
}

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError("binary_entropy needs p in [0, 1]");
    }
    auto term = [](double x) { return x > 0.0 ? -x * std::log2(x) : 0.0; };
    return term(p) + term(1.0 - p);
}

}  // namespace bnmimo

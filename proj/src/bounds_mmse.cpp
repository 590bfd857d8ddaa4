#include <algorithm>
#include <cmath>
#include <limits>

#include "bnmimo/bounds.hpp"
#include "bnmimo/errors.hpp"

namespace bnmimo {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

}  // namespace

BoundResult mmse_bound(const SystemParams& params) {
    BoundResult out;
    out.method = Method::quadrature;
    const EigDensity density(params);
    const double s2 = params.sigma2();
    const double k = params.K();
    const double t = params.T();
    const double mu = density.expect([s2](double l) { return l / (l + s2); });
    const double q = t / k * mu;
    out.aux["mu"] = mu;
    if (params.C() == 0.0) {
        out.aux["D"] = nullptr;
        return out;
    }
    // ln D = ln q - ln(2^{C/K} - 1), kept in logs so large C does not
    // round D to zero before the (K - T) log D term.
    const double x = params.C() / k * kLn2;
    const double log_d = std::log(q) - (x + std::log(-std::expm1(-x)));
    const double dist = std::exp(log_d);
    const double first = density.expect([s2, dist](double l) { return std::log2(l / (l + s2) + dist); });
    const double raw = t * first + (k - t) * log_d / kLn2 - k * std::log2(q - q * q + dist);
    out.value = std::max(raw, 0.0);
    out.aux["D"] = dist;
    out.aux["raw_value"] = raw;
    return out;
}

}  // namespace bnmimo

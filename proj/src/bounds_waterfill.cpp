#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bnmimo/bounds.hpp"
#include "bnmimo/errors.hpp"
#include "bounds_internal.hpp"

namespace bnmimo {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

}  // namespace

double waterfill_constraint(const Density& density, double gain, double nu, const QuadratureSpec& spec) {
    const double log_ratio = std::log(gain / nu);
    return density.expect([log_ratio](double l) { return (log_ratio + std::log(l)) / kLn2; }, nu / gain, spec);
}

double waterfill_rate(const Density& density, double gain, double nu, const QuadratureSpec& spec) {
    const double floor = std::log1p(nu);
    return density.expect([gain, floor](double l) { return (std::log1p(gain * l) - floor) / kLn2; }, nu / gain,
                          spec);
}

WaterfillSolution waterfill_continuous(const Density& density, double gain, double budget_per_dim,
                                       const QuadratureSpec& spec) {
    if (!(budget_per_dim >= 0.0)) {
        throw DomainError("water-filling budget must be non-negative");
    }
    if (!(gain >= 0.0) || !std::isfinite(gain)) {
        throw DomainError("water-filling gain must be finite and non-negative");
    }
    WaterfillSolution sol;
    sol.budget = budget_per_dim;
    if (budget_per_dim == 0.0 || gain == 0.0) {
        sol.nu = std::numeric_limits<double>::infinity();
        return sol;
    }
    // For a point mass at the mean the level is gain * mean * 2^{-budget}.
    const double mean = density.expect([](double l) { return l; }, 0.0, spec);
    const double guess = gain * mean * std::exp2(-budget_per_dim);
    const ScalarFn constraint = [&](double nu) { return waterfill_constraint(density, gain, nu, spec); };
    const RootResult root = solve_monotone_positive(constraint, budget_per_dim, {0.25 * guess, 4.0 * guess});
    sol.nu = root.root;
    sol.residual = root.residual;
    sol.rate = std::max(0.0, waterfill_rate(density, gain, sol.nu, spec));
    return sol;
}

BoundResult upper_bound(const SystemParams& params) {
    BoundResult out;
    out.method = Method::quadrature;
    if (params.C() == 0.0) {
        out.aux["budget_per_dim"] = 0.0;
        return out;
    }
    const EigDensity density(params);
    const WaterfillSolution sol = waterfill_continuous(density, params.rho(), params.C() / params.T());
    out.value = params.T() * sol.rate;
    out.water_level = sol.nu;
    out.residual = sol.residual;
    out.aux["nu"] = sol.nu;
    out.aux["budget_per_dim"] = sol.budget;
    return out;
}

// ---------------------------------------------------------------------------

double ndt_min_distortion(const SystemParams& params) {
    return std::exp2(-params.C() / (static_cast<double>(params.K()) * params.M()));
}

namespace {

double ndt_gain_with(int k, double sigma2, double distortion) {
    return (1.0 - distortion) / (k * distortion + sigma2);
}

BoundResult ndt_rate_with(const SystemParams& params, double sigma2, double distortion) {
    if (!(distortion > 0.0 && distortion <= 1.0)) {
        throw InfeasibleDistortion("distortion D must lie in (0, 1]");
    }
    BoundResult out;
    out.method = Method::quadrature;
    out.aux["D"] = distortion;
    if (distortion == 1.0) {
        out.aux["gamma"] = 0.0;
        out.aux["budget_per_dim"] = params.C() / params.T();
        return out;
    }
    const double d_min = ndt_min_distortion(params);
    if (!(distortion > d_min)) {
        std::ostringstream msg;
        msg << "distortion D=" << distortion << " is infeasible: need D > 2^(-C/(KM)) = " << d_min;
        throw InfeasibleDistortion(msg.str());
    }
    const double rd = static_cast<double>(params.K()) * params.M() * -std::log2(distortion);
    const double budget = std::max(0.0, (params.C() - rd) / params.T());
    const double gamma = ndt_gain_with(params.K(), sigma2, distortion);
    const EigDensity density(params);
    const WaterfillSolution sol = waterfill_continuous(density, gamma, budget);
    out.value = params.T() * sol.rate;
    out.water_level = sol.nu;
    out.residual = sol.residual;
    out.aux["gamma"] = gamma;
    out.aux["budget_per_dim"] = budget;
    out.aux["nu"] = sol.nu;
    return out;
}

}  // namespace

double ndt_gain(const SystemParams& params, double distortion) {
    return ndt_gain_with(params.K(), params.sigma2(), distortion);
}

BoundResult ndt_rate(const SystemParams& params, double distortion) {
    return ndt_rate_with(params, params.sigma2(), distortion);
}

namespace detail {

// Shared with the rho -> inf asymptote, which maximizes with sigma^2 = 0.
BoundResult ndt_maximize(const SystemParams& params, double sigma2) {
    const double d_min = ndt_min_distortion(params);
    const double lo = d_min * (1.0 + 1e-6);
    if (!(lo < 1.0)) {
        BoundResult zero = ndt_rate_with(params, sigma2, 1.0);
        zero.aux["D_star"] = 1.0;
        return zero;
    }
    // Search over log D: the coarse grid is geometric in D.
    const ScalarFn objective = [&](double u) { return ndt_rate_with(params, sigma2, std::exp(u)).value; };
    const MaximizeResult best = maximize_scalar(objective, {std::log(lo), 0.0}, 128, 1e-7);
    BoundResult out = ndt_rate_with(params, sigma2, std::exp(best.x));
    out.aux["D_star"] = std::exp(best.x);
    out.aux["D_min"] = d_min;
    return out;
}

}  // namespace detail

BoundResult ndt_bound(const SystemParams& params) { return detail::ndt_maximize(params, params.sigma2()); }

}  // namespace bnmimo

#pragma once

#include <functional>
#include <span>
#include <utility>

namespace bnmimo {

using ScalarFn = std::function<double(double)>;

struct QuadratureSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int max_subdivisions = 4000;
};

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;
    int subintervals = 0;
};

/// Globally adaptive 10/21-point Gauss-Kronrod on a finite interval.
/// Throws NonConvergence when the subdivision cap is hit before the error
/// estimate meets max(abs_tol, rel_tol*|I|).
QuadratureResult integrate_interval(const ScalarFn& f, double a, double b,
                                    const QuadratureSpec& spec = {});

/// Same, starting from the given breakpoints (sorted, at least two). Useful
/// when a narrow bulk could slip between the nodes of a single wide panel.
QuadratureResult integrate_partitioned(const ScalarFn& f, std::span<const double> breaks,
                                       const QuadratureSpec& spec = {});

/// Where the mass of an exponentially decaying integrand lives. Integrands
/// like lambda^999 e^{-lambda} underflow to zero near the origin, so a
/// cutoff search started at `lower` alone cannot find them.
struct DecayHint {
    double bulk_hi = 0.0;    ///< integrand is negligible beyond bulk_hi + a few e-folds
    int poly_degree = 0;     ///< bound on the polynomial growth in front of e^{-x}
};

/// Integral of f over [lower, inf) for integrands that decay at least like
/// x^n e^{-x}. Integrates adaptively up to a cutoff where the Gamma tail
/// bound is below abs_tol and adds f(cutoff) as the tail estimate.
QuadratureResult integrate_decaying(const ScalarFn& f, double lower,
                                    const QuadratureSpec& spec = {},
                                    const DecayHint& hint = {});

struct RootResult {
    double root = 0.0;
    double residual = 0.0;  ///< |g(root) - target|
    int evaluations = 0;
};

/// Root of g(x) = target for continuous strictly monotone g. The hint
/// bracket is expanded (doubling its width away from the target side, at
/// most 60 rounds) until it straddles the target, then refined by Brent's
/// method until |g - target| <= 1e-9 * max(1, |target|).
RootResult solve_monotone(const ScalarFn& g, double target,
                          std::pair<double, double> bracket_hint);

/// Same as solve_monotone, for positive unknowns spanning many decades:
/// the search runs over log(x). `hint` brackets x, not log(x).
RootResult solve_monotone_positive(const ScalarFn& g, double target,
                                   std::pair<double, double> hint);

struct MaximizeResult {
    double x = 0.0;
    double value = 0.0;
};

/// Maximum of f over [a, b]: scan `coarse_points` equispaced nodes, then
/// golden-section refine inside the bracket around the best node until the
/// bracket is narrower than refine_tol.
MaximizeResult maximize_scalar(const ScalarFn& f, std::pair<double, double> interval,
                               int coarse_points, double refine_tol);

double log_gamma(double x);

/// Gamma(n, x) for integer n >= 1 by the finite sum
/// (n-1)! e^{-x} sum_{m<n} x^m / m!, evaluated in log space.
double upper_incomplete_gamma(int n, double x);
double log_upper_incomplete_gamma(int n, double x);

/// Gamma(n, x) / (n-1)!, in [0, 1].
double regularized_upper_gamma(int n, double x);

/// Generalised Laguerre polynomial L_i^alpha(x) by the three-term recurrence.
double laguerre_assoc(int i, int alpha, double x);

/// log(sum(exp(terms))), stable for widely spread terms.
double log_sum_exp(std::span<const double> terms);

}  // namespace bnmimo

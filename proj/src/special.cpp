#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bnmimo/errors.hpp"
#include "bnmimo/numerics.hpp"

namespace bnmimo {

double log_gamma(double x) {
    if (!(x > 0.0)) {
        throw DomainError("log_gamma needs x > 0");
    }
    // lgamma_r leaves the global signgam alone, so concurrent calls are safe.
    int sign = 0;
    return ::lgamma_r(x, &sign);
}

double log_upper_incomplete_gamma(int n, double x) {
    if (n < 1) {
        throw DomainError("incomplete gamma needs integer shape n >= 1");
    }
    if (!(x >= 0.0)) {
        throw DomainError("incomplete gamma needs x >= 0");
    }
    if (x == 0.0) {
        return log_gamma(static_cast<double>(n));
    }
    if (std::isinf(x)) {
        return -std::numeric_limits<double>::infinity();
    }
    std::vector<double> terms(static_cast<std::size_t>(n));
    const double lx = std::log(x);
    double log_fact = 0.0;
    for (int m = 0; m < n; ++m) {
        if (m > 0) {
            log_fact += std::log(static_cast<double>(m));
        }
        terms[static_cast<std::size_t>(m)] = m * lx - log_fact;
    }
    return log_gamma(static_cast<double>(n)) - x + log_sum_exp(terms);
}

double upper_incomplete_gamma(int n, double x) {
    return std::exp(log_upper_incomplete_gamma(n, x));
}

double regularized_upper_gamma(int n, double x) {
    const double q = std::exp(log_upper_incomplete_gamma(n, x) - log_gamma(static_cast<double>(n)));
    return std::clamp(q, 0.0, 1.0);
}

double laguerre_assoc(int i, int alpha, double x) {
    if (i < 0 || alpha < 0) {
        throw DomainError("laguerre_assoc needs i >= 0 and alpha >= 0");
    }
    double prev = 1.0;
    if (i == 0) {
        return prev;
    }
    double cur = 1.0 + alpha - x;
    for (int k = 1; k < i; ++k) {
        const double next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

double log_sum_exp(std::span<const double> terms) {
    if (terms.empty()) {
        return -std::numeric_limits<double>::infinity();
    }
    const double peak = *std::max_element(terms.begin(), terms.end());
    if (std::isinf(peak)) {
        return peak;
    }
    double acc = 0.0;
    for (double t : terms) {
        acc += std::exp(t - peak);
    }
    return peak + std::log(acc);
}

}  // namespace bnmimo

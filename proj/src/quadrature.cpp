#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include "bnmimo/errors.hpp"
#include "bnmimo/numerics.hpp"

namespace bnmimo {

namespace {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980484356, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Gauss weights for the odd Kronrod nodes 1, 3, 5, 7, 9.
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gauss_kronrod(const ScalarFn& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kWgk[10];
    double gauss = 0.0;
    for (int j = 0; j < 10; ++j) {
        const double dx = half * kXgk[static_cast<std::size_t>(j)];
        const double fsum = f(center - dx) + f(center + dx);
        kronrod += kWgk[static_cast<std::size_t>(j)] * fsum;
        if (j % 2 == 1) {
            gauss += kWg[static_cast<std::size_t>(j / 2)] * fsum;
        }
    }
    kronrod *= half;
    gauss *= half;
    double err = std::abs(kronrod - gauss);
    if (!std::isfinite(kronrod)) {
        err = std::numeric_limits<double>::infinity();
    }
    return {a, b, kronrod, err};
}

QuadratureResult integrate_panels(const ScalarFn& f, std::span<const double> breaks,
                                  const QuadratureSpec& spec) {
    if (!(spec.rel_tol > 0.0) || !(spec.abs_tol > 0.0)) {
        throw DomainError("quadrature tolerances must be positive");
    }
    std::priority_queue<Panel> heap;
    double total = 0.0;
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] <= breaks[i]) {
            continue;
        }
        Panel p = gauss_kronrod(f, breaks[i], breaks[i + 1]);
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }
    int subintervals = static_cast<int>(heap.size());
    // Panels too narrow to split further; their error stays in the budget.
    double frozen_err = 0.0;
    while (!heap.empty()) {
        const double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(total));
        if (total_err <= tol) {
            break;
        }
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const double scale = std::max(std::abs(worst.a), std::abs(worst.b));
        if (worst.b - worst.a <= 64.0 * std::numeric_limits<double>::epsilon() * scale ||
            mid <= worst.a || mid >= worst.b) {
            frozen_err += worst.error;
            continue;
        }
        if (subintervals >= spec.max_subdivisions) {
            heap.push(worst);
            break;
        }
        const Panel left = gauss_kronrod(f, worst.a, mid);
        const Panel right = gauss_kronrod(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++subintervals;
    }
    // Re-sum from the panels to shed accumulated cancellation in `total`.
    double value = 0.0;
    double err = frozen_err;
    std::vector<Panel> panels;
    panels.reserve(heap.size());
    while (!heap.empty()) {
        panels.push_back(heap.top());
        heap.pop();
    }
    std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    for (const Panel& p : panels) {
        value += p.value;
        err += p.error;
    }
    if (!std::isfinite(value)) {
        throw NonConvergence("quadrature produced a non-finite value");
    }
    const double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(value));
    // Frozen panels sit at the resolution limit of double; allow them a
    // modest overshoot before calling it a failure.
    if (err > tol && !(err - frozen_err <= tol && frozen_err <= 1e3 * tol)) {
        std::ostringstream msg;
        msg << "quadrature did not converge: error estimate " << err << " exceeds tolerance " << tol
            << " after " << subintervals << " subintervals";
        throw NonConvergence(msg.str());
    }
    return {value, err, subintervals};
}

}  // namespace

QuadratureResult integrate_interval(const ScalarFn& f, double a, double b, const QuadratureSpec& spec) {
    if (a == b) {
        return {};
    }
    if (b < a) {
        QuadratureResult r = integrate_interval(f, b, a, spec);
        r.value = -r.value;
        return r;
    }
    const std::array<double, 2> ends{a, b};
    return integrate_panels(f, ends, spec);
}

QuadratureResult integrate_partitioned(const ScalarFn& f, std::span<const double> breaks,
                                       const QuadratureSpec& spec) {
    if (breaks.size() < 2 || !std::is_sorted(breaks.begin(), breaks.end())) {
        throw DomainError("integrate_partitioned needs at least two sorted breakpoints");
    }
    return integrate_panels(f, breaks, spec);
}

QuadratureResult integrate_decaying(const ScalarFn& f, double lower, const QuadratureSpec& spec,
                                    const DecayHint& hint) {
    const double start = std::max(lower, hint.bulk_hi);
    const double n = static_cast<double>(std::max(hint.poly_degree, 0));
    // x^n e^{-x} tail below abs_tol / 1000 past the cutoff.
    const double log_target = std::log(spec.abs_tol * 1e-3);
    double cutoff = start + 40.0 + 2.0 * n;
    while (n * std::log(std::max(cutoff, 1.0)) - cutoff > log_target && cutoff < 1e7) {
        cutoff += 10.0;
    }
    for (int i = 0; i < 60; ++i) {
        const double fu = std::abs(f(cutoff));
        if (fu * std::max(1.0, cutoff) <= spec.abs_tol * 1e-3) {
            break;
        }
        cutoff = cutoff * 1.5 + 10.0;
    }
    constexpr int kPieces = 16;
    std::vector<double> breaks;
    breaks.reserve(kPieces + 1);
    for (int i = 0; i <= kPieces; ++i) {
        breaks.push_back(lower + (cutoff - lower) * static_cast<double>(i) / kPieces);
    }
    QuadratureResult r = integrate_panels(f, breaks, spec);
    const double tail = f(cutoff);
    r.value += tail;
    r.abs_error += std::abs(tail);
    return r;
}

}  // namespace bnmimo

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bnmimo/errors.hpp"
#include "bnmimo/numerics.hpp"

namespace bnmimo {

namespace {

constexpr int kExpansionRounds = 60;

// Brent's method on h(x) = g(x) - target over a bracket with a sign change.
RootResult brent(const ScalarFn& g, double target, double a, double fa, double b, double fb,
                 int evaluations) {
    const double ftol = 1e-9 * std::max(1.0, std::abs(target));
    if (std::abs(fa) < std::abs(fb)) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    double c = a;
    double fc = fa;
    double d = b - a;
    double e = d;
    for (int iter = 0; iter < 300; ++iter) {
        if (std::abs(fb) <= ftol) {
            break;
        }
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 1e-300;
        const double m = 0.5 * (c - b);
        if (std::abs(m) <= tol) {
            break;
        }
        if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
            double p;
            double q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                const double qa = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) {
                q = -q;
            } else {
                p = -p;
            }
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol ? d : (m > 0.0 ? tol : -tol);
        fb = g(b) - target;
        ++evaluations;
    }
    return {b, std::abs(fb), evaluations};
}

RootResult solve_bracketed(const ScalarFn& g, double target, double lo, double hi) {
    if (!(lo < hi)) {
        std::swap(lo, hi);
    }
    if (lo == hi) {
        hi = lo + 1.0;
    }
    double flo = g(lo) - target;
    double fhi = g(hi) - target;
    int evaluations = 2;
    for (int round = 0; round < kExpansionRounds; ++round) {
        if (flo == 0.0) {
            return {lo, 0.0, evaluations};
        }
        if (fhi == 0.0) {
            return {hi, 0.0, evaluations};
        }
        if ((flo < 0.0) != (fhi < 0.0)) {
            return brent(g, target, lo, flo, hi, fhi, evaluations);
        }
        // Same sign at both ends: extend the side whose value is closer to
        // the target, doubling the width.
        const double width = hi - lo;
        if (std::abs(fhi) < std::abs(flo)) {
            lo = hi;
            flo = fhi;
            hi = hi + 2.0 * width;
            fhi = g(hi) - target;
        } else {
            hi = lo;
            fhi = flo;
            lo = lo - 2.0 * width;
            flo = g(lo) - target;
        }
        ++evaluations;
        if (!std::isfinite(flo) || !std::isfinite(fhi)) {
            break;
        }
    }
    std::ostringstream msg;
    msg << "could not bracket target " << target << " (last bracket [" << lo << ", " << hi << "])";
    throw BracketFailure(msg.str());
}

}  // namespace

RootResult solve_monotone(const ScalarFn& g, double target, std::pair<double, double> bracket_hint) {
    return solve_bracketed(g, target, bracket_hint.first, bracket_hint.second);
}

RootResult solve_monotone_positive(const ScalarFn& g, double target, std::pair<double, double> hint) {
    if (!(hint.first > 0.0) || !(hint.second > 0.0)) {
        throw DomainError("solve_monotone_positive needs a positive bracket hint");
    }
    const ScalarFn in_log = [&g](double u) { return g(std::exp(u)); };
    RootResult r = solve_bracketed(in_log, target, std::log(hint.first), std::log(hint.second));
    r.root = std::exp(r.root);
    return r;
}

MaximizeResult maximize_scalar(const ScalarFn& f, std::pair<double, double> interval, int coarse_points,
                               double refine_tol) {
    const auto [a, b] = interval;
    if (!(a < b)) {
        throw DomainError("maximize_scalar needs a < b");
    }
    const int n = std::max(coarse_points, 2);
    const double step = (b - a) / static_cast<double>(n - 1);
    auto node = [&](int i) { return i == n - 1 ? b : a + step * static_cast<double>(i); };
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double v = f(node(i));
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    MaximizeResult out{node(best), best_val};
    double lo = node(std::max(best - 1, 0));
    double hi = node(std::min(best + 1, n - 1));
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int iter = 0; iter < 200 && hi - lo > refine_tol; ++iter) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    const double xr = f1 >= f2 ? x1 : x2;
    const double fr = std::max(f1, f2);
    if (fr > out.value) {
        out = {xr, fr};
    }
    return out;
}

}  // namespace bnmimo

#include <algorithm>
#include <cmath>
#include <exception>

#include "bnmimo/cli.hpp"
#include "bnmimo/montecarlo.hpp"

namespace bnmimo::cli {

namespace {

using Json = nlohmann::ordered_json;

// e * E1(1), the value of the integral of ln(1 + x) e^{-x} over [0, inf).
constexpr double kEE1 = 0.59634736232319407434;

template <class Fn>
CheckResult guarded(const std::string& name, Fn&& body) {
    CheckResult c;
    c.name = name;
    try {
        body(c);
    } catch (const std::exception& e) {
        c.passed = false;
        c.detail["exception"] = e.what();
    }
    return c;
}

double relative_residual(double measured, double target) {
    return std::abs(measured - target) / std::max(1.0, std::abs(target));
}

}  // namespace

std::vector<CheckResult> run_validation(const ValidateOptions& options) {
    const int max_dim = options.quick ? 4 : 8;
    const double tol_norm = options.tolerance.value_or(1e-10);
    const double tol_mean = options.tolerance.value_or(1e-8);
    const double tol_residual = options.tolerance.value_or(1e-8);
    McConfig mc = options.mc;
    std::vector<CheckResult> out;

    out.push_back(guarded("pdf_normalization_and_mean", [&](CheckResult& c) {
        double worst_norm = 0.0;
        double worst_mean = 0.0;
        for (int k = 1; k <= max_dim; ++k) {
            for (int m = 1; m <= max_dim; ++m) {
                const EigDensity d(std::min(k, m), std::max(k, m));
                worst_norm = std::max(worst_norm, std::abs(d.expect([](double) { return 1.0; }) - 1.0));
                worst_mean = std::max(worst_mean, std::abs(d.expect([](double l) { return l; }) / d.S() - 1.0));
            }
        }
        c.detail["max_dim"] = max_dim;
        c.detail["worst_norm_error"] = worst_norm;
        c.detail["worst_mean_rel_error"] = worst_mean;
        c.passed = worst_norm <= tol_norm && worst_mean <= tol_mean;
    }));

    out.push_back(guarded("quadrature_known_integrals", [&](CheckResult& c) {
        const double a = integrate_decaying([](double x) { return x * std::exp(-x); }, 1.0).value;
        const double b = integrate_decaying([](double x) { return std::log1p(x) * std::exp(-x); }, 0.0).value;
        const double err_a = std::abs(a - 2.0 / std::exp(1.0));
        const double err_b = std::abs(b - kEE1);
        c.detail["error_x_exp"] = err_a;
        c.detail["error_log_exp"] = err_b;
        c.passed = std::max(err_a, err_b) <= tol_norm;
    }));

    out.push_back(guarded("waterfill_residuals", [&](CheckResult& c) {
        const QuadratureSpec tight{1e-12, 1e-14, 20000};
        double worst = 0.0;
        for (int n : {1, 2, 4}) {
            for (double snr_db : {0.0, 20.0}) {
                for (double cb : {8.0, 32.0}) {
                    const SystemParams p = SystemParams::from_snr_db(n, n, snr_db, cb);
                    const EigDensity d(p);
                    const BoundResult ub = upper_bound(p);
                    const double budget = p.C() / p.T();
                    worst = std::max(worst, relative_residual(
                                                waterfill_constraint(d, p.rho(), *ub.water_level, tight), budget));
                    const BoundResult nd = ndt_bound(p);
                    if (nd.water_level && std::isfinite(*nd.water_level)) {
                        const double gamma = nd.aux["gamma"].get<double>();
                        const double b = nd.aux["budget_per_dim"].get<double>();
                        worst = std::max(worst, relative_residual(
                                                    waterfill_constraint(d, gamma, *nd.water_level, tight), b));
                    }
                }
            }
        }
        c.detail["worst_relative_residual"] = worst;
        c.passed = worst <= tol_residual;
    }));

    out.push_back(guarded("dominance_small_grid", [&](CheckResult& c) {
        int violations = 0;
        int cells = 0;
        for (int n : {1, 2}) {
            for (double snr_db : {0.0, 20.0}) {
                for (double cb : {8.0, 32.0}) {
                    const SystemParams p = SystemParams::from_snr_db(n, n, snr_db, cb);
                    const double ub = upper_bound(p).value;
                    const double slack = 1e-6;
                    ++cells;
                    if (ndt_bound(p).value > ub + slack || mmse_bound(p).value > ub + slack) {
                        ++violations;
                    }
                    if (2.0 < cb / n && qci_bound_quantile(p, 2).value > ub + slack) {
                        ++violations;
                    }
                    const BoundResult t = tci_bound(p, mc);
                    if (t.value > ub + 3.0 * t.std_error.value_or(0.0) + slack) {
                        ++violations;
                    }
                    if (ub > cb + 1e-9) {
                        ++violations;
                    }
                }
            }
        }
        c.detail["cells"] = cells;
        c.detail["violations"] = violations;
        c.passed = violations == 0;
    }));

    out.push_back(guarded("tci_sandwich", [&](CheckResult& c) {
        const SystemParams p = SystemParams::from_snr_db(4, 4, 10.0, 40.0);
        const TruncStats st = trunc_stats(p, 0.05, mc);
        const TciResult r = tci_rate(p, 0.05, st);
        c.detail["lower"] = r.lower;
        c.detail["rate"] = r.rate.value;
        c.detail["upper"] = r.upper;
        c.passed = r.lower <= r.rate.value + 1e-12 && r.rate.value <= r.upper + 1e-12;
    }));

    out.push_back(guarded("mc_vs_quadrature_capacity", [&](CheckResult& c) {
        const SystemParams p = SystemParams::from_snr_db(2, 4, 10.0, 0.0);
        const double rho = p.rho();
        const McEstimate e = mc_eig_expect(p, [rho](double l) { return std::log2(1.0 + rho * l); }, mc);
        const double cap = capacity(p);
        c.detail["capacity"] = cap;
        c.detail["mc"] = p.T() * e.mean;
        c.detail["mc_std_error"] = p.T() * e.std_error;
        c.passed = std::abs(p.T() * e.mean - cap) <= 3.0 * p.T() * e.std_error;
    }));

    out.push_back(guarded("trunc_prob_mc", [&](CheckResult& c) {
        const SystemParams p(2, 2, 1.0, 0.0);
        const TruncStats st = mc_trunc_stats(p, 0.1, mc);
        const double exact = trunc_prob(p, 0.1);
        const double se = st.std_errors->p_th_mc;
        c.detail["exact"] = exact;
        c.detail["mc"] = st.p_th;
        c.detail["mc_std_error"] = se;
        c.passed = std::abs(st.p_th - exact) <= 3.0 * se;
    }));

    out.push_back(guarded("determinism_replay", [&](CheckResult& c) {
        const SystemParams p(2, 3, 1.0, 0.0);
        const auto g = [](double l) { return std::log1p(l); };
        const McEstimate a = mc_eig_expect(p, g, mc);
        const McEstimate b = mc_eig_expect(p, g, mc);
        c.detail["mean"] = a.mean;
        c.passed = a.mean == b.mean && a.std_error == b.std_error && a.n_effective == b.n_effective;
    }));
    return out;
}

nlohmann::ordered_json validation_report(const ValidateOptions& options, const std::vector<CheckResult>& checks) {
    Json report;
    report["quick"] = options.quick;
    report["samples"] = options.mc.samples;
    report["seed"] = options.mc.seed;
    if (options.tolerance) {
        report["tolerance_override"] = *options.tolerance;
    }
    Json list = Json::array();
    bool all = true;
    for (const CheckResult& c : checks) {
        Json j;
        j["name"] = c.name;
        j["passed"] = c.passed;
        j["detail"] = c.detail;
        list.push_back(j);
        all = all && c.passed;
    }
    report["checks"] = list;
    report["passed"] = all;
    return report;
}

}  // namespace bnmimo::cli

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bnmimo/bounds.hpp"
#include "bnmimo/errors.hpp"
#include "bnmimo/montecarlo.hpp"
#include "bounds_internal.hpp"

namespace bnmimo {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

void require_k_le_m(const SystemParams& params) {
    if (params.K() > params.M()) {
        std::ostringstream msg;
        msg << "TCI requires K <= M (got K=" << params.K() << ", M=" << params.M() << ")";
        throw DomainError(msg.str());
    }
}

nlohmann::ordered_json stats_json(const TruncStats& st) {
    nlohmann::ordered_json j;
    j["lambda_th"] = st.lambda_th;
    j["p_th"] = st.p_th;
    j["h_th"] = st.h_th;
    j["e_inv_lambda"] = st.e_inv_lambda;
    j["e_lambda"] = st.e_lambda;
    j["stats_method"] = std::string(to_string(st.method));
    if (st.p_th_mc) {
        j["p_th_mc"] = *st.p_th_mc;
        j["accepted"] = st.accepted;
        j["drawn"] = st.drawn;
    }
    return j;
}

}  // namespace

namespace detail {

TciResult tci_evaluate(const SystemParams& params, const TruncStats& st, bool infinite_c) {
    const double k = params.K();
    const double s2 = params.sigma2();
    const double p = st.p_th;
    const double e = st.e_inv_lambda;
    const double m = st.e_lambda;
    TciResult out;
    out.rate.method = st.law && st.law->sampled() ? Method::monte_carlo : Method::quadrature;
    out.rate.aux = stats_json(st);
    if (!(p > 0.0)) {
        throw InsufficientAcceptance("truncation probability is zero");
    }
    // D = (1 + sigma^2 e) / (2^x - 1) with x = (C - H_th) / (P_th K).
    double dist = 0.0;
    double d_prime = 0.0;  // dD/de
    if (!infinite_c) {
        const double x = (params.C() - st.h_th) / (p * k);
        if (x < 0.0) {
            std::ostringstream msg;
            msg << "bottleneck C=" << params.C() << " is below the threshold-indicator entropy H_th=" << st.h_th;
            throw InsufficientBottleneck(msg.str());
        }
        if (x == 0.0) {
            out.distortion = std::numeric_limits<double>::infinity();
            out.rate.aux["D"] = nullptr;
            return out;
        }
        const double denom = std::expm1(x * kLn2);
        dist = (1.0 + s2 * e) / denom;
        d_prime = s2 / denom;
    }
    out.distortion = dist;
    const double noise = dist + s2 * e;
    const ScalarFn g = [dist, s2](double l) { return std::log2(1.0 + dist + s2 / l); };
    const McEstimate first = st.law ? st.law->expect(g) : McEstimate{};
    const double pk = p * k;
    const double log_noise = std::log2(noise);
    out.rate.value = std::max(0.0, pk * (first.mean - log_noise));
    out.lower = std::max(0.0, pk * (std::log2(1.0 + dist + s2 / m) - log_noise));
    out.upper = std::max(0.0, pk * (std::log2(1.0 + noise) - log_noise));
    out.rate.aux["D"] = dist;
    out.rate.aux["lower"] = out.lower;
    out.rate.aux["upper"] = out.upper;

    if (st.law && st.law->sampled()) {
        // Delta method over the accepted draws: each bound is a smooth
        // function of per-draw means, so its influence is linear in them.
        const double dr_de_common = -(d_prime + s2) / (noise * kLn2);
        const ScalarFn gp = [dist, s2](double l) { return 1.0 / ((1.0 + dist + s2 / l) * kLn2); };
        const double g_prime = st.law->expect(gp).mean;
        const double dr_de = pk * (g_prime * d_prime + dr_de_common);
        const double lower_arg = 1.0 + dist + s2 / m;
        const double dl_de = pk * (d_prime / (lower_arg * kLn2) + dr_de_common);
        const double dl_dm = pk * (-s2 / (m * m)) / (lower_arg * kLn2);
        const double du_de = pk * ((d_prime + s2) / ((1.0 + noise) * kLn2) + dr_de_common);
        RunningStats r_stats;
        RunningStats l_stats;
        RunningStats u_stats;
        st.law->for_each_sample([&](std::span<const double> row) {
            double gs = 0.0;
            double inv = 0.0;
            double lin = 0.0;
            for (double l : row) {
                gs += std::log2(1.0 + dist + s2 / l);
                inv += 1.0 / l;
                lin += l;
            }
            const double n = static_cast<double>(row.size());
            gs /= n;
            inv /= n;
            lin /= n;
            r_stats.add(pk * (gs - first.mean) + dr_de * (inv - e));
            l_stats.add(dl_de * (inv - e) + dl_dm * (lin - m));
            u_stats.add(du_de * (inv - e));
        });
        out.rate.std_error = r_stats.std_error();
        out.lower_std_error = l_stats.std_error();
        out.upper_std_error = u_stats.std_error();
        out.rate.aux["std_error"] = *out.rate.std_error;
    }
    return out;
}

}  // namespace detail

TciResult tci_rate(const SystemParams& params, double lambda_th, const TruncStats& stats) {
    require_k_le_m(params);
    if (lambda_th != stats.lambda_th) {
        throw DomainError("truncation statistics were computed for a different threshold");
    }
    if (lambda_th == 0.0 && params.K() == params.M()) {
        throw DivergentStatistic("TCI with K == M needs lambda_th > 0: E[1/lambda] diverges at 0");
    }
    return detail::tci_evaluate(params, stats, false);
}

TciResult tci_closed_form_zero_threshold(const SystemParams& params) {
    if (params.K() >= params.M()) {
        throw DomainError("the zero-threshold closed form needs K < M");
    }
    return tci_rate(params, 0.0, trunc_stats(params, 0.0, McConfig{}));
}

std::vector<double> tci_threshold_grid(const SystemParams& params, ThresholdPolicy policy, double fixed_lambda_th,
                                       int grid_points) {
    require_k_le_m(params);
    const bool square = params.K() == params.M();
    if (policy == ThresholdPolicy::fixed) {
        if (!(fixed_lambda_th >= 0.0)) {
            throw DomainError("lambda_th must be non-negative");
        }
        if (fixed_lambda_th == 0.0 && square) {
            throw DivergentStatistic("TCI with K == M needs lambda_th > 0: E[1/lambda] diverges at 0");
        }
        return {fixed_lambda_th};
    }
    if (policy == ThresholdPolicy::zero_only) {
        if (square) {
            throw DivergentStatistic("TCI with K == M needs lambda_th > 0: E[1/lambda] diverges at 0");
        }
        return {0.0};
    }
    if (grid_points < 2) {
        throw DomainError("threshold grid needs at least two points");
    }
    // Geometric grid on [1e-3, lambda_hi] with P_th(lambda_hi) = 0.01.
    double hi;
    if (square) {
        hi = std::log(100.0) / params.K();
    } else {
        const ScalarFn p = [&params](double l) { return trunc_prob(params, l); };
        hi = solve_monotone_positive(p, 0.01, {0.5, 2.0}).root;
    }
    const double lo = 1e-3;
    std::vector<double> grid;
    if (policy == ThresholdPolicy::automatic && !square) {
        grid.push_back(0.0);
    }
    for (int i = 0; i < grid_points; ++i) {
        grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (grid_points - 1)));
    }
    return grid;
}

BoundResult tci_bound(const SystemParams& params, const McConfig& mc, ThresholdPolicy policy,
                      double fixed_lambda_th, std::vector<ThresholdScan>* scan) {
    require_k_le_m(params);
    const std::vector<double> grid = tci_threshold_grid(params, policy, fixed_lambda_th);
    const bool need_samples = std::any_of(grid.begin(), grid.end(), [](double l) { return l > 0.0; });
    EigenSampleSet samples;
    if (need_samples) {
        samples = sample_eigenvalue_sets(params, mc);
    }
    std::vector<ThresholdScan> results;
    std::string last_error;
    for (double lambda_th : grid) {
        try {
            TruncStats st;
            if (lambda_th == 0.0) {
                st = trunc_stats(params, 0.0, mc);
            } else {
                st = trunc_stats_from_samples(params, samples, lambda_th, mc);
                st.p_th = trunc_prob(params, lambda_th);
                st.h_th = binary_entropy(st.p_th);
            }
            results.push_back({lambda_th, detail::tci_evaluate(params, st, false)});
        } catch (const InsufficientAcceptance& e) {
            last_error = e.what();
        } catch (const InsufficientBottleneck& e) {
            last_error = e.what();
        }
    }
    if (results.empty()) {
        throw InsufficientAcceptance("no TCI threshold candidate could be evaluated: " + last_error);
    }
    // Largest estimate wins, except that a sampled candidate must beat the
    // exact lambda_th = 0 value by more than three standard errors.
    const ThresholdScan* best = nullptr;
    const ThresholdScan* zero = nullptr;
    for (const ThresholdScan& r : results) {
        if (r.lambda_th == 0.0) {
            zero = &r;
        }
        if (best == nullptr || r.result.rate.value > best->result.rate.value) {
            best = &r;
        }
    }
    if (zero != nullptr && best != zero) {
        const double se = best->result.rate.std_error.value_or(0.0);
        if (!(best->result.rate.value > zero->result.rate.value + 3.0 * se)) {
            best = zero;
        }
    }
    BoundResult out = best->result.rate;
    out.aux["lambda_th"] = best->lambda_th;
    out.aux["candidates"] = results.size();
    out.aux["seed"] = mc.seed;
    if (scan != nullptr) {
        *scan = std::move(results);
    }
    return out;
}

}  // namespace bnmimo

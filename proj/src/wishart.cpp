#include "bnmimo/wishart.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bnmimo/errors.hpp"
#include "bnmimo/montecarlo.hpp"

namespace bnmimo {

namespace {

constexpr int kDensityPanels = 24;

std::vector<double> equal_breaks(double a, double b, int pieces) {
    std::vector<double> breaks;
    breaks.reserve(static_cast<std::size_t>(pieces) + 1);
    for (int i = 0; i <= pieces; ++i) {
        breaks.push_back(i == pieces ? b : a + (b - a) * static_cast<double>(i) / pieces);
    }
    return breaks;
}

void require_k_le_m(const SystemParams& params, const char* what) {
    if (params.K() > params.M()) {
        std::ostringstream msg;
        msg << what << " requires K <= M (got K=" << params.K() << ", M=" << params.M() << ")";
        throw DomainError(msg.str());
    }
}

}  // namespace

double Density::expect(const ScalarFn& g, double lower, const QuadratureSpec& spec) const {
    return expect_between(g, lower, support_hi(), spec);
}

double Density::expect_between(const ScalarFn& g, double lower, double upper,
                               const QuadratureSpec& spec) const {
    const double a = std::max(lower, support_lo());
    const double b = std::min(upper, support_hi());
    if (!(a < b)) {
        return 0.0;
    }
    const ScalarFn integrand = [this, &g](double x) {
        const double p = pdf(x);
        return p == 0.0 ? 0.0 : g(x) * p;
    };
    const std::vector<double> breaks = equal_breaks(a, b, kDensityPanels);
    return integrate_partitioned(integrand, breaks, spec).value;
}

EigDensity::EigDensity(int t, int s) : t_(t), s_(s) {
    if (t < 1 || s < t) {
        throw DomainError("EigDensity needs 1 <= T <= S");
    }
    const int alpha = s - t;
    log_weight_.resize(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) {
        log_weight_[static_cast<std::size_t>(i)] =
            log_gamma(i + 1.0) - log_gamma(i + alpha + 1.0) - std::log(static_cast<double>(t));
    }
    // Window outside which the mass is far below double precision: the
    // largest Gamma component has shape S+T-1, the smallest S-T+1.
    const double n_hi = static_cast<double>(s + t - 1);
    hi_ = n_hi + 15.0 * std::sqrt(n_hi) + 50.0;
    const double n_lo = static_cast<double>(alpha + 1);
    lo_ = std::max(0.0, n_lo - 14.0 * std::sqrt(n_lo) - 30.0);
}

double EigDensity::pdf(double lambda) const {
    if (lambda < 0.0) {
        return 0.0;
    }
    const int alpha = s_ - t_;
    double base;
    if (lambda == 0.0) {
        if (alpha > 0) {
            return 0.0;
        }
        base = 0.0;
    } else {
        base = alpha * std::log(lambda) - lambda;
    }
    double sum = 0.0;
    double prev = 1.0;
    double cur = 1.0 + alpha - lambda;
    for (int i = 0; i < t_; ++i) {
        double l;
        if (i == 0) {
            l = 1.0;
        } else {
            if (i > 1) {
                const int k = i - 1;
                const double next = ((2.0 * k + 1.0 + alpha - lambda) * cur - (k + alpha) * prev) / (k + 1.0);
                prev = cur;
                cur = next;
            }
            l = cur;
        }
        sum += std::exp(base + log_weight_[static_cast<std::size_t>(i)]) * l * l;
    }
    return sum;
}

double EigDensity::cdf(double lambda) const {
    if (lambda <= lo_) {
        return 0.0;
    }
    if (lambda >= hi_) {
        return 1.0;
    }
    return std::clamp(expect_between([](double) { return 1.0; }, 0.0, lambda), 0.0, 1.0);
}

double eig_pdf(const EigDensity& d, double lambda) { return d.pdf(lambda); }

double eig_expect(const EigDensity& d, const ScalarFn& g, double lower, const QuadratureSpec& spec) {
    return d.expect(g, lower, spec);
}

// ---------------------------------------------------------------------------

double noise_pdf(const SystemParams& params, double a) {
    require_k_le_m(params, "noise_pdf");
    if (!(a > 0.0)) {
        return 0.0;
    }
    const int n = params.M() - params.K() + 1;
    const double y = params.sigma2() / a;
    return std::exp(n * std::log(y) - y - log_gamma(n) - std::log(a));
}

double noise_cdf(const SystemParams& params, double a) {
    require_k_le_m(params, "noise_cdf");
    if (!(a > 0.0)) {
        return 0.0;
    }
    if (std::isinf(a)) {
        return 1.0;
    }
    return regularized_upper_gamma(params.M() - params.K() + 1, params.sigma2() / a);
}

double noise_quantile(const SystemParams& params, double prob) {
    require_k_le_m(params, "noise_quantile");
    if (!(prob > 0.0 && prob < 1.0)) {
        throw DomainError("noise_quantile needs a probability in (0, 1)");
    }
    const double n = params.M() - params.K() + 1.0;
    const double center = params.sigma2() / n;
    const ScalarFn cdf = [&params](double a) { return noise_cdf(params, a); };
    return solve_monotone_positive(cdf, prob, {0.5 * center, 2.0 * center}).root;
}

double entropy_bits(std::span<const double> pmf) {
    double h = 0.0;
    for (double p : pmf) {
        if (p > 0.0) {
            h -= p * std::log2(p);
        }
    }
    return h;
}

QuantGrid noise_grid_pmf(const SystemParams& params, std::vector<double> points, const QuadratureSpec& spec) {
    require_k_le_m(params, "noise_grid_pmf");
    if (points.empty() || !std::isinf(points.back()) || points.back() < 0.0) {
        throw DomainError("quantization grid must end with +inf");
    }
    for (std::size_t j = 0; j + 1 < points.size(); ++j) {
        if (!(points[j] > 0.0) || !std::isfinite(points[j])) {
            throw DomainError("finite quantization levels must be positive");
        }
        if (j > 0 && !(points[j] > points[j - 1])) {
            throw DomainError("quantization levels must be strictly increasing (duplicates are ambiguous)");
        }
    }
    // P(b_{j-1} < a <= b_j) in the variable g = sigma^2 / a ~ Gamma(n, 1),
    // where the integrand decays exponentially.
    const int n = params.M() - params.K() + 1;
    const double s2 = params.sigma2();
    const double log_norm = log_gamma(n);
    const ScalarFn gamma_pdf = [n, log_norm](double g) {
        if (g <= 0.0) {
            return n == 1 ? std::exp(-log_norm) : 0.0;
        }
        return std::exp((n - 1) * std::log(g) - g - log_norm);
    };
    const double bulk = n + 15.0 * std::sqrt(static_cast<double>(n)) + 40.0;
    QuantGrid grid;
    grid.pmf.reserve(points.size());
    double prev = 0.0;
    double assigned = 0.0;
    for (double b : points) {
        const double g_lo = std::isinf(b) ? 0.0 : s2 / b;
        double p;
        if (std::isinf(b)) {
            // The sentinel cell takes the complement so the pmf sums to one.
            p = 1.0 - assigned;
        } else if (prev == 0.0) {
            p = integrate_decaying(gamma_pdf, g_lo, spec, {bulk, n - 1}).value;
        } else {
            const double g_hi = s2 / prev;
            const std::vector<double> breaks = equal_breaks(g_lo, g_hi, 8);
            p = integrate_partitioned(gamma_pdf, breaks, spec).value;
        }
        grid.pmf.push_back(std::max(p, 0.0));
        assigned += grid.pmf.back();
        prev = b;
    }
    grid.points = std::move(points);
    grid.entropy_h0 = entropy_bits(grid.pmf);
    return grid;
}

QuantGrid noise_quantile_grid(const SystemParams& params, int bits_b) {
    require_k_le_m(params, "noise_quantile_grid");
    if (bits_b < 1 || bits_b > 20) {
        throw DomainError("QCI needs an integer B in [1, 20]");
    }
    const int levels = 1 << bits_b;
    QuantGrid grid;
    grid.points.reserve(static_cast<std::size_t>(levels));
    for (int j = 1; j < levels; ++j) {
        grid.points.push_back(noise_quantile(params, static_cast<double>(j) / levels));
    }
    grid.points.push_back(std::numeric_limits<double>::infinity());
    grid.pmf.assign(static_cast<std::size_t>(levels), 1.0 / levels);
    grid.entropy_h0 = bits_b;
    grid.bits_b = bits_b;
    return grid;
}

std::size_t ceil_index(double a, const QuantGrid& grid) {
    const auto it = std::lower_bound(grid.points.begin(), grid.points.end(), a);
    if (it == grid.points.end()) {
        return grid.points.size() - 1;
    }
    return static_cast<std::size_t>(it - grid.points.begin());
}

double ceil_to_grid(double a, const QuantGrid& grid) { return grid.points[ceil_index(a, grid)]; }

// ---------------------------------------------------------------------------

TruncProb trunc_prob_checked(const SystemParams& params, double lambda_th) {
    require_k_le_m(params, "trunc_prob");
    if (!(lambda_th >= 0.0) || !std::isfinite(lambda_th)) {
        throw DomainError("lambda_th must be finite and non-negative");
    }
    const int k = params.K();
    const int m = params.M();
    using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    // Hankel matrix of Gamma(M-K+i+j-1, lambda_th), scaled to unit diagonal
    // so the determinant of the scaled matrix is O(1).
    Eigen::MatrixXd log_entry(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            log_entry(i, j) = log_upper_incomplete_gamma(m - k + i + j + 1, lambda_th);
        }
    }
    LMatrix scaled(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            scaled(i, j) = std::exp(static_cast<long double>(log_entry(i, j)) -
                                    0.5L * static_cast<long double>(log_entry(i, i) + log_entry(j, j)));
        }
    }
    const long double det_scaled = Eigen::PartialPivLU<LMatrix>(scaled).determinant();
    const Eigen::SelfAdjointEigenSolver<LMatrix> eig(scaled, Eigen::EigenvaluesOnly);
    const long double ev_min = eig.eigenvalues().minCoeff();
    const long double ev_max = eig.eigenvalues().maxCoeff();

    long double log_value = 0.0L;
    for (int i = 0; i < k; ++i) {
        log_value += static_cast<long double>(log_entry(i, i));
    }
    for (int i = 1; i <= k; ++i) {
        log_value -= static_cast<long double>(log_gamma(m - i + 1.0) + log_gamma(k - i + 1.0));
    }
    TruncProb out;
    out.determinant_value = det_scaled > 0.0L ? static_cast<double>(det_scaled * std::exp(log_value)) : 0.0;
    out.digits_lost = ev_min > 0.0L ? static_cast<double>(std::log10(ev_max / ev_min))
                                    : std::numeric_limits<double>::infinity();
    out.ill_conditioned = out.digits_lost > 8.0;
    if (lambda_th == 0.0) {
        out.probability = 1.0;
    } else if (k == m) {
        out.probability = std::exp(-lambda_th * k);
    } else {
        out.probability = std::clamp(out.determinant_value, 0.0, 1.0);
    }
    return out;
}

double trunc_prob(const SystemParams& params, double lambda_th) {
    return trunc_prob_checked(params, lambda_th).probability;
}

namespace {

/// Unconditional law for lambda_th = 0 and K < M: exact quadrature.
class ExactLaw final : public ConditionalLaw {
public:
    explicit ExactLaw(const SystemParams& params) : density_(params) {}
    McEstimate expect(const ScalarFn& g) const override {
        McEstimate e;
        e.mean = density_.expect(g);
        return e;
    }
    bool sampled() const override { return false; }
    void for_each_sample(const std::function<void(std::span<const double>)>&) const override {}

private:
    EigDensity density_;
};

}  // namespace

TruncStats trunc_stats(const SystemParams& params, double lambda_th, const McConfig& mc) {
    require_k_le_m(params, "trunc_stats");
    if (!(lambda_th >= 0.0) || !std::isfinite(lambda_th)) {
        throw DomainError("lambda_th must be finite and non-negative");
    }
    if (lambda_th == 0.0) {
        if (params.K() == params.M()) {
            throw DivergentStatistic(
                "E[1/lambda] diverges when K == M and lambda_th == 0; use a positive threshold");
        }
        TruncStats st;
        st.lambda_th = 0.0;
        st.p_th = 1.0;
        st.h_th = 0.0;
        st.e_inv_lambda = 1.0 / (params.M() - params.K());
        st.e_lambda = params.M();
        st.method = Method::closed_form;
        st.law = std::make_shared<ExactLaw>(params);
        return st;
    }
    TruncStats st = mc_trunc_stats(params, lambda_th, mc);
    st.p_th = trunc_prob(params, lambda_th);
    st.h_th = binary_entropy(st.p_th);
    return st;
}

// ---------------------------------------------------------------------------

std::vector<double> gram_eigenvalues(const ComplexMatrix& h) {
    const ComplexMatrix gram = h.rows() >= h.cols() ? ComplexMatrix(h.adjoint() * h)
                                                    : ComplexMatrix(h * h.adjoint());
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(gram, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = solver.eigenvalues();
    std::vector<double> out(static_cast<std::size_t>(ev.size()));
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        out[static_cast<std::size_t>(i)] = std::max(ev(i), 0.0);
    }
    return out;
}

std::vector<double> sample_channel(std::uint64_t seed, const SystemParams& params, ComplexMatrix* raw) {
    std::mt19937_64 rng(seed);
    return draw_channel(rng, params, raw);
}

}  // namespace bnmimo

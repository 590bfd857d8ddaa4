#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bnmimo/mc_types.hpp"
#include "bnmimo/model.hpp"
#include "bnmimo/numerics.hpp"

namespace bnmimo {

/// A probability density on [0, inf) with a known bulk. Integrals against
/// it run over [support_lo, support_hi]; outside that window the mass is
/// below double precision.
class Density {
public:
    virtual ~Density() = default;
    virtual double pdf(double x) const = 0;
    virtual double support_lo() const = 0;
    virtual double support_hi() const = 0;

    /// Integral of g * pdf over [lower, inf).
    double expect(const ScalarFn& g, double lower = 0.0, const QuadratureSpec& spec = {}) const;
    /// Same with a caller-chosen finite upper limit (clipped to the support).
    double expect_between(const ScalarFn& g, double lower, double upper,
                          const QuadratureSpec& spec = {}) const;
};

/// Marginal density of one unordered positive eigenvalue of HH^H:
/// f(l) = (1/T) sum_{i<T} i!/(i+S-T)! [L_i^{S-T}(l)]^2 l^{S-T} e^{-l}.
class EigDensity final : public Density {
public:
    EigDensity(int t, int s);
    explicit EigDensity(const SystemParams& p) : EigDensity(p.T(), p.S()) {}

    int T() const { return t_; }
    int S() const { return s_; }

    double pdf(double lambda) const override;
    double support_lo() const override { return lo_; }
    double support_hi() const override { return hi_; }

    double cdf(double lambda) const;

private:
    int t_;
    int s_;
    std::vector<double> log_weight_;  // log(i!/(i+S-T)!) - log T
    double lo_;
    double hi_;
};

double eig_pdf(const EigDensity& d, double lambda);
double eig_expect(const EigDensity& d, const ScalarFn& g, double lower = 0.0,
                  const QuadratureSpec& spec = {});

// ---------------------------------------------------------------------------
// Zero-forcing noise levels a = sigma^2 [(H^H H)^{-1}]_kk, K <= M.
// a = sigma^2 / G with G ~ Gamma(M-K+1, 1).

double noise_pdf(const SystemParams& params, double a);
double noise_cdf(const SystemParams& params, double a);
double noise_quantile(const SystemParams& params, double prob);

/// Quantization grid b_1 < ... < b_{J-1} < b_J = +inf in absolute noise power.
struct QuantGrid {
    std::vector<double> points;  ///< last entry is +inf
    std::vector<double> pmf;
    double entropy_h0 = 0.0;     ///< bits
    std::optional<int> bits_b;   ///< B when J = 2^B quantile grid

    int J() const { return static_cast<int>(points.size()); }
};

QuantGrid noise_quantile_grid(const SystemParams& params, int bits_b);
QuantGrid noise_grid_pmf(const SystemParams& params, std::vector<double> points,
                         const QuadratureSpec& spec = {});

/// Smallest grid level >= a (index and value).
std::size_t ceil_index(double a, const QuantGrid& grid);
double ceil_to_grid(double a, const QuantGrid& grid);

double entropy_bits(std::span<const double> pmf);

// ---------------------------------------------------------------------------
// Truncation event Delta = {lambda_min(H^H H) >= lambda_th}.

struct TruncProb {
    double probability = 1.0;
    double determinant_value = 1.0;  ///< determinant route, always computed
    double digits_lost = 0.0;        ///< log10 condition of the scaled Hankel matrix
    bool ill_conditioned = false;    ///< more than half the working precision lost
};

TruncProb trunc_prob_checked(const SystemParams& params, double lambda_th);
double trunc_prob(const SystemParams& params, double lambda_th);

/// Accepted eigenvalue sets for conditional expectations under Delta.
class ConditionalLaw {
public:
    virtual ~ConditionalLaw() = default;
    /// E[g(lambda) | Delta] with its standard error (0 for quadrature).
    virtual McEstimate expect(const ScalarFn& g) const = 0;
    /// True when backed by accepted Monte Carlo draws.
    virtual bool sampled() const = 0;
    /// Visits each accepted draw (its K eigenvalues). No-op for exact laws.
    virtual void for_each_sample(const std::function<void(std::span<const double>)>& visit) const = 0;
};

struct TruncStats {
    double lambda_th = 0.0;
    double p_th = 1.0;
    double h_th = 0.0;
    double e_inv_lambda = 0.0;
    double e_lambda = 0.0;
    Method method = Method::closed_form;

    struct StdErrors {
        double e_inv_lambda = 0.0;
        double e_lambda = 0.0;
        double p_th_mc = 0.0;  ///< std error of the rejection estimate of P_th
    };
    std::optional<StdErrors> std_errors;
    std::optional<double> p_th_mc;         ///< rejection-sampling estimate (MC only)
    std::int64_t accepted = 0;
    std::int64_t drawn = 0;

    std::shared_ptr<const ConditionalLaw> law;
};

TruncStats trunc_stats(const SystemParams& params, double lambda_th, const McConfig& mc);

// ---------------------------------------------------------------------------
// Channel sampling.

using ComplexMatrix = Eigen::MatrixXcd;

/// Positive eigenvalues (length T, ascending) of H^H H (K <= M) or HH^H.
template <class Rng>
std::vector<double> draw_channel(Rng& rng, const SystemParams& params,
                                   ComplexMatrix* raw = nullptr);

/// Deterministic per seed: draws one channel from a generator seeded by seed.
std::vector<double> sample_channel(std::uint64_t seed, const SystemParams& params,
                                   ComplexMatrix* raw = nullptr);

/// Eigenvalues of the T x T Gram matrix of a sampled M x K channel.
std::vector<double> gram_eigenvalues(const ComplexMatrix& h);

}  // namespace bnmimo

#include "bnmimo/detail/sampling.ipp"

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace bnmimo {

/// (K, M, sigma^2, C) for the Rayleigh MIMO channel y = Hx + n followed by a
/// noiseless link of C bits per complex dimension. Immutable once built.
class SystemParams {
public:
    SystemParams(int k, int m, double sigma2, double c_bits);

    static SystemParams from_snr_db(int k, int m, double snr_db, double c_bits);

    int K() const { return k_; }
    int M() const { return m_; }
    int T() const { return k_ < m_ ? k_ : m_; }
    int S() const { return k_ < m_ ? m_ : k_; }
    double sigma2() const { return sigma2_; }
    double rho() const { return 1.0 / sigma2_; }
    double snr_db() const;
    double C() const { return c_; }

    SystemParams with_C(double c_bits) const { return {k_, m_, sigma2_, c_bits}; }
    SystemParams with_sigma2(double sigma2) const { return {k_, m_, sigma2, c_}; }
    SystemParams with_dims(int k, int m) const { return {k, m, sigma2_, c_}; }

private:
    int k_;
    int m_;
    double sigma2_;
    double c_;
};

double db_to_linear(double db);
double linear_to_db(double linear);

enum class Method { quadrature, monte_carlo, closed_form };

std::string_view to_string(Method m);

/// A rate in bits per complex dimension plus what the solver produced.
struct BoundResult {
    double value = 0.0;
    std::optional<double> water_level;
    nlohmann::ordered_json aux = nlohmann::ordered_json::object();
    double residual = 0.0;
    Method method = Method::quadrature;
    std::optional<double> std_error;  ///< Monte Carlo paths only
};

enum class Scheme { ub, ndt, qci, tci, mmse, capacity };

std::string_view to_string(Scheme s);
Scheme scheme_from_string(std::string_view name);

enum class SweepAxis { C, rho_db, M, K_equals_M };

std::string_view to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(std::string_view name);

enum class ThresholdPolicy { automatic, zero_only, grid_only, fixed };

struct SchemeOptions {
    int qci_bits = 2;                       ///< B for QCI
    ThresholdPolicy tci_policy = ThresholdPolicy::automatic;
    double tci_lambda_th = 0.0;             ///< used by ThresholdPolicy::fixed
    std::optional<double> ndt_distortion;   ///< fixed D instead of maximizing
};

/// Drives parameter sweeps. Axis values are applied to the `fixed` template;
/// for K_equals_M both dimensions take the value and C = c_per_k * K when
/// c_per_k is set.
struct SweepSpec {
    SweepAxis axis = SweepAxis::rho_db;
    std::vector<double> values;
    SystemParams fixed{1, 1, 1.0, 0.0};
    std::vector<Scheme> schemes;
    SchemeOptions options;
    std::optional<double> c_per_k;

    /// Validates ordering and every resulting parameter set.
    std::vector<SystemParams> expand() const;
};

/// Ergodic capacity T * E[log2(1 + rho lambda)] in bits.
double capacity(const SystemParams& params);

/// Optimal rate of the scalar Gaussian IB with SNR snr and budget c bits:
/// log2(1 + snr) - log2(1 + snr 2^{-c}).
double scalar_ib_rate(double snr, double c);

/// Binary entropy in bits; throws DomainError outside [0, 1].
double binary_entropy(double p);

}  // namespace bnmimo

#pragma once

#include <optional>
#include <vector>

#include "bnmimo/mc_types.hpp"
#include "bnmimo/model.hpp"
#include "bnmimo/wishart.hpp"

namespace bnmimo {

/// Continuous water-filling over a density: allocation
/// c(l) = [log2(gain l / nu)]^+ with nu meeting the per-dimension budget.
struct WaterfillSolution {
    double nu = 0.0;          ///< +inf when budget == 0
    double rate = 0.0;        ///< bits per dimension
    double budget = 0.0;      ///< bits per dimension
    double residual = 0.0;    ///< |constraint(nu) - budget|
};

WaterfillSolution waterfill_continuous(const Density& density, double gain, double budget_per_dim,
                                       const QuadratureSpec& spec = {});

/// The two integrals that define a water-filling solution, exposed so a
/// caller can re-evaluate the constraint at a returned level.
double waterfill_constraint(const Density& density, double gain, double nu,
                            const QuadratureSpec& spec = {});
double waterfill_rate(const Density& density, double gain, double nu,
                      const QuadratureSpec& spec = {});

/// Informed-receiver upper bound.
BoundResult upper_bound(const SystemParams& params);

// Non-decoding transmission ---------------------------------------------------

/// Smallest admissible distortion 2^{-C/(KM)} (exclusive).
double ndt_min_distortion(const SystemParams& params);
double ndt_gain(const SystemParams& params, double distortion);
BoundResult ndt_rate(const SystemParams& params, double distortion);
BoundResult ndt_bound(const SystemParams& params);

// Quantized channel inversion -------------------------------------------------

/// Discrete water-filling over the finite levels of `grid`. The CSI cost is
/// K * H0 unless `csi_bits` overrides it (joint-entropy mode).
BoundResult qci_rate(const SystemParams& params, const QuantGrid& grid,
                     std::optional<double> csi_bits = std::nullopt);

/// Quantile grid with J = 2^B levels and the ordered active-set search.
BoundResult qci_bound_quantile(const SystemParams& params, int bits_b);

/// Objective sum_j K P_j [log2(1+rho_j) - log2(1+rho_j 2^{-c_j})] for an
/// explicit allocation over the finite levels.
double qci_objective(const SystemParams& params, const QuantGrid& grid,
                     const std::vector<double>& allocation);

// Truncated channel inversion -------------------------------------------------

struct TciResult {
    BoundResult rate;     ///< R
    double lower = 0.0;   ///< Jensen lower bound (uses E[lambda | Delta])
    double upper = 0.0;   ///< Jensen upper bound (uses E[1/lambda | Delta])
    double distortion = 0.0;
    double lower_std_error = 0.0;
    double upper_std_error = 0.0;
};

TciResult tci_rate(const SystemParams& params, double lambda_th, const TruncStats& stats);
TciResult tci_closed_form_zero_threshold(const SystemParams& params);

struct ThresholdScan {
    double lambda_th = 0.0;
    TciResult result;
};

/// Candidate thresholds for the policy (lambda_th = 0 first when allowed).
std::vector<double> tci_threshold_grid(const SystemParams& params, ThresholdPolicy policy,
                                       double fixed_lambda_th = 0.0, int grid_points = 16);

/// Best TCI rate over the policy's thresholds; every candidate is evaluated
/// on one common sample set. `scan`, when given, receives every candidate.
BoundResult tci_bound(const SystemParams& params, const McConfig& mc,
                      ThresholdPolicy policy = ThresholdPolicy::automatic,
                      double fixed_lambda_th = 0.0,
                      std::vector<ThresholdScan>* scan = nullptr);

// MMSE estimate at the relay --------------------------------------------------

BoundResult mmse_bound(const SystemParams& params);

// Asymptotes ------------------------------------------------------------------

enum class Limit { C_to_inf, M_to_inf, rho_to_inf };

struct AsymptoteOptions {
    double lambda_th = 0.0;
    McConfig mc{};
};

double asymptote(const SystemParams& params, Scheme scheme, Limit limit,
                 const AsymptoteOptions& opt = {});

}  // namespace bnmimo

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "bnmimo/mc_types.hpp"
#include "bnmimo/wishart.hpp"

namespace bnmimo {

/// Welford accumulator with Chan's pairwise merge.
struct RunningStats {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x);
    void merge(const RunningStats& other);
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double std_error() const;
};

/// Generator for batch `batch` of a run seeded by `seed`. Batches are
/// independent streams so results do not depend on thread count.
std::mt19937_64 batch_rng(std::uint64_t seed, std::int64_t batch, std::uint32_t stream_tag = 0);

/// Sampled eigenvalue sets: samples x T values, row-major, each row ascending.
struct EigenSampleSet {
    int T = 0;
    std::vector<double> values;

    std::int64_t size() const { return T == 0 ? 0 : static_cast<std::int64_t>(values.size()) / T; }
    std::span<const double> row(std::int64_t i) const {
        return {values.data() + i * T, static_cast<std::size_t>(T)};
    }
};

EigenSampleSet sample_eigenvalue_sets(const SystemParams& params, const McConfig& cfg);

/// Mean of g over sampled unordered eigenvalues; the per-draw average over
/// the T eigenvalues is the i.i.d. unit for the standard error.
McEstimate mc_eig_expect(const SystemParams& params, const ScalarFn& g, const McConfig& cfg);

/// Rejection-sampled truncation statistics. p_th is the acceptance rate here.
TruncStats mc_trunc_stats(const SystemParams& params, double lambda_th, const McConfig& cfg);

/// Same statistics from an existing sample set (used to scan thresholds on
/// common random numbers).
TruncStats trunc_stats_from_samples(const SystemParams& params, const EigenSampleSet& set,
                                    double lambda_th, const McConfig& cfg);

struct EntropyOptions {
    bool miller_madow = false;
};

McEstimate mc_joint_entropy(const SystemParams& params, const QuantGrid& grid,
                            const McConfig& cfg, const EntropyOptions& opt = {});
McEstimate mc_sum_entropy(const SystemParams& params, const QuantGrid& grid,
                          const McConfig& cfg, const EntropyOptions& opt = {});

/// Joint and sum entropies estimated from the same draws, with the paired
/// standard error of H_sum - H_joint.
struct EntropyPair {
    McEstimate joint;
    McEstimate sum;
    McEstimate gap;  ///< H_sum - H_joint
    std::vector<double> marginal_pmf;
    std::vector<double> marginal_std_error;
};

EntropyPair mc_entropy_pair(const SystemParams& params, const QuantGrid& grid,
                            const McConfig& cfg, const EntropyOptions& opt = {});

/// Zero-forcing noise levels sigma^2 diag((H^H H)^{-1}) for one draw (K <= M).
template <class Rng>
std::vector<double> draw_noise_levels(Rng& rng, const SystemParams& params);

}  // namespace bnmimo

#include "bnmimo/detail/noise_levels.ipp"

#include "bnmimo/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bnmimo/errors.hpp"
#include "bnmimo/parallel.hpp"

namespace bnmimo {

namespace {

constexpr std::uint32_t kTagEigen = 1;
constexpr std::uint32_t kTagNoise = 2;

std::int64_t batch_length(const McConfig& cfg, std::int64_t b) {
    return std::min(cfg.batch_size, cfg.samples - b * cfg.batch_size);
}

class SampledLaw final : public ConditionalLaw {
public:
    SampledLaw(int k, std::vector<double> rows, std::uint64_t seed)
        : k_(k), rows_(std::move(rows)), seed_(seed) {}

    McEstimate expect(const ScalarFn& g) const override {
        RunningStats st;
        const std::size_t k = static_cast<std::size_t>(k_);
        for (std::size_t r = 0; r + k <= rows_.size(); r += k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                acc += g(rows_[r + i]);
            }
            st.add(acc / static_cast<double>(k));
        }
        return {st.mean, st.std_error(), st.n, seed_};
    }
    bool sampled() const override { return true; }
    void for_each_sample(const std::function<void(std::span<const double>)>& visit) const override {
        const std::size_t k = static_cast<std::size_t>(k_);
        for (std::size_t r = 0; r + k <= rows_.size(); r += k) {
            visit(std::span<const double>(rows_.data() + r, k));
        }
    }

private:
    int k_;
    std::vector<double> rows_;
    std::uint64_t seed_;
};

}  // namespace

void McConfig::validate() const {
    if (samples < 1000) {
        throw DomainError("Monte Carlo needs at least 1000 samples");
    }
    if (batch_size < 1 || batch_size > samples) {
        throw DomainError("Monte Carlo batch size must be in [1, samples]");
    }
    if (min_accepted < 0) {
        throw DomainError("min_accepted must be non-negative");
    }
}

void RunningStats::add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
}

void RunningStats::merge(const RunningStats& other) {
    if (other.n == 0) {
        return;
    }
    if (n == 0) {
        *this = other;
        return;
    }
    const double total = static_cast<double>(n + other.n);
    const double delta = other.mean - mean;
    mean += delta * static_cast<double>(other.n) / total;
    m2 += other.m2 + delta * delta * static_cast<double>(n) * static_cast<double>(other.n) / total;
    n += other.n;
}

double RunningStats::std_error() const {
    return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
}

std::mt19937_64 batch_rng(std::uint64_t seed, std::int64_t batch, std::uint32_t stream_tag) {
    const auto b = static_cast<std::uint64_t>(batch);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32), stream_tag};
    return std::mt19937_64(seq);
}

EigenSampleSet sample_eigenvalue_sets(const SystemParams& params, const McConfig& cfg) {
    cfg.validate();
    EigenSampleSet set;
    set.T = params.T();
    const std::size_t t = static_cast<std::size_t>(set.T);
    set.values.resize(static_cast<std::size_t>(cfg.samples) * t);
    parallel_for(cfg.batch_count(), [&](std::int64_t b) {
        std::mt19937_64 rng = batch_rng(cfg.seed, b, kTagEigen);
        const std::int64_t first = b * cfg.batch_size;
        const std::int64_t count = batch_length(cfg, b);
        for (std::int64_t s = 0; s < count; ++s) {
            const std::vector<double> ev = draw_channel(rng, params);
            std::copy(ev.begin(), ev.end(), set.values.begin() + static_cast<std::ptrdiff_t>((first + s) * set.T));
        }
    });
    return set;
}

McEstimate mc_eig_expect(const SystemParams& params, const ScalarFn& g, const McConfig& cfg) {
    const EigenSampleSet set = sample_eigenvalue_sets(params, cfg);
    std::vector<RunningStats> per_batch(static_cast<std::size_t>(cfg.batch_count()));
    parallel_for(cfg.batch_count(), [&](std::int64_t b) {
        RunningStats& st = per_batch[static_cast<std::size_t>(b)];
        const std::int64_t first = b * cfg.batch_size;
        const std::int64_t count = batch_length(cfg, b);
        for (std::int64_t s = first; s < first + count; ++s) {
            double acc = 0.0;
            for (double l : set.row(s)) {
                acc += g(l);
            }
            st.add(acc / set.T);
        }
    });
    RunningStats total;
    for (const RunningStats& st : per_batch) {
        total.merge(st);
    }
    return {total.mean, total.std_error(), total.n, cfg.seed};
}

TruncStats trunc_stats_from_samples(const SystemParams& params, const EigenSampleSet& set, double lambda_th,
                                    const McConfig& cfg) {
    if (params.K() > params.M()) {
        throw DomainError("truncation statistics require K <= M");
    }
    if (!(lambda_th >= 0.0)) {
        throw DomainError("lambda_th must be non-negative");
    }
    if (lambda_th == 0.0 && params.K() == params.M()) {
        throw DivergentStatistic("E[1/lambda] does not exist when K == M and lambda_th == 0");
    }
    const std::size_t k = static_cast<std::size_t>(params.K());
    std::vector<double> accepted_rows;
    RunningStats inv;
    RunningStats lin;
    for (std::int64_t s = 0; s < set.size(); ++s) {
        const std::span<const double> row = set.row(s);
        if (row[0] < lambda_th) {
            continue;
        }
        double a = 0.0;
        double b = 0.0;
        for (double l : row) {
            a += 1.0 / l;
            b += l;
        }
        inv.add(a / static_cast<double>(k));
        lin.add(b / static_cast<double>(k));
        accepted_rows.insert(accepted_rows.end(), row.begin(), row.end());
    }
    if (inv.n < std::max<std::int64_t>(cfg.min_accepted, 2)) {
        std::ostringstream msg;
        msg << "only " << inv.n << " of " << set.size() << " draws satisfy lambda_min >= " << lambda_th
            << " (need " << cfg.min_accepted << "); raise the sample count or lower the threshold";
        throw InsufficientAcceptance(msg.str());
    }
    TruncStats st;
    st.lambda_th = lambda_th;
    st.drawn = set.size();
    st.accepted = inv.n;
    const double p = static_cast<double>(st.accepted) / static_cast<double>(st.drawn);
    st.p_th = p;
    st.p_th_mc = p;
    st.h_th = binary_entropy(p);
    st.e_inv_lambda = inv.mean;
    st.e_lambda = lin.mean;
    st.method = Method::monte_carlo;
    st.std_errors = TruncStats::StdErrors{inv.std_error(), lin.std_error(),
                                          std::sqrt(p * (1.0 - p) / static_cast<double>(st.drawn))};
    st.law = std::make_shared<SampledLaw>(params.K(), std::move(accepted_rows), cfg.seed);
    return st;
}

TruncStats mc_trunc_stats(const SystemParams& params, double lambda_th, const McConfig& cfg) {
    if (params.K() > params.M()) {
        throw DomainError("truncation statistics require K <= M");
    }
    return trunc_stats_from_samples(params, sample_eigenvalue_sets(params, cfg), lambda_th, cfg);
}

// ---------------------------------------------------------------------------
// Entropy of quantized zero-forcing noise levels.

namespace {

struct CellDraws {
    int K = 0;
    int J = 0;
    std::vector<int> index;  // samples x K grid indices

    std::int64_t size() const { return static_cast<std::int64_t>(index.size()) / K; }
};

CellDraws draw_cells(const SystemParams& params, const QuantGrid& grid, const McConfig& cfg) {
    if (params.K() > params.M()) {
        throw DomainError("noise-level entropy requires K <= M");
    }
    cfg.validate();
    CellDraws d;
    d.K = params.K();
    d.J = grid.J();
    d.index.resize(static_cast<std::size_t>(cfg.samples) * static_cast<std::size_t>(d.K));
    parallel_for(cfg.batch_count(), [&](std::int64_t b) {
        std::mt19937_64 rng = batch_rng(cfg.seed, b, kTagNoise);
        const std::int64_t first = b * cfg.batch_size;
        const std::int64_t count = batch_length(cfg, b);
        for (std::int64_t s = 0; s < count; ++s) {
            const std::vector<double> a = draw_noise_levels(rng, params);
            for (int k = 0; k < d.K; ++k) {
                d.index[static_cast<std::size_t>((first + s) * d.K + k)] =
                    static_cast<int>(ceil_index(a[static_cast<std::size_t>(k)], grid));
            }
        }
    });
    return d;
}

double miller_madow(std::int64_t occupied, std::int64_t n) {
    return static_cast<double>(occupied - 1) / (2.0 * static_cast<double>(n) * std::log(2.0));
}

struct EntropyInfluence {
    double estimate = 0.0;
    std::vector<double> psi;  // per-sample influence values
};

EntropyInfluence joint_influence(const CellDraws& d, const EntropyOptions& opt) {
    const std::int64_t n = d.size();
    std::int64_t cells = 1;
    for (int k = 0; k < d.K; ++k) {
        cells *= d.J;
    }
    if (n < 50 * cells) {
        std::ostringstream msg;
        msg << "joint entropy over " << cells << " cells needs at least " << 50 * cells << " samples (got " << n
            << ")";
        throw CellExplosion(msg.str());
    }
    std::vector<std::int64_t> cell_of(static_cast<std::size_t>(n));
    std::vector<std::int64_t> counts(static_cast<std::size_t>(cells), 0);
    for (std::int64_t s = 0; s < n; ++s) {
        std::int64_t c = 0;
        for (int k = d.K - 1; k >= 0; --k) {
            c = c * d.J + d.index[static_cast<std::size_t>(s * d.K + k)];
        }
        cell_of[static_cast<std::size_t>(s)] = c;
        ++counts[static_cast<std::size_t>(c)];
    }
    EntropyInfluence out;
    out.psi.resize(static_cast<std::size_t>(n));
    const double nn = static_cast<double>(n);
    std::int64_t occupied = 0;
    for (std::int64_t c : counts) {
        if (c > 0) {
            ++occupied;
            const double p = static_cast<double>(c) / nn;
            out.estimate -= p * std::log2(p);
        }
    }
    for (std::int64_t s = 0; s < n; ++s) {
        const double p = static_cast<double>(counts[static_cast<std::size_t>(cell_of[static_cast<std::size_t>(s)])]) / nn;
        out.psi[static_cast<std::size_t>(s)] = -std::log2(p);
    }
    if (opt.miller_madow) {
        out.estimate += miller_madow(occupied, n);
    }
    return out;
}

EntropyInfluence sum_influence(const CellDraws& d, const EntropyOptions& opt, std::vector<double>* pmf_out) {
    const std::int64_t n = d.size();
    std::vector<std::int64_t> counts(static_cast<std::size_t>(d.J), 0);
    for (int idx : d.index) {
        ++counts[static_cast<std::size_t>(idx)];
    }
    const double total = static_cast<double>(d.index.size());
    std::vector<double> pmf(static_cast<std::size_t>(d.J));
    std::vector<double> neg_log(static_cast<std::size_t>(d.J), 0.0);
    std::int64_t occupied = 0;
    for (int j = 0; j < d.J; ++j) {
        const double p = static_cast<double>(counts[static_cast<std::size_t>(j)]) / total;
        pmf[static_cast<std::size_t>(j)] = p;
        if (p > 0.0) {
            ++occupied;
            neg_log[static_cast<std::size_t>(j)] = -std::log2(p);
        }
    }
    EntropyInfluence out;
    out.estimate = d.K * entropy_bits(pmf);
    if (opt.miller_madow) {
        // Marginal pmf is estimated from n*K pooled values.
        out.estimate += d.K * miller_madow(occupied, n * d.K);
    }
    out.psi.resize(static_cast<std::size_t>(n));
    for (std::int64_t s = 0; s < n; ++s) {
        double acc = 0.0;
        for (int k = 0; k < d.K; ++k) {
            acc += neg_log[static_cast<std::size_t>(d.index[static_cast<std::size_t>(s * d.K + k)])];
        }
        out.psi[static_cast<std::size_t>(s)] = acc;
    }
    if (pmf_out != nullptr) {
        *pmf_out = std::move(pmf);
    }
    return out;
}

double influence_std_error(const std::vector<double>& psi) {
    RunningStats st;
    for (double v : psi) {
        st.add(v);
    }
    return st.std_error();
}

}  // namespace

McEstimate mc_joint_entropy(const SystemParams& params, const QuantGrid& grid, const McConfig& cfg,
                            const EntropyOptions& opt) {
    const CellDraws d = draw_cells(params, grid, cfg);
    const EntropyInfluence j = joint_influence(d, opt);
    return {j.estimate, influence_std_error(j.psi), d.size(), cfg.seed};
}

McEstimate mc_sum_entropy(const SystemParams& params, const QuantGrid& grid, const McConfig& cfg,
                          const EntropyOptions& opt) {
    const CellDraws d = draw_cells(params, grid, cfg);
    const EntropyInfluence s = sum_influence(d, opt, nullptr);
    return {s.estimate, influence_std_error(s.psi), d.size(), cfg.seed};
}

EntropyPair mc_entropy_pair(const SystemParams& params, const QuantGrid& grid, const McConfig& cfg,
                            const EntropyOptions& opt) {
    const CellDraws d = draw_cells(params, grid, cfg);
    const EntropyInfluence j = joint_influence(d, opt);
    EntropyPair out;
    const EntropyInfluence s = sum_influence(d, opt, &out.marginal_pmf);
    const std::int64_t n = d.size();
    std::vector<double> gap_psi(j.psi.size());
    for (std::size_t i = 0; i < gap_psi.size(); ++i) {
        gap_psi[i] = s.psi[i] - j.psi[i];
    }
    out.joint = {j.estimate, influence_std_error(j.psi), n, cfg.seed};
    out.sum = {s.estimate, influence_std_error(s.psi), n, cfg.seed};
    out.gap = {s.estimate - j.estimate, influence_std_error(gap_psi), n, cfg.seed};
    // Per-cell standard error from each draw's share of its K levels.
    out.marginal_std_error.assign(static_cast<std::size_t>(d.J), 0.0);
    for (int cell = 0; cell < d.J; ++cell) {
        RunningStats st;
        for (std::int64_t s_i = 0; s_i < n; ++s_i) {
            int hits = 0;
            for (int k = 0; k < d.K; ++k) {
                hits += d.index[static_cast<std::size_t>(s_i * d.K + k)] == cell ? 1 : 0;
            }
            st.add(static_cast<double>(hits) / d.K);
        }
        out.marginal_std_error[static_cast<std::size_t>(cell)] = st.std_error();
    }
    return out;
}

}  // namespace bnmimo

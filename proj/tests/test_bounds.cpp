#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "bnmimo/bounds.hpp"
#include "bnmimo/errors.hpp"

using namespace bnmimo;
using doctest::Approx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Narrow Gaussian standing in for a point mass at `center`.
class Spike final : public Density {
public:
    Spike(double center, double width) : c_(center), w_(width) {}
    double pdf(double x) const override {
        const double z = (x - c_) / w_;
        return std::exp(-0.5 * z * z) / (w_ * std::sqrt(2.0 * std::numbers::pi));
    }
    double support_lo() const override { return c_ - 12.0 * w_; }
    double support_hi() const override { return c_ + 12.0 * w_; }

private:
    double c_;
    double w_;
};

McConfig config(std::int64_t samples, std::uint64_t seed = 20240601) {
    McConfig c;
    c.samples = samples;
    c.seed = seed;
    c.batch_size = std::min<std::int64_t>(4096, samples);
    return c;
}

}  // namespace

TEST_CASE("water-filling over a point mass reduces to the scalar IB") {
    const Spike spike(2.0, 1e-5);
    const double gain = 3.0;
    const double budget = 2.5;
    const WaterfillSolution s = waterfill_continuous(spike, gain, budget);
    CHECK(s.nu == Approx(gain * 2.0 * std::exp2(-budget)).epsilon(1e-5));
    CHECK(s.rate == Approx(scalar_ib_rate(gain * 2.0, budget)).epsilon(1e-5));
}

TEST_CASE("water-filling basics") {
    const EigDensity d(2, 3);
    const WaterfillSolution zero = waterfill_continuous(d, 4.0, 0.0);
    CHECK(zero.rate == 0.0);
    CHECK(std::isinf(zero.nu));

    double prev = 0.0;
    for (double b : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        const WaterfillSolution s = waterfill_continuous(d, 4.0, b);
        CHECK(s.rate > prev);
        CHECK(waterfill_constraint(d, 4.0, s.nu) == Approx(b).epsilon(1e-8));
        CHECK(waterfill_rate(d, 4.0, s.nu) == Approx(s.rate).epsilon(1e-12));
        prev = s.rate;
    }
}

TEST_CASE("informed receiver upper bound") {
    // E1(nu)/ln 2 = 1 and the matching rate, solved at 30 digits.
    const BoundResult r = upper_bound(SystemParams(1, 1, 1.0, 1.0));
    CHECK(r.water_level.value() == Approx(0.4055632060019850).epsilon(1e-8));
    CHECK(r.value == Approx(0.4519470689591726).epsilon(1e-9));

    CHECK(upper_bound(SystemParams(2, 2, 1.0, 0.0)).value == 0.0);

    const SystemParams p = SystemParams::from_snr_db(2, 2, 10.0, 0.0);
    const double cap = capacity(p);
    CHECK(upper_bound(p.with_C(10.0 * cap)).value == Approx(cap).epsilon(0.01));

    for (double c : {1.0, 4.0, 16.0, 64.0}) {
        const double v = upper_bound(p.with_C(c)).value;
        CHECK(v <= c + 1e-9);
        CHECK(v <= cap + 1e-6);
    }
    CHECK(upper_bound(SystemParams(2, 4, 1.0, 6.0)).value ==
          Approx(upper_bound(SystemParams(4, 2, 1.0, 6.0)).value));
}

TEST_CASE("non-decoding transmission at a fixed distortion") {
    // gamma = 1/3 and a 3-bit budget, solved at 30 digits.
    const BoundResult r = ndt_rate(SystemParams(1, 1, 1.0, 4.0), 0.5);
    CHECK(r.water_level.value() == Approx(0.02519555985157206).epsilon(1e-8));
    CHECK(r.value == Approx(0.3435255583492842).epsilon(1e-9));

    const SystemParams p = SystemParams::from_snr_db(4, 4, 20.0, 40.0);
    CHECK(ndt_rate(p, 1.0).value == 0.0);
    CHECK_THROWS_AS(ndt_rate(p, ndt_min_distortion(p) * 0.99), InfeasibleDistortion);
    CHECK(ndt_min_distortion(p) == Approx(std::exp2(-40.0 / 16.0)));
    const double mid = ndt_rate(p, 0.5).value;
    CHECK(mid > 0.0);
    CHECK(mid < upper_bound(p).value);
}

TEST_CASE("non-decoding transmission optimized over the distortion") {
    const SystemParams p = SystemParams::from_snr_db(4, 4, 20.0, 40.0);
    const BoundResult best = ndt_bound(p);
    const double d_star = best.aux["D_star"].get<double>();
    CHECK(d_star > ndt_min_distortion(p) * 1.01);
    CHECK(d_star < 0.99);
    // Dense scan oracle: nothing on the grid beats the optimizer.
    const double lo = std::log(ndt_min_distortion(p) * (1.0 + 1e-6));
    double scan_best = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const double d = std::exp(lo * (1.0 - i / 400.0));
        scan_best = std::max(scan_best, ndt_rate(p, d).value);
    }
    CHECK(best.value >= scan_best - 1e-9);

    const SystemParams q = SystemParams::from_snr_db(2, 2, 10.0, 0.0);
    const double cap = capacity(q);
    CHECK(ndt_bound(q.with_C(10.0 * cap + 4 * 20.0)).value == Approx(cap).epsilon(0.02));
}

TEST_CASE("quantized channel inversion") {
    const SystemParams p(2, 4, 1.0, 10.0);
    QuantGrid single;
    single.points = {kInf};
    single.pmf = {1.0};
    CHECK(qci_rate(p, single).value == 0.0);

    // J = 2 quantile grid, one active level with c_1 = J C / K - J B = 8 bits.
    const BoundResult two = qci_bound_quantile(p, 1);
    CHECK(two.aux["allocation"][0].get<double>() == Approx(8.0).epsilon(1e-9));
    CHECK(two.value == Approx(1.862383731642453).epsilon(1e-9));

    const SystemParams q = SystemParams::from_snr_db(2, 4, 10.0, 12.0);
    const BoundResult a = qci_bound_quantile(q, 2);
    const BoundResult b = qci_rate(q, noise_quantile_grid(q, 2));
    CHECK(a.value == Approx(b.value).epsilon(1e-9));

    // The active set l satisfies rho_l > nu >= rho_{l+1}.
    const QuantGrid g = noise_quantile_grid(q, 2);
    const int l = a.aux["active_levels"].get<int>();
    const double nu = a.aux["nu"].get<double>();
    REQUIRE(l >= 1);
    CHECK(1.0 / g.points[l - 1] > nu);
    if (l < g.J() - 1) {
        CHECK(1.0 / g.points[l] <= nu);
    }

    CHECK_THROWS_AS(qci_bound_quantile(SystemParams(2, 4, 1.0, 4.0), 2), InsufficientBottleneck);
    CHECK_THROWS_AS(qci_bound_quantile(SystemParams(4, 2, 1.0, 40.0), 2), DomainError);
    CHECK_THROWS_AS(qci_rate(SystemParams(2, 4, 1.0, 1.0), g), InsufficientBottleneck);
}

TEST_CASE("zero-threshold truncated inversion closed form") {
    const SystemParams p(2, 4, 1.0, 8.0);
    const TciResult r = tci_closed_form_zero_threshold(p);
    CHECK(r.distortion == Approx(0.1).epsilon(1e-14));
    // 30-digit quadrature and arithmetic oracles.
    CHECK(r.rate.value == Approx(2.707289805901170).epsilon(1e-9));
    CHECK(r.lower == Approx(2.339850002884625).epsilon(1e-13));
    CHECK(r.upper == Approx(2.830074998557688).epsilon(1e-13));

    const TciResult close = tci_closed_form_zero_threshold(SystemParams::from_snr_db(2, 64, 40.0, 8.0));
    CHECK(close.upper - close.lower < 0.01);

    const TciResult high = tci_closed_form_zero_threshold(SystemParams::from_snr_db(2, 4, 60.0, 20.0));
    CHECK(high.rate.value == Approx(20.0).epsilon(2e-3));

    // The C -> inf limit is the same formula at D = 0.
    const SystemParams big = SystemParams::from_snr_db(2, 4, 10.0, 200.0);
    CHECK(tci_closed_form_zero_threshold(big).rate.value ==
          Approx(asymptote(big, Scheme::tci, Limit::C_to_inf)).epsilon(1e-9));

    CHECK_THROWS_AS(tci_closed_form_zero_threshold(SystemParams(2, 2, 1.0, 8.0)), DomainError);
}

TEST_CASE("truncated inversion with sampled statistics") {
    const McConfig mc = config(200000);
    const SystemParams p = SystemParams::from_snr_db(4, 4, 10.0, 40.0);
    const TciResult r = tci_rate(p, 0.05, trunc_stats(p, 0.05, mc));
    CHECK(r.lower <= r.rate.value + 3.0 * r.lower_std_error);
    CHECK(r.rate.value <= r.upper + 3.0 * r.upper_std_error);
    CHECK(r.rate.std_error.value() > 0.0);

    CHECK_THROWS_AS(tci_bound(SystemParams(2, 2, 1.0, 8.0), mc, ThresholdPolicy::zero_only), DivergentStatistic);
}

TEST_CASE("threshold selection") {
    const McConfig mc = config(50000);
    for (double db : {0.0, 20.0}) {
        const BoundResult wide = tci_bound(SystemParams::from_snr_db(2, 8, db, 16.0), mc);
        CHECK(wide.aux["lambda_th"].get<double>() == 0.0);
    }

    std::vector<ThresholdScan> scan;
    const BoundResult sq = tci_bound(SystemParams::from_snr_db(2, 2, 0.0, 16.0), mc, ThresholdPolicy::automatic, 0.0,
                                     &scan);
    CHECK(sq.aux["lambda_th"].get<double>() > 0.0);
    REQUIRE(!scan.empty());
    for (const ThresholdScan& s : scan) {
        CHECK(sq.value >= s.result.rate.value);
    }

    const auto grid = tci_threshold_grid(SystemParams(2, 4, 1.0, 8.0), ThresholdPolicy::automatic);
    CHECK(grid.front() == 0.0);
    CHECK(grid.size() == 17);
    const auto square = tci_threshold_grid(SystemParams(3, 3, 1.0, 8.0), ThresholdPolicy::automatic);
    CHECK(square.front() > 0.0);
    // The largest threshold keeps P_th at 1%.
    CHECK(trunc_prob(SystemParams(3, 3, 1.0, 8.0), square.back()) == Approx(0.01).epsilon(1e-6));
}

TEST_CASE("MMSE estimate at the relay") {
    // mu = 1 - e E1(1), D = mu / 3, 30-digit quadrature.
    CHECK(mmse_bound(SystemParams(1, 1, 1.0, 2.0)).value == Approx(0.3725492178331179).epsilon(1e-9));

    const SystemParams wide = SystemParams::from_snr_db(2, 512, 10.0, 12.0);
    CHECK(mmse_bound(wide).value == Approx(12.0).epsilon(0.02));

    const SystemParams big = SystemParams::from_snr_db(2, 2, 10.0, 200.0);
    CHECK(mmse_bound(big).value == Approx(4.963405234219500).epsilon(0.01));
    CHECK(asymptote(big, Scheme::mmse, Limit::C_to_inf) == Approx(4.963405234219500).epsilon(1e-9));

    const BoundResult tall = mmse_bound(SystemParams::from_snr_db(4, 2, 10.0, 16.0));
    CHECK(std::isfinite(tall.value));
    CHECK(std::isfinite(tall.aux["raw_value"].get<double>()));
    CHECK(tall.value >= 0.0);
}

TEST_CASE("asymptotic limits") {
    const SystemParams p(2, 4, 1.0, 12.0);
    CHECK(asymptote(p, Scheme::ub, Limit::M_to_inf) == 12.0);
    CHECK(asymptote(p, Scheme::ub, Limit::C_to_inf) == Approx(capacity(p)));
    const double q = asymptote(p, Scheme::qci, Limit::C_to_inf);
    CHECK(q == Approx(3.745737464048813).epsilon(1e-9));
    CHECK(q <= capacity(p));

    const double h = binary_entropy(std::exp(-1.0));
    AsymptoteOptions opt;
    opt.lambda_th = 0.5;
    opt.mc = config(20000);
    CHECK(asymptote(SystemParams(2, 2, 1.0, 12.0), Scheme::tci, Limit::rho_to_inf, opt) ==
          Approx(12.0 - h).epsilon(1e-12));

    CHECK_THROWS_AS(asymptote(p, Scheme::capacity, Limit::M_to_inf), UnsupportedLimit);
    CHECK_THROWS_AS(asymptote(SystemParams(4, 2, 1.0, 12.0), Scheme::mmse, Limit::C_to_inf), UnsupportedLimit);
}

TEST_CASE("ordering and monotonicity on a small grid") {
    const McConfig mc = config(20000);
    for (int n : {1, 2}) {
        double prev_ub = 0.0;
        double prev_ndt = 0.0;
        double prev_mmse = 0.0;
        for (double c : {8.0, 16.0, 32.0}) {
            const SystemParams p = SystemParams::from_snr_db(n, n, 10.0, c);
            const double cap = capacity(p);
            const double ub = upper_bound(p).value;
            const double ndt = ndt_bound(p).value;
            const double mm = mmse_bound(p).value;
            const BoundResult t = tci_bound(p, mc);
            CHECK(ub <= std::min(c, cap) + 1e-6);
            CHECK(ndt <= ub + 1e-6);
            CHECK(mm <= ub + 1e-6);
            CHECK(t.value <= ub + 3.0 * t.std_error.value_or(0.0));
            CHECK(ub >= prev_ub);
            CHECK(ndt >= prev_ndt);
            CHECK(mm >= prev_mmse);
            prev_ub = ub;
            prev_ndt = ndt;
            prev_mmse = mm;
        }
    }
}

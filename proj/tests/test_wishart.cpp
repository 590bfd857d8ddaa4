#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <doctest.h>

#include "bnmimo/errors.hpp"
#include "bnmimo/wishart.hpp"

using namespace bnmimo;
using doctest::Approx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Integral of the noise-level density over (0, inf) after a = 1/u, which
// turns the polynomial tail in a into an exponential one in u.
double noise_moment(const SystemParams& p, int power) {
    const std::vector<double> breaks{1e-300, 1.0, 5.0, 20.0, 80.0};
    return integrate_partitioned(
               [&](double u) {
                   const double a = 1.0 / u;
                   return std::pow(a, power) * noise_pdf(p, a) / (u * u);
               },
               breaks)
        .value;
}

}  // namespace

TEST_CASE("eigenvalue density closed forms") {
    CHECK(EigDensity(1, 1).pdf(0.0) == Approx(1.0));
    CHECK(EigDensity(1, 2).pdf(1.0) == Approx(1.0 / std::exp(1.0)));
    CHECK(EigDensity(2, 2).pdf(1.0) == Approx(0.5 / std::exp(1.0)));
    const double l = 2.7;
    CHECK(EigDensity(2, 2).pdf(l) == Approx(0.5 * (1.0 + (1.0 - l) * (1.0 - l)) * std::exp(-l)).epsilon(1e-13));
    CHECK(EigDensity(1, 1).cdf(1.3) == Approx(1.0 - std::exp(-1.3)).epsilon(1e-10));
    CHECK_THROWS_AS(EigDensity(3, 2), DomainError);
}

TEST_CASE("eigenvalue density normalization and mean") {
    for (int k = 1; k <= 8; ++k) {
        for (int m = 1; m <= 8; ++m) {
            const EigDensity d(std::min(k, m), std::max(k, m));
            CHECK(std::abs(d.expect([](double) { return 1.0; }) - 1.0) <= 1e-10);
            CHECK(std::abs(d.expect([](double x) { return x; }) - d.S()) <= 1e-8 * d.S());
        }
    }
    const EigDensity wide(1, 1000);
    CHECK(wide.expect([](double) { return 1.0; }) == Approx(1.0).epsilon(1e-10));
    CHECK(wide.expect([](double x) { return x; }) == Approx(1000.0).epsilon(1e-10));
}

TEST_CASE("inverse eigenvalue moment") {
    const EigDensity d(2, 4);
    CHECK(d.expect([](double x) { return 1.0 / x; }) == Approx(0.5).epsilon(1e-9));
}

TEST_CASE("zero-forcing noise law") {
    const SystemParams p(2, 4, 1.0, 0.0);
    CHECK(noise_moment(p, 0) == Approx(1.0).epsilon(1e-10));
    CHECK(noise_moment(p, 1) == Approx(0.5).epsilon(1e-9));
    CHECK(noise_quantile(p, 0.5) == Approx(0.3739631431901123).epsilon(1e-9));
    CHECK(noise_cdf(p, noise_quantile(p, 0.8)) == Approx(0.8).epsilon(1e-10));
    CHECK_THROWS_AS(noise_quantile(p, 1.0), DomainError);
    CHECK_THROWS_AS(noise_pdf(SystemParams(4, 2, 1.0, 0.0), 1.0), DomainError);
}

TEST_CASE("square channels have no mean noise level") {
    // a f_a(a) ~ 1/a for K = M, so the truncated mean grows like log(cutoff).
    const SystemParams p(2, 2, 1.0, 0.0);
    const auto truncated_mean = [&](double cutoff) {
        std::vector<double> breaks{0.0};
        for (double b = 0.01; b < cutoff; b *= 10.0) {
            breaks.push_back(b);
        }
        breaks.push_back(cutoff);
        return integrate_partitioned([&](double a) { return a * noise_pdf(p, a); }, breaks).value;
    };
    const double m2 = truncated_mean(1e2);
    const double m4 = truncated_mean(1e4);
    const double m6 = truncated_mean(1e6);
    CHECK(m4 - m2 == Approx(std::log(100.0)).epsilon(1e-2));
    CHECK(m6 - m4 == Approx(std::log(100.0)).epsilon(1e-3));
}

TEST_CASE("quantile grids") {
    const SystemParams p(2, 4, 1.0, 0.0);
    const QuantGrid g = noise_quantile_grid(p, 2);
    REQUIRE(g.J() == 4);
    for (double q : g.pmf) {
        CHECK(q == Approx(0.25).epsilon(1e-12));
    }
    CHECK(g.entropy_h0 == Approx(2.0));
    CHECK(std::is_sorted(g.points.begin(), g.points.end()));
    CHECK(std::adjacent_find(g.points.begin(), g.points.end()) == g.points.end());
    CHECK(std::isinf(g.points.back()));

    const QuantGrid h = noise_quantile_grid(p, 1);
    CHECK(h.points[0] == Approx(0.3739631431901123).epsilon(1e-9));

    // Re-scoring the quantile points recovers the uniform pmf.
    const QuantGrid r = noise_grid_pmf(p, g.points);
    for (double q : r.pmf) {
        CHECK(q == Approx(0.25).epsilon(1e-8));
    }
    CHECK_THROWS_AS(noise_quantile_grid(p, 0), DomainError);
    CHECK_THROWS_AS(noise_quantile_grid(p, 21), DomainError);
}

TEST_CASE("arbitrary grid pmf") {
    const SystemParams p(2, 4, 1.0, 0.0);
    const QuantGrid only_inf = noise_grid_pmf(p, {kInf});
    CHECK(only_inf.pmf.at(0) == 1.0);
    CHECK(only_inf.entropy_h0 == 0.0);

    // Q(3, 1/b) differences at 30 digits.
    const QuantGrid g = noise_grid_pmf(p, {0.3, 0.8, kInf});
    CHECK(g.pmf[0] == Approx(0.3527761564339404).epsilon(1e-10));
    CHECK(g.pmf[1] == Approx(0.5156915090485109).epsilon(1e-10));
    CHECK(g.pmf[2] == Approx(0.1315323345175488).epsilon(1e-10));

    CHECK_THROWS_AS(noise_grid_pmf(p, {0.3, 0.8}), DomainError);
    CHECK_THROWS_AS(noise_grid_pmf(p, {0.3, 0.3, kInf}), DomainError);
    CHECK_THROWS_AS(noise_grid_pmf(p, {0.8, 0.3, kInf}), DomainError);
    CHECK_THROWS_AS(noise_grid_pmf(p, {-0.1, kInf}), DomainError);
}

TEST_CASE("ceiling quantizer") {
    QuantGrid g;
    g.points = {0.4, 0.6, kInf};
    CHECK(ceil_to_grid(0.5, g) == 0.6);
    CHECK(ceil_to_grid(0.4, g) == 0.4);
    CHECK(std::isinf(ceil_to_grid(7.0, g)));
    CHECK(ceil_index(0.1, g) == 0);
}

TEST_CASE("truncation probability") {
    for (int k = 1; k <= 4; ++k) {
        CHECK(trunc_prob(SystemParams(k, 4, 1.0, 0.0), 0.0) == 1.0);
    }
    CHECK(trunc_prob(SystemParams(2, 2, 1.0, 0.0), 0.1) == Approx(std::exp(-0.2)).epsilon(1e-12));
    CHECK(trunc_prob(SystemParams(1, 3, 1.0, 0.0), 2.0) == Approx(0.6766764161830635).epsilon(1e-12));
    // Hankel determinants of incomplete gammas at 30 digits.
    CHECK(trunc_prob(SystemParams(2, 4, 1.0, 0.0), 0.5) == Approx(0.9522712617823273).epsilon(1e-11));
    CHECK(trunc_prob(SystemParams(3, 5, 1.0, 0.0), 0.3) == Approx(0.9712527609286969).epsilon(1e-11));

    const TruncProb sq = trunc_prob_checked(SystemParams(4, 4, 1.0, 0.0), 0.05);
    CHECK(sq.determinant_value == Approx(std::exp(-0.2)).epsilon(1e-12));
    CHECK(sq.probability == Approx(std::exp(-0.2)).epsilon(1e-15));
    CHECK_THROWS_AS(trunc_prob(SystemParams(2, 2, 1.0, 0.0), -0.1), DomainError);
}

TEST_CASE("truncated statistics") {
    McConfig mc;
    mc.samples = 20000;
    const TruncStats open = trunc_stats(SystemParams(2, 4, 1.0, 0.0), 0.0, mc);
    CHECK(open.p_th == 1.0);
    CHECK(open.h_th == 0.0);
    CHECK(open.e_inv_lambda == Approx(0.5).epsilon(1e-9));
    CHECK(open.e_lambda == Approx(4.0).epsilon(1e-9));

    CHECK_THROWS_AS(trunc_stats(SystemParams(2, 2, 1.0, 0.0), 0.0, mc), DivergentStatistic);

    const TruncStats sq = trunc_stats(SystemParams(2, 2, 1.0, 0.0), 0.5, mc);
    CHECK(sq.p_th == Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(std::isfinite(sq.e_inv_lambda));
    CHECK(sq.e_inv_lambda < 2.0);
    CHECK(sq.method == Method::monte_carlo);
    REQUIRE(sq.std_errors.has_value());
    CHECK(sq.std_errors->e_inv_lambda > 0.0);
}

TEST_CASE("channel sampling") {
    const SystemParams p(3, 5, 1.0, 0.0);
    ComplexMatrix h;
    const auto a = sample_channel(42, p, &h);
    const auto b = sample_channel(42, p);
    CHECK(a == b);
    REQUIRE(a.size() == 3);
    CHECK(std::is_sorted(a.begin(), a.end()));
    CHECK(h.rows() == 5);
    CHECK(h.cols() == 3);
    // Trace identity: eigenvalues sum to the squared Frobenius norm.
    double sum = 0.0;
    for (double x : a) {
        sum += x;
    }
    CHECK(sum == Approx(h.squaredNorm()).epsilon(1e-12));
    CHECK(sample_channel(43, p) != a);

    // K > M: the positive spectrum of HH^H has M entries.
    CHECK(sample_channel(7, SystemParams(4, 2, 1.0, 0.0)).size() == 2);
}

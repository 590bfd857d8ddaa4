#include <algorithm>
#include <cmath>
#include <sstream>

#include "bnmimo/bounds.hpp"
#include "bnmimo/errors.hpp"

namespace bnmimo {

namespace {

void require_k_le_m(const SystemParams& params) {
    if (params.K() > params.M()) {
        std::ostringstream msg;
        msg << "QCI requires K <= M (got K=" << params.K() << ", M=" << params.M() << ")";
        throw DomainError(msg.str());
    }
}

nlohmann::ordered_json finite_points(const QuantGrid& grid) {
    nlohmann::ordered_json pts = nlohmann::ordered_json::array();
    for (std::size_t j = 0; j + 1 < grid.points.size(); ++j) {
        pts.push_back(grid.points[j]);
    }
    return pts;
}

double level_rate(double snr, double log2_nu) {
    return std::log2(1.0 + snr) - std::log1p(std::exp2(log2_nu)) / std::log(2.0);
}

}  // namespace

double qci_objective(const SystemParams& params, const QuantGrid& grid, const std::vector<double>& allocation) {
    const std::size_t finite = grid.points.size() - 1;
    if (allocation.size() < finite) {
        throw DomainError("allocation must cover every finite grid level");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < finite; ++j) {
        const double snr = 1.0 / grid.points[j];
        total += params.K() * grid.pmf[j] * scalar_ib_rate(snr, std::max(allocation[j], 0.0));
    }
    return total;
}

BoundResult qci_rate(const SystemParams& params, const QuantGrid& grid, std::optional<double> csi_bits) {
    require_k_le_m(params);
    const double cost = csi_bits ? *csi_bits : params.K() * grid.entropy_h0;
    BoundResult out;
    out.method = Method::closed_form;
    out.aux["J"] = grid.J();
    out.aux["csi_bits"] = cost;
    out.aux["grid"] = finite_points(grid);
    if (grid.J() == 1) {
        return out;
    }
    const double budget = params.C() - cost;
    if (!(budget > 0.0)) {
        std::ostringstream msg;
        msg << "bottleneck C=" << params.C() << " does not exceed the CSI cost " << cost
            << " bits; nothing is left for the signal";
        throw InsufficientBottleneck(msg.str());
    }
    // Levels are sorted by noise power, so the SNRs 1/b_j are descending and
    // the active set is always a prefix. Within the prefix of length l the
    // constraint is linear in log2(nu).
    const std::size_t finite = grid.points.size() - 1;
    const double k = params.K();
    double weight = 0.0;
    double weighted_log = 0.0;
    double log2_nu = 0.0;
    std::size_t active = 0;
    for (std::size_t l = 0; l < finite; ++l) {
        const double p = grid.pmf[l];
        const double lr = -std::log2(grid.points[l]);
        weight += p;
        weighted_log += p * lr;
        if (weight <= 0.0) {
            continue;
        }
        const double cand = (weighted_log - budget / k) / weight;
        const double next = l + 1 < finite ? -std::log2(grid.points[l + 1]) : -std::numeric_limits<double>::infinity();
        // Level l must stay active (rho_l > nu); the next one must not (rho_{l+1} <= nu).
        if (lr > cand && next <= cand) {
            log2_nu = cand;
            active = l + 1;
            break;
        }
    }
    if (active == 0) {
        throw NonConvergence("QCI active-set search found no consistent water level");
    }
    std::vector<double> allocation(finite, 0.0);
    double rate = 0.0;
    double used = 0.0;
    for (std::size_t j = 0; j < active; ++j) {
        const double lr = -std::log2(grid.points[j]);
        allocation[j] = std::max(lr - log2_nu, 0.0);
        used += k * grid.pmf[j] * allocation[j];
        rate += k * grid.pmf[j] * level_rate(1.0 / grid.points[j], log2_nu);
    }
    out.value = std::max(rate, 0.0);
    out.water_level = std::exp2(log2_nu);
    out.residual = std::abs(used - budget);
    out.aux["nu"] = std::exp2(log2_nu);
    out.aux["active_levels"] = active;
    out.aux["allocation"] = allocation;
    out.aux["budget"] = budget;
    return out;
}

BoundResult qci_bound_quantile(const SystemParams& params, int bits_b) {
    require_k_le_m(params);
    if (bits_b < 1) {
        throw DomainError("QCI needs B >= 1");
    }
    if (!(bits_b < params.C() / params.K())) {
        std::ostringstream msg;
        msg << "QCI with B=" << bits_b << " needs B < C/K = " << params.C() / params.K();
        throw InsufficientBottleneck(msg.str());
    }
    const QuantGrid grid = noise_quantile_grid(params, bits_b);
    const int levels = grid.J();
    const double k = params.K();
    const double c = params.C();
    // log2 nu = (sum_{j<=l} log2 rho_j - J C / K + J B) / l; take the unique
    // l with rho_l > nu >= rho_{l+1}.
    double sum_log = 0.0;
    double log2_nu = 0.0;
    int active = 0;
    for (int l = 1; l < levels; ++l) {
        sum_log += -std::log2(grid.points[static_cast<std::size_t>(l - 1)]);
        const double cand = (sum_log - levels * c / k + levels * static_cast<double>(bits_b)) / l;
        const double here = -std::log2(grid.points[static_cast<std::size_t>(l - 1)]);
        const double next = l + 1 < levels ? -std::log2(grid.points[static_cast<std::size_t>(l)])
                                           : -std::numeric_limits<double>::infinity();
        if (here > cand && next <= cand) {
            log2_nu = cand;
            active = l;
            break;
        }
    }
    if (active == 0) {
        throw NonConvergence("QCI quantile active-set search found no consistent level");
    }
    double rate = 0.0;
    double used = 0.0;
    std::vector<double> allocation(static_cast<std::size_t>(levels - 1), 0.0);
    for (int j = 0; j < active; ++j) {
        const double lr = -std::log2(grid.points[static_cast<std::size_t>(j)]);
        allocation[static_cast<std::size_t>(j)] = lr - log2_nu;
        used += k / levels * (lr - log2_nu);
        rate += k / levels * level_rate(1.0 / grid.points[static_cast<std::size_t>(j)], log2_nu);
    }
    BoundResult out;
    out.method = Method::closed_form;
    out.value = std::max(rate, 0.0);
    out.water_level = std::exp2(log2_nu);
    out.residual = std::abs(used - (c - k * bits_b));
    out.aux["B"] = bits_b;
    out.aux["J"] = levels;
    out.aux["grid"] = finite_points(grid);
    out.aux["active_levels"] = active;
    out.aux["nu"] = std::exp2(log2_nu);
    out.aux["allocation"] = allocation;
    return out;
}

}  // namespace bnmimo

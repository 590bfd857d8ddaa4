#include <cstdio>
#include <exception>
#include <ostream>

#include "bnmimo/cli.hpp"
#include "bnmimo/errors.hpp"
#include "bnmimo/parallel.hpp"

namespace bnmimo::cli {

BoundResult evaluate(const SystemParams& params, Scheme scheme, const SchemeOptions& options,
                     const McConfig& mc) {
    switch (scheme) {
        case Scheme::ub:
            return upper_bound(params);
        case Scheme::ndt:
            return options.ndt_distortion ? ndt_rate(params, *options.ndt_distortion) : ndt_bound(params);
        case Scheme::qci:
            return qci_bound_quantile(params, options.qci_bits);
        case Scheme::tci:
            return tci_bound(params, mc, options.tci_policy, options.tci_lambda_th);
        case Scheme::mmse:
            return mmse_bound(params);
        case Scheme::capacity: {
            BoundResult r;
            r.value = capacity(params);
            r.method = Method::quadrature;
            return r;
        }
    }
    throw DomainError("unknown scheme");
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const McConfig& mc) {
    if (spec.schemes.empty()) {
        throw DomainError("sweep needs at least one scheme");
    }
    const std::vector<SystemParams> points = spec.expand();
    const std::size_t per_point = spec.schemes.size();
    std::vector<SweepRow> rows(points.size() * per_point);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t s = 0; s < per_point; ++s) {
            rows[i * per_point + s].params = points[i];
            rows[i * per_point + s].scheme = spec.schemes[s];
        }
    }
    parallel_for(static_cast<std::int64_t>(rows.size()), [&](std::int64_t idx) {
        SweepRow& row = rows[static_cast<std::size_t>(idx)];
        try {
            row.result = evaluate(row.params, row.scheme, spec.options, mc);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    return rows;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& raw) {
    if (raw.find_first_of(",\"\r\n") == std::string::npos) {
        return raw;
    }
    std::string out = "\"";
    for (char c : raw) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

void write_csv_header(std::ostream& os, bool with_error) {
    os << "scheme,K,M,rho_db,C_bits,value_bits,aux_json,residual,method,seed";
    if (with_error) {
        os << ",error";
    }
    os << '\n';
}

void write_csv_row(std::ostream& os, const SweepRow& row, std::uint64_t seed, bool with_error) {
    const SystemParams& p = row.params;
    os << to_string(row.scheme) << ',' << p.K() << ',' << p.M() << ',' << format_double(p.snr_db()) << ','
       << format_double(p.C()) << ',';
    if (row.result) {
        const BoundResult& r = *row.result;
        os << format_double(r.value) << ',' << csv_field(r.aux.dump()) << ',' << format_double(r.residual) << ','
           << to_string(r.method) << ',';
        if (r.method == Method::monte_carlo) {
            os << seed;
        }
    } else {
        os << ",,,,";
    }
    if (with_error) {
        os << ',' << csv_field(row.error);
    }
    os << '\n';
}

nlohmann::ordered_json row_to_json(const SweepRow& row, std::uint64_t seed) {
    nlohmann::ordered_json j;
    const SystemParams& p = row.params;
    j["scheme"] = std::string(to_string(row.scheme));
    j["K"] = p.K();
    j["M"] = p.M();
    j["rho_db"] = p.snr_db();
    j["C_bits"] = p.C();
    if (row.result) {
        const BoundResult& r = *row.result;
        j["value_bits"] = r.value;
        j["aux"] = r.aux;
        j["residual"] = r.residual;
        j["method"] = std::string(to_string(r.method));
        if (r.std_error) {
            j["std_error"] = *r.std_error;
        }
        j["seed"] = r.method == Method::monte_carlo ? nlohmann::ordered_json(seed) : nlohmann::ordered_json();
    } else {
        j["value_bits"] = nullptr;
        j["error"] = row.error;
    }
    return j;
}

}  // namespace bnmimo::cli

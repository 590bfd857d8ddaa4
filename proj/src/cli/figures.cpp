#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bnmimo/cli.hpp"
#include "bnmimo/errors.hpp"
#include "bnmimo/montecarlo.hpp"

namespace bnmimo::cli {

namespace {

using Cell = std::optional<double>;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

std::string cell_text(const Cell& c) { return c ? format_double(*c) : std::string(); }

Cell attempt(const std::function<double()>& fn) {
    try {
        return fn();
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::filesystem::path write_table(const std::filesystem::path& dir, const std::string& name, const Table& t) {
    const std::filesystem::path path = dir / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw DomainError("cannot write " + path.string());
    }
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        os << (i ? "," : "") << csv_field(t.header[i]);
    }
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << (i ? "," : "") << csv_field(row[i]);
        }
        os << '\n';
    }
    return path;
}

std::vector<double> range(double first, double last, double step) {
    std::vector<double> v;
    for (double x = first; x <= last + 1e-9; x += step) {
        v.push_back(x);
    }
    return v;
}

std::vector<double> geometric(double lo, double hi, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) {
        v.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    }
    return v;
}

std::string db_label(double db) { return "rho" + format_double(db) + "dB"; }

const std::vector<Scheme> kAllSchemes = {Scheme::ub,   Scheme::ndt,  Scheme::qci,
                                         Scheme::tci,  Scheme::mmse, Scheme::capacity};

/// Bounds against one sweep axis, one column per scheme. A K = M axis
/// also records C, which may be coupled to K.
Table bounds_table(const std::string& x_name, const SweepSpec& spec, const McConfig& mc) {
    const std::vector<SweepRow> rows = run_sweep(spec, mc);
    const bool with_c = spec.axis == SweepAxis::K_equals_M;
    Table t;
    t.header.push_back(x_name);
    if (with_c) {
        t.header.emplace_back("C_bits");
    }
    for (Scheme s : spec.schemes) {
        t.header.emplace_back(to_string(s));
    }
    const std::size_t per = spec.schemes.size();
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
        std::vector<std::string> row{format_double(spec.values[i])};
        if (with_c) {
            row.push_back(format_double(rows[i * per].params.C()));
        }
        for (std::size_t s = 0; s < per; ++s) {
            const SweepRow& r = rows[i * per + s];
            row.push_back(r.result ? format_double(r.result->value) : std::string());
        }
        t.add(std::move(row));
    }
    return t;
}

SweepSpec make_spec(SweepAxis axis, std::vector<double> values, SystemParams fixed, const SchemeOptions& options,
                    std::optional<double> c_per_k = std::nullopt) {
    SweepSpec s;
    s.axis = axis;
    s.values = std::move(values);
    s.fixed = fixed;
    s.schemes = kAllSchemes;
    s.options = options;
    s.c_per_k = c_per_k;
    return s;
}

/// TCI rate against lambda_th, all thresholds on one sample set per series.
std::vector<Cell> tci_threshold_curve(const SystemParams& p, const std::vector<double>& thresholds,
                                      const McConfig& mc) {
    std::vector<Cell> out;
    std::optional<EigenSampleSet> samples;
    for (double l : thresholds) {
        out.push_back(attempt([&] {
            if (l == 0.0) {
                return tci_rate(p, 0.0, trunc_stats(p, 0.0, mc)).rate.value;
            }
            if (!samples) {
                samples = sample_eigenvalue_sets(p, mc);
            }
            TruncStats st = trunc_stats_from_samples(p, *samples, l, mc);
            st.p_th = trunc_prob(p, l);
            st.h_th = binary_entropy(st.p_th);
            return tci_rate(p, l, st).rate.value;
        }));
    }
    return out;
}

}  // namespace

std::vector<std::filesystem::path> write_figures(const std::filesystem::path& dir, const McConfig& mc,
                                                 const SchemeOptions& options) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;

    {  // NDT against the distortion D, K = M = 4, C = 40.
        const SystemParams base(4, 4, 1.0, 40.0);
        const std::vector<double> snrs{0.0, 10.0, 20.0, 30.0, 40.0};
        const std::vector<double> ds = geometric(ndt_min_distortion(base) * (1.0 + 1e-3), 1.0, 48);
        Table t;
        t.header.emplace_back("D");
        for (double s : snrs) {
            t.header.push_back("ndt_" + db_label(s));
        }
        for (double d : ds) {
            std::vector<std::string> row{format_double(d)};
            for (double s : snrs) {
                const SystemParams p = SystemParams::from_snr_db(4, 4, s, 40.0);
                row.push_back(cell_text(attempt([&] { return ndt_rate(p, d).value; })));
            }
            t.add(std::move(row));
        }
        written.push_back(write_table(dir, "fig02.csv", t));
    }

    {  // Joint and sum entropies against M, K = 2.
        Table t;
        t.header.emplace_back("M");
        const std::vector<int> bits{1, 2, 3};
        for (int b : bits) {
            t.header.push_back("H_joint_B" + std::to_string(b));
            t.header.push_back("H_sum_B" + std::to_string(b));
        }
        for (int m = 2; m <= 10; ++m) {
            std::vector<std::string> row{std::to_string(m)};
            const SystemParams p = SystemParams::from_snr_db(2, m, 10.0, 0.0);
            for (int b : bits) {
                try {
                    const EntropyPair e = mc_entropy_pair(p, noise_quantile_grid(p, b), mc);
                    row.push_back(format_double(e.joint.mean));
                    row.push_back(format_double(e.sum.mean));
                } catch (const Error&) {
                    row.insert(row.end(), 2, std::string());
                }
            }
            t.add(std::move(row));
        }
        written.push_back(write_table(dir, "fig03.csv", t));
    }

    {  // Joint and sum entropies against K, B = 2, for M - K in {0, 2, 4}.
        Table t;
        t.header.emplace_back("K");
        const std::vector<int> extra{0, 2, 4};
        for (int e : extra) {
            t.header.push_back("H_joint_MmK" + std::to_string(e));
            t.header.push_back("H_sum_MmK" + std::to_string(e));
        }
        for (int k = 1; k <= 4; ++k) {
            std::vector<std::string> row{std::to_string(k)};
            for (int e : extra) {
                const SystemParams p = SystemParams::from_snr_db(k, k + e, 10.0, 0.0);
                try {
                    const EntropyPair pair = mc_entropy_pair(p, noise_quantile_grid(p, 2), mc);
                    row.push_back(format_double(pair.joint.mean));
                    row.push_back(format_double(pair.sum.mean));
                } catch (const Error&) {
                    row.insert(row.end(), 2, std::string());
                }
            }
            t.add(std::move(row));
        }
        written.push_back(write_table(dir, "fig04.csv", t));
    }

    {  // TCI against lambda_th for K = M, C = 40.
        const std::vector<double> thresholds = geometric(1e-3, 1.0, 24);
        std::vector<SystemParams> series;
        Table t;
        t.header.emplace_back("lambda_th");
        for (int k : {2, 4}) {
            for (double s : {0.0, 20.0}) {
                series.push_back(SystemParams::from_snr_db(k, k, s, 40.0));
                t.header.push_back("tci_K" + std::to_string(k) + "_" + db_label(s));
            }
        }
        std::vector<std::vector<Cell>> curves;
        for (const SystemParams& p : series) {
            curves.push_back(tci_threshold_curve(p, thresholds, mc));
        }
        for (std::size_t i = 0; i < thresholds.size(); ++i) {
            std::vector<std::string> row{format_double(thresholds[i])};
            for (const auto& c : curves) {
                row.push_back(cell_text(c[i]));
            }
            t.add(std::move(row));
        }
        written.push_back(write_table(dir, "fig05.csv", t));
    }

    {  // TCI against lambda_th for K = 4 < M, C = 40, 10 dB.
        std::vector<double> thresholds{0.0};
        for (double l : geometric(1e-3, 4.0, 23)) {
            thresholds.push_back(l);
        }
        Table t;
        t.header.emplace_back("lambda_th");
        std::vector<std::vector<Cell>> curves;
        for (int m : {5, 6, 8}) {
            t.header.push_back("tci_M" + std::to_string(m));
            curves.push_back(tci_threshold_curve(SystemParams::from_snr_db(4, m, 10.0, 40.0), thresholds, mc));
        }
        for (std::size_t i = 0; i < thresholds.size(); ++i) {
            std::vector<std::string> row{format_double(thresholds[i])};
            for (const auto& c : curves) {
                row.push_back(cell_text(c[i]));
            }
            t.add(std::move(row));
        }
        written.push_back(write_table(dir, "fig06.csv", t));
    }

    const std::vector<double> snr_axis = range(0.0, 40.0, 5.0);
    written.push_back(write_table(
        dir, "fig07.csv",
        bounds_table("rho_db", make_spec(SweepAxis::rho_db, snr_axis, SystemParams(2, 2, 1.0, 40.0), options), mc)));
    written.push_back(write_table(
        dir, "fig08.csv",
        bounds_table("rho_db", make_spec(SweepAxis::rho_db, snr_axis, SystemParams(4, 4, 1.0, 40.0), options), mc)));

    const std::vector<double> c_axis = range(5.0, 100.0, 5.0);
    written.push_back(write_table(
        dir, "fig09.csv",
        bounds_table("C_bits", make_spec(SweepAxis::C, c_axis, SystemParams::from_snr_db(2, 2, 40.0, 0.0), options),
                     mc)));
    written.push_back(write_table(
        dir, "fig10.csv",
        bounds_table("C_bits", make_spec(SweepAxis::C, c_axis, SystemParams::from_snr_db(4, 4, 40.0, 0.0), options),
                     mc)));

    const std::vector<double> m_axis{2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64};
    written.push_back(write_table(
        dir, "fig11.csv",
        bounds_table("M", make_spec(SweepAxis::M, m_axis, SystemParams::from_snr_db(2, 2, 10.0, 40.0), options), mc)));
    written.push_back(write_table(
        dir, "fig12.csv",
        bounds_table("M", make_spec(SweepAxis::M, m_axis, SystemParams::from_snr_db(2, 2, 40.0, 40.0), options), mc)));

    {  // TCI sandwich at lambda_th = 0, K = 4, C = 40: against M at 10 dB and against rho at M = 6.
        Table t;
        t.header = {"axis", "x", "tci", "tci_lower", "tci_upper"};
        auto add_point = [&](const std::string& axis, double x, const SystemParams& p) {
            std::vector<std::string> row{axis, format_double(x)};
            try {
                const TciResult r = tci_closed_form_zero_threshold(p);
                row.push_back(format_double(r.rate.value));
                row.push_back(format_double(r.lower));
                row.push_back(format_double(r.upper));
            } catch (const Error&) {
                row.insert(row.end(), 3, std::string());
            }
            t.add(std::move(row));
        };
        for (int m : {5, 6, 8, 12, 16, 24, 32}) {
            add_point("M", m, SystemParams::from_snr_db(4, m, 10.0, 40.0));
        }
        for (double s : snr_axis) {
            add_point("rho_db", s, SystemParams::from_snr_db(4, 6, s, 40.0));
        }
        written.push_back(write_table(dir, "fig13.csv", t));
    }

    const std::vector<double> k_axis = range(1.0, 8.0, 1.0);
    written.push_back(write_table(
        dir, "fig14.csv",
        bounds_table("K", make_spec(SweepAxis::K_equals_M, k_axis, SystemParams::from_snr_db(1, 1, 40.0, 50.0), options),
                     mc)));
    written.push_back(write_table(
        dir, "fig15.csv",
        bounds_table("K",
                     make_spec(SweepAxis::K_equals_M, k_axis, SystemParams::from_snr_db(1, 1, 40.0, 8.0), options, 8.0),
                     mc)));
    return written;
}

}  // namespace bnmimo::cli

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bnmimo/cli.hpp"
#include "bnmimo/errors.hpp"

namespace bnmimo::cli {

namespace {

struct McFlags {
    std::int64_t samples = 100000;
    std::uint64_t seed = 20240601;
    std::int64_t batch_size = 4096;

    McConfig config() const {
        McConfig c;
        c.samples = samples;
        c.seed = seed;
        c.batch_size = std::min(batch_size, samples);
        c.validate();
        return c;
    }
};

void add_mc_flags(CLI::App* cmd, McFlags& f) {
    cmd->add_option("--samples", f.samples, "Monte Carlo sample count");
    cmd->add_option("--seed", f.seed, "Monte Carlo seed");
    cmd->add_option("--batch-size", f.batch_size, "Monte Carlo batch size (one RNG stream per batch)");
}

ThresholdPolicy parse_policy(const std::string& s) {
    if (s == "auto") {
        return ThresholdPolicy::automatic;
    }
    if (s == "zero") {
        return ThresholdPolicy::zero_only;
    }
    if (s == "grid") {
        return ThresholdPolicy::grid_only;
    }
    if (s == "fixed") {
        return ThresholdPolicy::fixed;
    }
    throw DomainError("unknown threshold policy '" + s + "' (expected auto, zero, grid or fixed)");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) {
            continue;
        }
        const auto last = item.find_last_not_of(" \t");
        out.push_back(item.substr(first, last - first + 1));
    }
    return out;
}

std::vector<double> parse_values(const std::string& s) {
    std::vector<double> out;
    for (const std::string& item : split_list(s)) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) {
            throw DomainError("cannot parse sweep value '" + item + "'");
        }
        out.push_back(v);
    }
    return out;
}

/// Writes to the file when a path is given, otherwise to `out`.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw DomainError("cannot open output file " + path);
    }
    os << text;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Information-bottleneck rate bounds for Rayleigh MIMO channels with an oblivious relay",
                 "bottleneck-mimo"};
    app.require_subcommand(1);

    // bound -----------------------------------------------------------------
    CLI::App* bound = app.add_subcommand("bound", "Evaluate one scheme at one parameter point");
    std::string scheme_name;
    int k = 0;
    int m = 0;
    double snr_db = 0.0;
    double c_bits = 0.0;
    std::optional<int> bits_b;
    std::optional<double> lambda_th;
    std::optional<double> distortion;
    std::string policy_name = "auto";
    std::string format = "csv";
    std::string output;
    McFlags bound_mc;
    bound->add_option("--scheme", scheme_name, "ub, ndt, qci, tci, mmse or capacity")->required();
    bound->add_option("--k", k, "Input dimension K")->required();
    bound->add_option("--m", m, "Relay antennas M")->required();
    bound->add_option("--snr-db", snr_db, "SNR rho in dB")->required();
    bound->add_option("--c", c_bits, "Bottleneck C in bits per complex dimension")->required();
    bound->add_option("--b", bits_b, "QCI quantizer bits B (J = 2^B levels)");
    bound->add_option("--lambda-th", lambda_th, "TCI threshold (fixes the threshold policy)");
    bound->add_option("--d", distortion, "NDT distortion D instead of maximizing over D");
    bound->add_option("--tci-policy", policy_name, "TCI threshold policy: auto, zero, grid or fixed");
    bound->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    bound->add_option("--output", output, "Output file (default stdout)");
    add_mc_flags(bound, bound_mc);

    // sweep -----------------------------------------------------------------
    CLI::App* sweep = app.add_subcommand("sweep", "Evaluate schemes along one parameter axis");
    std::string axis_name = "rho_db";
    std::string values_text;
    std::string schemes_text = "ub,ndt,qci,tci,mmse,capacity";
    int sk = 1;
    int sm = 1;
    double s_snr = 10.0;
    double s_c = 0.0;
    std::optional<double> c_per_k;
    int s_bits = 2;
    std::optional<double> s_lambda;
    std::string s_policy = "auto";
    std::string s_format = "csv";
    std::string s_output;
    McFlags sweep_mc;
    sweep->add_option("--axis", axis_name, "C, rho_db, M or K_equals_M");
    sweep->add_option("--values", values_text, "Comma-separated, strictly ordered axis values")->required();
    sweep->add_option("--schemes", schemes_text, "Comma-separated scheme list");
    sweep->add_option("--k", sk, "Input dimension K");
    sweep->add_option("--m", sm, "Relay antennas M");
    sweep->add_option("--snr-db", s_snr, "SNR rho in dB");
    sweep->add_option("--c", s_c, "Bottleneck C in bits per complex dimension");
    sweep->add_option("--c-per-k", c_per_k, "With axis K_equals_M, set C = c_per_k * K");
    sweep->add_option("--b", s_bits, "QCI quantizer bits B");
    sweep->add_option("--lambda-th", s_lambda, "TCI threshold (fixes the threshold policy)");
    sweep->add_option("--tci-policy", s_policy, "TCI threshold policy: auto, zero, grid or fixed");
    sweep->add_option("--format", s_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sweep->add_option("--output", s_output, "Output file (default stdout)");
    add_mc_flags(sweep, sweep_mc);

    // validate --------------------------------------------------------------
    CLI::App* validate = app.add_subcommand("validate", "Run the self-check suite and report JSON");
    bool quick = false;
    std::optional<double> tolerance;
    std::optional<std::int64_t> v_samples;
    std::uint64_t v_seed = 20240601;
    std::string v_output;
    validate->add_flag("--quick", quick, "Use 10^4 Monte Carlo samples and a smaller density grid");
    validate->add_option("--tolerance", tolerance, "Override the quadrature check tolerances");
    validate->add_option("--samples", v_samples, "Monte Carlo sample count");
    validate->add_option("--seed", v_seed, "Monte Carlo seed");
    validate->add_option("--output", v_output, "Report file (default stdout)");

    // figures ---------------------------------------------------------------
    CLI::App* figures = app.add_subcommand("figures", "Write fig02.csv ... fig15.csv");
    std::string fig_dir;
    int fig_bits = 2;
    McFlags fig_mc;
    figures->add_option("--output-dir", fig_dir, "Directory for the CSV files")->required();
    figures->add_option("--b", fig_bits, "QCI quantizer bits B");
    add_mc_flags(figures, fig_mc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kDomainError;
    }

    try {
        if (*bound) {
            const Scheme scheme = scheme_from_string(scheme_name);
            if (bits_b && scheme != Scheme::qci) {
                throw DomainError("--b applies only to --scheme qci");
            }
            if (lambda_th && scheme != Scheme::tci) {
                throw DomainError("--lambda-th applies only to --scheme tci");
            }
            if (distortion && scheme != Scheme::ndt) {
                throw DomainError("--d applies only to --scheme ndt");
            }
            SchemeOptions opt;
            opt.qci_bits = bits_b.value_or(2);
            opt.tci_policy = lambda_th ? ThresholdPolicy::fixed : parse_policy(policy_name);
            opt.tci_lambda_th = lambda_th.value_or(0.0);
            opt.ndt_distortion = distortion;
            const McConfig mc = bound_mc.config();
            SweepRow row;
            row.scheme = scheme;
            row.params = SystemParams::from_snr_db(k, m, snr_db, c_bits);
            row.result = evaluate(row.params, scheme, opt, mc);
            std::ostringstream text;
            if (format == "json") {
                text << row_to_json(row, mc.seed).dump(2) << '\n';
            } else {
                write_csv_header(text, false);
                write_csv_row(text, row, mc.seed, false);
            }
            emit(text.str(), output, out);
            return kOk;
        }
        if (*sweep) {
            SweepSpec spec;
            spec.axis = sweep_axis_from_string(axis_name);
            spec.values = parse_values(values_text);
            if (spec.values.empty()) {
                throw DomainError("--values is empty");
            }
            for (const std::string& s : split_list(schemes_text)) {
                spec.schemes.push_back(scheme_from_string(s));
            }
            spec.fixed = SystemParams::from_snr_db(sk, sm, s_snr, s_c);
            spec.c_per_k = c_per_k;
            spec.options.qci_bits = s_bits;
            spec.options.tci_policy = s_lambda ? ThresholdPolicy::fixed : parse_policy(s_policy);
            spec.options.tci_lambda_th = s_lambda.value_or(0.0);
            const McConfig mc = sweep_mc.config();
            const std::vector<SweepRow> rows = run_sweep(spec, mc);
            std::ostringstream text;
            if (s_format == "json") {
                nlohmann::ordered_json arr = nlohmann::ordered_json::array();
                for (const SweepRow& r : rows) {
                    arr.push_back(row_to_json(r, mc.seed));
                }
                text << arr.dump(2) << '\n';
            } else {
                write_csv_header(text, true);
                for (const SweepRow& r : rows) {
                    write_csv_row(text, r, mc.seed, true);
                }
            }
            emit(text.str(), s_output, out);
            return kOk;
        }
        if (*validate) {
            ValidateOptions vo;
            vo.quick = quick;
            vo.tolerance = tolerance;
            vo.mc.samples = v_samples.value_or(quick ? 10000 : 100000);
            vo.mc.seed = v_seed;
            vo.mc.batch_size = std::min<std::int64_t>(vo.mc.batch_size, vo.mc.samples);
            vo.mc.validate();
            const std::vector<CheckResult> checks = run_validation(vo);
            const nlohmann::ordered_json report = validation_report(vo, checks);
            emit(report.dump(2) + "\n", v_output, out);
            return report["passed"].get<bool>() ? kOk : kValidationFailed;
        }
        if (*figures) {
            SchemeOptions opt;
            opt.qci_bits = fig_bits;
            for (const auto& path : write_figures(fig_dir, fig_mc.config(), opt)) {
                out << path.string() << '\n';
            }
            return kOk;
        }
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kDomainError;
    } catch (const NumericError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericError;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericError;
    }
    return kDomainError;
}

}  // namespace bnmimo::cli

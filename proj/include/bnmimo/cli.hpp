#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bnmimo/bounds.hpp"
#include "bnmimo/mc_types.hpp"
#include "bnmimo/model.hpp"

namespace bnmimo::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kValidationFailed = 1, kDomainError = 2, kNumericError = 3 };

/// One scheme at one parameter point.
BoundResult evaluate(const SystemParams& params, Scheme scheme, const SchemeOptions& options,
                     const McConfig& mc);

struct SweepRow {
    Scheme scheme = Scheme::ub;
    SystemParams params{1, 1, 1.0, 0.0};
    std::optional<BoundResult> result;
    std::string error;  ///< empty on success
};

/// Rows in axis order, schemes in the order given. Cells run in parallel;
/// a failing cell records its message and the sweep continues.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const McConfig& mc);

/// Seventeen significant digits, so the text re-parses to the same double.
std::string format_double(double v);

/// RFC-4180 field quoting.
std::string csv_field(const std::string& raw);

void write_csv_header(std::ostream& os, bool with_error);
void write_csv_row(std::ostream& os, const SweepRow& row, std::uint64_t seed, bool with_error);
nlohmann::ordered_json row_to_json(const SweepRow& row, std::uint64_t seed);

// Validation -----------------------------------------------------------------

struct ValidateOptions {
    bool quick = false;
    /// Overrides every deterministic quadrature tolerance (negative control).
    std::optional<double> tolerance;
    McConfig mc{};
};

struct CheckResult {
    std::string name;
    bool passed = false;
    nlohmann::ordered_json detail = nlohmann::ordered_json::object();
};

std::vector<CheckResult> run_validation(const ValidateOptions& options);
nlohmann::ordered_json validation_report(const ValidateOptions& options, const std::vector<CheckResult>& checks);

// Figures --------------------------------------------------------------------

/// Writes fig02.csv ... fig15.csv into `dir`; returns the files written.
std::vector<std::filesystem::path> write_figures(const std::filesystem::path& dir, const McConfig& mc,
                                                 const SchemeOptions& options);

/// Entry point behind the bottleneck-mimo executable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bnmimo::cli

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "bnmimo/cli.hpp"

using namespace bnmimo;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "bottleneck-mimo");
    std::vector<const char*> argv;
    for (const std::string& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    Outcome o;
    o.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        out.push_back(line);
    }
    return out;
}

// Minimal RFC-4180 record splitter for one line.
std::vector<std::string> split_record(const std::string& line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    return fields;
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("bound prints one CSV record") {
    const Outcome o = run_cli({"bound", "--scheme", "ub", "--k", "2", "--m", "2", "--snr-db", "10", "--c", "40"});
    CHECK(o.code == cli::kOk);
    const auto ls = lines(o.out);
    REQUIRE(ls.size() == 2);
    CHECK(ls[0] == "scheme,K,M,rho_db,C_bits,value_bits,aux_json,residual,method,seed");
    const auto f = split_record(ls[1]);
    REQUIRE(f.size() == 10);
    CHECK(f[0] == "ub");
    CHECK(f[8] == "quadrature");
    CHECK(f[9].empty());
    // The aux column is valid JSON and the value re-parses exactly.
    const auto aux = nlohmann::json::parse(f[6]);
    CHECK(aux.contains("nu"));
    const double v = std::strtod(f[5].c_str(), nullptr);
    CHECK(cli::format_double(v) == f[5]);
    CHECK(v == upper_bound(SystemParams::from_snr_db(2, 2, 10.0, 40.0)).value);
}

TEST_CASE("bound reports domain errors with exit code 2") {
    const Outcome qci = run_cli({"bound", "--scheme", "qci", "--k", "4", "--m", "2", "--snr-db", "10", "--c", "40"});
    CHECK(qci.code == cli::kDomainError);
    CHECK(contains(qci.err, "K <= M"));

    const Outcome tci = run_cli(
        {"bound", "--scheme", "tci", "--k", "2", "--m", "2", "--snr-db", "10", "--c", "16", "--lambda-th", "0"});
    CHECK(tci.code == cli::kDomainError);
    CHECK(contains(tci.err, "diverg"));

    CHECK(run_cli({"bound", "--scheme", "nope", "--k", "1", "--m", "1", "--snr-db", "0", "--c", "1"}).code ==
          cli::kDomainError);
    CHECK(run_cli({"bound", "--scheme", "ub"}).code == cli::kDomainError);
    CHECK(run_cli({"frobnicate"}).code == cli::kDomainError);
    CHECK(run_cli({"--help"}).code == cli::kOk);
}

TEST_CASE("bound json output and the seed column") {
    const Outcome o = run_cli({"bound", "--scheme", "tci", "--k", "2", "--m", "2", "--snr-db", "0", "--c", "16",
                               "--samples", "20000", "--seed", "77", "--format", "json"});
    REQUIRE(o.code == cli::kOk);
    const auto j = nlohmann::json::parse(o.out);
    CHECK(j["method"] == "monte_carlo");
    CHECK(j["seed"] == 77);
    CHECK(j["std_error"].get<double>() > 0.0);
}

TEST_CASE("sweep output is deterministic and records failing cells") {
    const std::vector<std::string> args{"sweep",     "--axis",    "C",     "--values", "2,8,16",
                                        "--k",       "2",         "--m",   "4",        "--snr-db",
                                        "10",        "--samples", "20000", "--seed",   "5"};
    const Outcome a = run_cli(args);
    const Outcome b = run_cli(args);
    REQUIRE(a.code == cli::kOk);
    CHECK(a.out == b.out);

    const auto ls = lines(a.out);
    CHECK(ls[0] == "scheme,K,M,rho_db,C_bits,value_bits,aux_json,residual,method,seed,error");
    CHECK(ls.size() == 1 + 3 * 6);
    bool saw_qci_failure = false;
    for (std::size_t i = 1; i < ls.size(); ++i) {
        const auto f = split_record(ls[i]);
        REQUIRE(f.size() == 11);
        if (f[0] == "qci" && f[4] == "2") {
            saw_qci_failure = f[5].empty() && !f[10].empty();
        }
    }
    CHECK(saw_qci_failure);
}

TEST_CASE("sweep argument errors") {
    CHECK(run_cli({"sweep", "--axis", "C", "--values", ""}).code == cli::kDomainError);
    CHECK(run_cli({"sweep", "--axis", "C", "--values", "3,2,2"}).code == cli::kDomainError);
    CHECK(run_cli({"sweep", "--axis", "Q", "--values", "1"}).code == cli::kDomainError);
    CHECK(run_cli({"sweep", "--axis", "C", "--values", "1,x"}).code == cli::kDomainError);
}

TEST_CASE("K_equals_M sweep couples C to K") {
    const Outcome o = run_cli({"sweep", "--axis", "K_equals_M", "--values", "1,2,3", "--c-per-k", "8", "--schemes",
                               "ub,mmse", "--snr-db", "10"});
    REQUIRE(o.code == cli::kOk);
    const auto ls = lines(o.out);
    for (std::size_t i = 1; i < ls.size(); ++i) {
        const auto f = split_record(ls[i]);
        CHECK(std::stod(f[4]) == 8.0 * std::stoi(f[1]));
        CHECK(f[1] == f[2]);
    }
}

TEST_CASE("CSV quoting") {
    CHECK(cli::csv_field("plain") == "plain");
    CHECK(cli::csv_field("a,b") == "\"a,b\"");
    CHECK(cli::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(split_record(cli::csv_field("x,\"y\"") + ",z") == std::vector<std::string>{"x,\"y\"", "z"});
}

TEST_CASE("validate negative control fails with exit code 1") {
    const Outcome bad = run_cli({"validate", "--quick", "--tolerance", "1e-30"});
    CHECK(bad.code == cli::kValidationFailed);
    const auto report = nlohmann::json::parse(bad.out);
    CHECK(report["passed"] == false);
    int failed = 0;
    for (const auto& c : report["checks"]) {
        failed += c["passed"].get<bool>() ? 0 : 1;
    }
    CHECK(failed >= 3);
}

TEST_CASE("validate quick run passes") {
    const Outcome ok = run_cli({"validate", "--quick"});
    CHECK(ok.code == cli::kOk);
    CHECK(nlohmann::json::parse(ok.out)["passed"] == true);
}

TEST_CASE("figures writes the wide CSV set") {
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "bnmimo_test_figures";
    std::filesystem::remove_all(dir);
    const Outcome o = run_cli({"figures", "--output-dir", dir.string(), "--samples", "5000"});
    REQUIRE(o.code == cli::kOk);
    CHECK(lines(o.out).size() == 14);

    const auto read = [&](const char* name) {
        std::ifstream is(dir / name);
        std::stringstream ss;
        ss << is.rdbuf();
        return lines(ss.str());
    };
    const auto fig08 = read("fig08.csv");
    REQUIRE(fig08.size() >= 2);
    const auto head = split_record(fig08[0]);
    CHECK(head == std::vector<std::string>{"rho_db", "ub", "ndt", "qci", "tci", "mmse", "capacity"});
    CHECK(split_record(fig08[1])[0] == "0");
    CHECK(split_record(fig08.back())[0] == "40");

    const auto fig15 = read("fig15.csv");
    CHECK(split_record(fig15[0])[1] == "C_bits");
    for (std::size_t i = 1; i < fig15.size(); ++i) {
        const auto f = split_record(fig15[i]);
        CHECK(std::stod(f[1]) == 8.0 * std::stod(f[0]));
    }
    std::filesystem::remove_all(dir);
}

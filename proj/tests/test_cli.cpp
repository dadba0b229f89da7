/**
 * @file test_cli.cpp
 * @brief End-to-end tests of the command-line tool: exit codes, golden
 *        outputs, reproducibility, sidecars, and multi-step round trips.
 *
 * PTRS_CLI_PATH (the built binary) and PTRS_SOURCE_DIR are injected by the
 * build. Every invocation writes into a per-case temporary directory.
 */
#include <catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptrs/exp_model.hpp"
#include "ptrs/io.hpp"
#include "ptrs/wiener.hpp"

#ifndef PTRS_CLI_PATH
#error "PTRS_CLI_PATH must point at the built CLI binary"
#endif
#ifndef PTRS_SOURCE_DIR
#error "PTRS_SOURCE_DIR must point at the repository root"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("ptrs_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static inline int counter = 0;
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct CliResult {
    int code = -1;
    std::string out, err;
};

/// Runs the CLI through the shell, capturing exit code, stdout, and stderr.
CliResult run_cli(const TempDir& tmp, const std::string& args,
                  const std::string& env_prefix = "") {
    static int seq = 0;
    const std::string outf = tmp.file(".stdout" + std::to_string(seq));
    const std::string errf = tmp.file(".stderr" + std::to_string(seq));
    ++seq;
    std::string cmd = env_prefix.empty() ? "" : env_prefix + " ";
    cmd += std::string(PTRS_CLI_PATH) + " " + args + " > " + outf + " 2> " + errf;
    const int rc = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(outf);
    r.err = slurp(errf);
    return r;
}

const std::string kPsd = std::string(PTRS_SOURCE_DIR) + "/data/default_psd.json";

}  // namespace

TEST_CASE("cli: help exits cleanly and lists the subcommands") {
    TempDir tmp;
    const auto r = run_cli(tmp, "--help");
    REQUIRE(r.code == 0);
    for (const char* sub : {"synth", "fit", "coeffs", "cost", "plan", "simulate"})
        REQUIRE(r.out.find(sub) != std::string::npos);
}

TEST_CASE("cli: unknown flags exit 2 with a suggestion") {
    TempDir tmp;
    const auto r = run_cli(tmp, "cost --n 100 --delt 7");
    REQUIRE(r.code == 2);
    REQUIRE(r.err.find("did you mean '--delta'") != std::string::npos);
}

TEST_CASE("cli: misspelled subcommands exit 2 with a suggestion") {
    TempDir tmp;
    const auto r = run_cli(tmp, "cots --n 100 --delta 7");
    REQUIRE(r.code == 2);
    REQUIRE(r.err.find("did you mean 'cost'") != std::string::npos);
}

TEST_CASE("cli: missing required options exit 2") {
    TempDir tmp;
    REQUIRE(run_cli(tmp, "cost --delta 5").code == 2);
    REQUIRE(run_cli(tmp, "synth --n 100").code == 2);  // --fc missing
    REQUIRE(run_cli(tmp, "").code == 2);               // subcommand required
}

TEST_CASE("cli: invalid model parameters exit 1") {
    TempDir tmp;
    const auto r = run_cli(tmp, "cost --a -1 --b 0.9 --n 100 --delta 10 --out-dir " +
                                    tmp.file("out"));
    REQUIRE(r.code == 1);
    REQUIRE(r.err.rfind("error:", 0) == 0);
}

TEST_CASE("cli: model flags must come as a complete pair") {
    TempDir tmp;
    const auto r = run_cli(tmp, "cost --a 0.01 --n 100 --delta 10 --out-dir " +
                                    tmp.file("out"));
    REQUIRE(r.code == 2);
    REQUIRE(r.err.find("usage error") != std::string::npos);
}

TEST_CASE("cli: plan reproduces the documented operating point") {
    TempDir tmp;
    const auto r = run_cli(tmp,
                           "plan --omega 0.0453 --eta 0.0195 --max-cost 2.5 "
                           "--delta0 20 --n 4096 --out " +
                               tmp.file("plan.json"));
    REQUIRE(r.code == 0);
    const json j = json::parse(slurp(tmp.file("plan.json")));
    REQUIRE(j["delta_pf"] == 54);
    REQUIRE(j["feasible"] == true);
    REQUIRE(j["j_at_delta0_pct"].get<double>() == Catch::Approx(0.9255).epsilon(1e-12));
    REQUIRE(j["overhead_pct"].get<double>() == Catch::Approx(100.0 / 54).epsilon(1e-9));
    REQUIRE_FALSE(j.contains("timestamp"));  // timestamps live in sidecars only
}

TEST_CASE("cli: infeasible plans still exit 0 and say why") {
    TempDir tmp;
    const auto r = run_cli(tmp,
                           "plan --omega 0.0453 --eta 0.0195 --max-cost 0.5 "
                           "--delta0 20 --n 4096 --out " +
                               tmp.file("plan.json"));
    REQUIRE(r.code == 0);
    const json j = json::parse(slurp(tmp.file("plan.json")));
    REQUIRE(j["feasible"] == false);
    REQUIRE(j.contains("note"));
}

TEST_CASE("cli: planning from an out-of-range carrier warns but proceeds") {
    TempDir tmp;
    const auto r = run_cli(tmp, "plan --fc 50e9 --max-cost 2.5 --delta0 20 --out " +
                                    tmp.file("plan.json"));
    REQUIRE(r.code == 0);
    REQUIRE(r.err.find("warning") != std::string::npos);
}

TEST_CASE("cli: sidecar configs record the command without polluting the data") {
    TempDir tmp;
    const auto r = run_cli(tmp,
                           "plan --fc 300e9 --max-cost 2.5 --delta0 20 --out " +
                               tmp.file("plan.json"));
    REQUIRE(r.code == 0);
    const std::string sidecar = tmp.file("plan.json.config.json");
    REQUIRE(fs::exists(sidecar));
    const json sc = json::parse(slurp(sidecar));
    REQUIRE(sc["command"] == "plan");
    REQUIRE(sc["argv"].is_array());
    REQUIRE(sc["resolved"].is_object());
    REQUIRE(sc["timestamp"].is_string());
    REQUIRE(sc["output"] == tmp.file("plan.json"));
}

TEST_CASE("cli: cost matches the frozen regression value") {
    TempDir tmp;
    const auto r = run_cli(tmp,
                           "cost --a 0.05 --b 0.9 --n 60 --delta 7 --p1 5 --np 8 "
                           "--method boxed --out " +
                               tmp.file("cost.json"));
    REQUIRE(r.code == 0);
    const json j = json::parse(slurp(tmp.file("cost.json")));
    REQUIRE(j["j_pct"].get<double>() ==
            Catch::Approx(1.37274547999987446).epsilon(1e-12));
    REQUIRE(j["j_abs"].get<double>() ==
            Catch::Approx(0.823647287999924677).epsilon(1e-12));
    REQUIRE(j["method"] == "boxed");
    REQUIRE(j["n_pilots"] == 8);
}

TEST_CASE("cli: unit spacing costs nothing") {
    TempDir tmp;
    const auto r = run_cli(tmp, "cost --a 0.0074 --b 0.9 --n 512 --delta 1 --out " +
                                    tmp.file("cost.json"));
    REQUIRE(r.code == 0);
    REQUIRE(json::parse(slurp(tmp.file("cost.json")))["j_pct"].get<double>() < 1e-6);
}

TEST_CASE("cli: per-position cost dump covers every position") {
    TempDir tmp;
    const auto r = run_cli(tmp,
                           "cost --a 0.01 --b 0.9 --n 64 --delta 8 --method numeric "
                           "--dump-jn " +
                               tmp.file("jn.csv") + " --out " + tmp.file("cost.json"));
    REQUIRE(r.code == 0);
    std::ifstream f(tmp.file("jn.csv"));
    std::string line;
    REQUIRE(std::getline(f, line));
    REQUIRE(line == "n,j_n");
    int rows = 0;
    while (std::getline(f, line))
        if (!line.empty()) ++rows;
    REQUIRE(rows == 64);
}

TEST_CASE("cli: sweep outputs are byte-identical across runs") {
    TempDir tmp;
    const std::string base =
        "sweep-delta --a 0.0074 --b 0.9 --n 4096 --deltas 1:109:12 --out ";
    REQUIRE(run_cli(tmp, base + tmp.file("s1.csv")).code == 0);
    REQUIRE(run_cli(tmp, base + tmp.file("s2.csv")).code == 0);
    const std::string s1 = slurp(tmp.file("s1.csv"));
    REQUIRE(s1 == slurp(tmp.file("s2.csv")));
    REQUIRE(s1.rfind("delta,n_pilots,j_pct,method", 0) == 0);
    int lines = 0;
    for (const char ch : s1)
        if (ch == '\n') ++lines;
    REQUIRE(lines == 1 + 10);  // header + spacings 1, 13, ..., 109
}

TEST_CASE("cli: synthesized traces are deterministic and seed-sensitive") {
    TempDir tmp;
    const std::string base = "synth --psd " + kPsd +
                             " --fc 1e11 --n 1024 --traces 1 --seed 7 --out-dir ";
    REQUIRE(run_cli(tmp, base + tmp.file("r1")).code == 0);
    REQUIRE(run_cli(tmp, base + tmp.file("r2")).code == 0);
    const std::string t1 = slurp(tmp.file("r1/trace_0000.pntr"));
    REQUIRE_FALSE(t1.empty());
    REQUIRE(t1 == slurp(tmp.file("r2/trace_0000.pntr")));

    // The environment seed overrides --seed and changes the bytes.
    REQUIRE(run_cli(tmp, base + tmp.file("r3"), "PTRS_SEED=99").code == 0);
    REQUIRE(t1 != slurp(tmp.file("r3/trace_0000.pntr")));

    // A non-numeric environment seed is a usage error.
    const auto bad = run_cli(tmp, base + tmp.file("r4"), "PTRS_SEED=abc");
    REQUIRE(bad.code == 2);
    REQUIRE(bad.err.find("usage error") != std::string::npos);
}

TEST_CASE("cli: synth to autocorr to fit to cost round trip") {
    TempDir tmp;
    REQUIRE(run_cli(tmp, "synth --psd " + kPsd +
                             " --fc 1e11 --n 2048 --traces 4 --seed 11 --out-dir " +
                             tmp.file("tr"))
                .code == 0);
    for (int i = 0; i < 4; ++i)
        REQUIRE(fs::exists(tmp.file("tr/trace_000" + std::to_string(i) + ".pntr")));

    REQUIRE(run_cli(tmp, "autocorr " + tmp.file("tr/trace_0000.pntr") + " " +
                             tmp.file("tr/trace_0001.pntr") + " " +
                             tmp.file("tr/trace_0002.pntr") + " " +
                             tmp.file("tr/trace_0003.pntr") + " --max-lag 256 --out " +
                             tmp.file("g.csv"))
                .code == 0);

    const auto fit = run_cli(tmp, "fit --autocorr " + tmp.file("g.csv") + " --out " +
                                      tmp.file("model.json"));
    REQUIRE(fit.code == 0);
    const json mj = json::parse(slurp(tmp.file("model.json")));
    REQUIRE(mj["a"].get<double>() > 0.0);
    REQUIRE(mj["b"].get<double>() > 0.0);
    REQUIRE(mj["b"].get<double>() < 1.0);

    const auto cost = run_cli(tmp, "cost --model-file " + tmp.file("model.json") +
                                       " --n 512 --delta 25 --out " +
                                       tmp.file("cost.json"));
    REQUIRE(cost.code == 0);
    const json cj = json::parse(slurp(tmp.file("cost.json")));
    REQUIRE(cj["j_pct"].get<double>() > 0.0);
    REQUIRE(cj["j_pct"].get<double>() < 100.0);
}

TEST_CASE("cli: exact fit from the bundled PSD lands in the calibrated window") {
    TempDir tmp;
    const auto r = run_cli(tmp, "fit --exact --psd " + kPsd +
                                    " --fc 1e11 --n 8192 --out " +
                                    tmp.file("m100.json"));
    REQUIRE(r.code == 0);
    const json j = json::parse(slurp(tmp.file("m100.json")));
    REQUIRE(j["a"].get<double>() > 7.0e-3);
    REQUIRE(j["a"].get<double>() < 7.7e-3);
    REQUIRE(j["b"].get<double>() > 0.973);
    REQUIRE(j["b"].get<double>() < 0.981);
    REQUIRE(j["fc_hz"].get<double>() == 1e11);
}

TEST_CASE("cli: sweep feeds the affine fitter") {
    TempDir tmp;
    REQUIRE(run_cli(tmp, "sweep-delta --a 0.0078 --b 0.8225 --n 4096 "
                         "--deltas 1:109:12 --out " +
                             tmp.file("sw.csv"))
                .code == 0);
    const auto r = run_cli(tmp, "fit-affine --sweep " + tmp.file("sw.csv") +
                                    " --out " + tmp.file("affine.json"));
    REQUIRE(r.code == 0);
    const json j = json::parse(slurp(tmp.file("affine.json")));
    REQUIRE(j["r2"].get<double>() > 0.99);
    REQUIRE(j["omega"].get<double>() > 0.0);
    REQUIRE(j["n_points"] == 10);
}

TEST_CASE("cli: simulate reports a sane z-score and respects the seed") {
    TempDir tmp;
    const std::string base =
        "simulate --a 0.0074 --b 0.9 --n 256 --delta 25 --trials 500 --seed 3 --out ";
    const auto r = run_cli(tmp, base + tmp.file("sim1.json"));
    REQUIRE(r.code == 0);
    const json j = json::parse(slurp(tmp.file("sim1.json")));
    REQUIRE(j["mode"] == "surrogate");
    REQUIRE(j["trials"] == 500);
    REQUIRE(std::abs(j["z_score"].get<double>()) < 5.0);
    REQUIRE(j["analytic_j_pct"].get<double>() > 0.0);

    REQUIRE(run_cli(tmp, base + tmp.file("sim2.json")).code == 0);
    const json j2 = json::parse(slurp(tmp.file("sim2.json")));
    REQUIRE(j["empirical_j_pct"] == j2["empirical_j_pct"]);
}

TEST_CASE("cli: binary coefficient dumps match the in-process computation") {
    TempDir tmp;
    const auto r = run_cli(tmp,
                           "coeffs --a 0.01 --b 0.8 --n 100 --delta 11 --p1 3 --np 9 "
                           "--format bin --out " +
                               tmp.file("w.ptwm"));
    REQUIRE(r.code == 0);
    const auto disk = ptrs::io::read_coeffs_bin(tmp.file("w.ptwm"));
    const ptrs::model::ExpModel m(0.01, 0.8);
    const ptrs::wiener::PilotPattern pat(100, 3, 11, 9);
    const auto mem = ptrs::wiener::coefficients_closed(m, pat);
    REQUIRE(disk.rows == mem.weights.rows);
    REQUIRE(disk.cols == mem.weights.cols);
    double worst = 0.0;
    for (std::size_t i = 0; i < disk.data.size(); ++i)
        worst = std::max(worst, std::abs(disk.data[i] - mem.weights.data[i]));
    REQUIRE(worst < 1e-15);

    const auto csv = run_cli(tmp,
                             "coeffs --a 0.01 --b 0.8 --n 100 --delta 11 "
                             "--format csv --out " +
                                 tmp.file("w.csv"));
    REQUIRE(csv.code == 0);
    REQUIRE(slurp(tmp.file("w.csv")).rfind("n,j,w", 0) == 0);
}

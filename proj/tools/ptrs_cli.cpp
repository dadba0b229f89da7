/**
 * @file ptrs_cli.cpp
 * @brief Command-line front end for the pilot-planning library: synthesize
 *        phase noise, estimate and fit autocorrelation, compute Wiener
 *        coefficients and costs, sweep parameters, plan spacings, and run
 *        Monte Carlo validation.
 *
 * Conventions shared by every subcommand:
 *  - exit 0 on success, 1 on domain/data errors, 2 on usage errors;
 *  - the PTRS_SEED environment variable overrides --seed;
 *  - data outputs carry no timestamps (byte-identical reruns); each output
 *    file gets a <file>.config.json sidecar with the resolved configuration
 *    and a timestamp;
 *  - sweep ranges accept lo:hi:step (inclusive endpoints) or comma lists.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "ptrs/ptrs.hpp"

namespace fs = std::filesystem;
using ptrs::io::json;

namespace {

/// Command-line misuse distinct from domain errors; exits with code 2.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

std::string now_iso8601() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::uint64_t resolve_seed(std::uint64_t cli_seed) {
    const char* env = std::getenv("PTRS_SEED");
    if (!env || !*env) return cli_seed;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
        throw UsageError(std::string("PTRS_SEED is not an unsigned integer: ") + env);
    return static_cast<std::uint64_t>(v);
}

std::vector<long long> parse_range_ll(const std::string& s) {
    std::vector<long long> out;
    try {
        if (s.find(':') != std::string::npos) {
            long long lo = 0, hi = 0, step = 1;
            const auto c1 = s.find(':');
            const auto c2 = s.find(':', c1 + 1);
            lo = std::stoll(s.substr(0, c1));
            hi = std::stoll(s.substr(c1 + 1, c2 == std::string::npos
                                                  ? std::string::npos
                                                  : c2 - c1 - 1));
            if (c2 != std::string::npos) step = std::stoll(s.substr(c2 + 1));
            if (step < 1) throw UsageError("range step must be >= 1: " + s);
            for (long long v = lo; v <= hi; v += step) out.push_back(v);
        } else {
            std::size_t pos = 0;
            while (pos <= s.size()) {
                const auto comma = s.find(',', pos);
                const auto part =
                    s.substr(pos, comma == std::string::npos ? std::string::npos
                                                             : comma - pos);
                if (!part.empty()) out.push_back(std::stoll(part));
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
        }
    } catch (const std::logic_error&) {
        throw UsageError("cannot parse integer range '" + s + "'");
    }
    if (out.empty()) throw UsageError("empty range: '" + s + "'");
    return out;
}

std::vector<double> parse_range_d(const std::string& s) {
    std::vector<double> out;
    try {
        if (s.find(':') != std::string::npos) {
            const auto c1 = s.find(':');
            const auto c2 = s.find(':', c1 + 1);
            if (c2 == std::string::npos)
                throw UsageError("real range needs lo:hi:step: " + s);
            const double lo = std::stod(s.substr(0, c1));
            const double hi = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
            const double step = std::stod(s.substr(c2 + 1));
            if (!(step > 0.0)) throw UsageError("range step must be > 0: " + s);
            const auto count =
                static_cast<long long>(std::floor((hi - lo) / step + 1e-9)) + 1;
            for (long long i = 0; i < count; ++i)
                out.push_back(lo + static_cast<double>(i) * step);
        } else {
            std::size_t pos = 0;
            while (pos <= s.size()) {
                const auto comma = s.find(',', pos);
                const auto part =
                    s.substr(pos, comma == std::string::npos ? std::string::npos
                                                             : comma - pos);
                if (!part.empty()) out.push_back(std::stod(part));
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
        }
    } catch (const std::logic_error&) {
        throw UsageError("cannot parse real range '" + s + "'");
    }
    if (out.empty()) throw UsageError("empty range: '" + s + "'");
    return out;
}

void ensure_parent_dir(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

std::string default_out(const std::string& out, const std::string& out_dir,
                        const std::string& name) {
    return out.empty() ? (fs::path(out_dir) / name).string() : out;
}

std::vector<std::string> g_argv;

void write_sidecar(const std::string& data_path, const std::string& subcmd,
                   json resolved) {
    json side;
    side["command"] = subcmd;
    side["argv"] = g_argv;
    side["resolved"] = std::move(resolved);
    side["output"] = data_path;
    side["timestamp"] = now_iso8601();
    ptrs::io::write_json(data_path + ".config.json", side);
}

// ----------------------------------------------------------- model flags

struct ModelFlags {
    double a = std::numeric_limits<double>::quiet_NaN();
    double b = std::numeric_limits<double>::quiet_NaN();
    std::string model_file;
    double fc = std::numeric_limits<double>::quiet_NaN();
    std::string models_file = "data/fitted_models.json";
};

void add_model_flags(CLI::App* sub, ModelFlags& mf, bool with_fc = true) {
    sub->add_option("--a", mf.a, "Model decay rate per sample");
    sub->add_option("--b", mf.b, "Model floor correlation in (0,1)");
    sub->add_option("--model-file", mf.model_file, "Model JSON file");
    if (with_fc) {
        sub->add_option("--fc", mf.fc,
                        "Carrier frequency in Hz (model interpolated from the "
                        "fitted-models file)");
        sub->add_option("--models-file", mf.models_file,
                        "Per-carrier fitted models JSON")
            ->capture_default_str();
    }
}

ptrs::model::ExpModel resolve_model(const ModelFlags& mf, json* resolved) {
    const bool has_a = !std::isnan(mf.a), has_b = !std::isnan(mf.b);
    if (has_a != has_b) throw UsageError("--a and --b must be given together");
    ptrs::model::ExpModel m;
    std::string source;
    if (has_a) {
        m = ptrs::model::ExpModel(mf.a, mf.b,
                                  std::isnan(mf.fc) ? std::nullopt
                                                    : std::optional<double>(mf.fc));
        source = "explicit";
    } else if (!mf.model_file.empty()) {
        m = ptrs::io::read_model_json(mf.model_file);
        source = "file:" + mf.model_file;
    } else if (!std::isnan(mf.fc)) {
        const auto models = ptrs::io::read_fitted_models(mf.models_file);
        m = ptrs::io::model_for_fc(models, mf.fc);
        source = "interpolated:" + mf.models_file;
    } else {
        throw UsageError(
            "no model given: use --a/--b, --model-file, or --fc with a "
            "fitted-models file");
    }
    if (resolved) {
        (*resolved)["model"] = ptrs::io::model_to_json(m);
        (*resolved)["model_source"] = source;
    }
    return m;
}

ptrs::wiener::PilotPattern make_pattern(long long n, long long delta, long long p1,
                                        long long np) {
    if (np > 0) return ptrs::wiener::PilotPattern(n, p1, delta, np);
    return ptrs::wiener::from_spacing(n, delta, p1);
}

ptrs::cost::Method parse_method(const std::string& s) {
    if (s == "numeric") return ptrs::cost::Method::numeric;
    if (s == "boxed") return ptrs::cost::Method::boxed;
    if (s == "quasipoly") return ptrs::cost::Method::quasipoly;
    throw UsageError("unknown method: " + s);
}

/// Preferred method with the documented automatic fallback below 3 pilots.
std::pair<ptrs::cost::CostReport, std::string> cost_with_fallback(
    const ptrs::model::ExpModel& m, const ptrs::wiener::PilotPattern& pat,
    ptrs::cost::Method method) {
    try {
        return {ptrs::cost::cost(m, pat, method), ptrs::cost::method_name(method)};
    } catch (const ptrs::FallbackToNumeric&) {
        return {ptrs::cost::cost_numeric(m, pat), "numeric-fallback"};
    }
}

// --------------------------------------------------- unknown-flag helper

std::size_t levenshtein(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                               prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

void collect_names(CLI::App* a, std::vector<std::string>& out) {
    for (const auto* opt : a->get_options())
        for (const auto& n : opt->get_lnames()) out.push_back("--" + n);
    for (auto* sub : a->get_subcommands([](CLI::App*) { return true; })) {
        out.push_back(sub->get_name());
        collect_names(sub, out);
    }
}

void suggest_unknown(CLI::App& app, int argc, char** argv) {
    std::vector<std::string> names;
    collect_names(&app, names);
    for (int i = 1; i < argc; ++i) {
        std::string tok = argv[i];
        const auto eq = tok.find('=');
        if (eq != std::string::npos) tok = tok.substr(0, eq);
        const bool flag_like = tok.rfind("--", 0) == 0;
        const bool sub_like = i == 1 && !flag_like;
        if (!flag_like && !sub_like) continue;
        if (std::find(names.begin(), names.end(), tok) != names.end()) continue;
        std::size_t best = std::string::npos;
        std::string best_name;
        for (const auto& n : names) {
            if (flag_like != (n.rfind("--", 0) == 0)) continue;
            const std::size_t d = levenshtein(tok, n);
            if (d < best) {
                best = d;
                best_name = n;
            }
        }
        if (!best_name.empty() && best <= 3)
            std::cerr << "hint: unknown '" << tok << "' - did you mean '"
                      << best_name << "'?\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    g_argv.assign(argv, argv + argc);
    CLI::App app{
        "ptrs - phase-noise-aware pilot spacing planning for DFT-s-OFDM\n"
        "Synthesizes oscillator phase noise from a pole/zero PSD, fits the\n"
        "exponential-plus-floor autocorrelation model, computes Wiener\n"
        "interpolation coefficients and the closed-form tracking cost, and\n"
        "plans the maximum pilot spacing under a cost ceiling."};
    app.require_subcommand(1);

    // ------------------------------------------------------------- synth
    struct {
        std::string psd = "data/default_psd.json";
        double fc = 0.0, fs = 983.04e6;
        std::size_t n = 0, traces = 1;
        std::uint64_t seed = 1;
        std::string format = "bin", prefix = "trace", out_dir = "./out";
    } sy;
    auto* synth = app.add_subcommand(
        "synth", "Synthesize stationary phase-noise traces from a PSD");
    synth->add_option("--psd", sy.psd, "PSD JSON file")->capture_default_str();
    synth->add_option("--fc", sy.fc, "Carrier frequency in Hz")->required();
    synth->add_option("--fs", sy.fs, "Sampling rate in Hz")->capture_default_str();
    synth->add_option("--n", sy.n, "Samples per trace")->required();
    synth->add_option("--traces", sy.traces, "Number of traces")->capture_default_str();
    synth->add_option("--seed", sy.seed, "Master seed (PTRS_SEED overrides)")
        ->capture_default_str();
    synth->add_option("--format", sy.format, "Output format")
        ->check(CLI::IsMember({"bin", "csv"}))
        ->capture_default_str();
    synth->add_option("--prefix", sy.prefix, "Output filename prefix")
        ->capture_default_str();
    synth->add_option("--out-dir", sy.out_dir, "Output directory")
        ->capture_default_str();
    synth->callback([&] {
        const auto seed = resolve_seed(sy.seed);
        const auto spec = ptrs::io::read_psd_json(sy.psd);
        const auto hs = ptrs::noise::build_harmonic_spectrum(spec, sy.fc, sy.fs, sy.n);
        fs::create_directories(sy.out_dir);
        for (std::size_t t = 0; t < sy.traces; ++t) {
            ptrs::math::RandomStream rng(seed, static_cast<std::uint64_t>(t));
            const auto phi = ptrs::noise::synthesize(hs, sy.n, rng);
            char name[128];
            std::snprintf(name, sizeof(name), "%s_%04zu.%s", sy.prefix.c_str(), t,
                          sy.format == "bin" ? "pntr" : "csv");
            const std::string path = (fs::path(sy.out_dir) / name).string();
            if (sy.format == "bin")
                ptrs::io::write_trace_bin(path, sy.fs, phi);
            else
                ptrs::io::write_trace_csv(path, phi);
            json resolved{{"psd_file", sy.psd},
                          {"psd", ptrs::io::psd_to_json(spec)},
                          {"fc_hz", sy.fc},
                          {"fs_hz", sy.fs},
                          {"n", sy.n},
                          {"traces", sy.traces},
                          {"trace_index", t},
                          {"seed", seed},
                          {"format", sy.format}};
            write_sidecar(path, "synth", std::move(resolved));
        }
        std::cerr << "wrote " << sy.traces << " trace(s) under " << sy.out_dir
                  << "\n";
    });

    // ---------------------------------------------------------- autocorr
    struct {
        std::vector<std::string> traces;
        long long max_lag = -1;
        std::string out, out_dir = "./out";
    } ac;
    auto* autoc = app.add_subcommand(
        "autocorr", "Empirical autocorrelation of e^{i phi} from trace files");
    autoc->add_option("traces", ac.traces, "Trace files (binary or CSV)")
        ->required()
        ->expected(-1);
    autoc->add_option("--max-lag", ac.max_lag,
                      "Largest lag (default: quarter of the trace length)");
    autoc->add_option("--out", ac.out, "Output CSV (default <out-dir>/autocorr.csv)");
    autoc->add_option("--out-dir", ac.out_dir, "Output directory")
        ->capture_default_str();
    autoc->callback([&] {
        std::vector<std::vector<double>> traces;
        traces.reserve(ac.traces.size());
        for (const auto& p : ac.traces) traces.push_back(ptrs::io::read_trace_any(p));
        const std::size_t n = traces.front().size();
        const std::size_t max_lag =
            ac.max_lag >= 0 ? static_cast<std::size_t>(ac.max_lag)
                            : std::max<std::size_t>(n / 4, 1);
        const auto est = ptrs::noise::empirical_autocorr(traces, max_lag);
        const std::string out = default_out(ac.out, ac.out_dir, "autocorr.csv");
        ensure_parent_dir(out);
        ptrs::io::write_autocorr_csv(out, est.values);
        write_sidecar(out, "autocorr",
                      json{{"inputs", ac.traces},
                           {"max_lag", max_lag},
                           {"n_realizations", est.n_realizations},
                           {"max_imag", est.max_imag}});
        std::cerr << "wrote " << out << " (lags 0.." << max_lag << ", "
                  << est.n_realizations << " trace(s), max|Im| = " << est.max_imag
                  << ")\n";
    });

    // --------------------------------------------------------------- fit
    struct {
        std::string autocorr;
        std::string psd = "data/default_psd.json";
        double fc = std::numeric_limits<double>::quiet_NaN();
        double fs = 983.04e6;
        std::size_t n = 8192, traces = 0;
        bool exact = false;
        std::uint64_t seed = 1;
        long long lag_min = 0, lag_max = -1;
        std::string out, out_dir = "./out";
    } ft;
    auto* fit = app.add_subcommand(
        "fit", "Fit the exponential-plus-floor model to an autocorrelation");
    fit->add_option("--autocorr", ft.autocorr, "Autocorrelation CSV to fit");
    fit->add_option("--psd", ft.psd, "PSD JSON (when fitting from synthesis)")
        ->capture_default_str();
    fit->add_option("--fc", ft.fc, "Carrier frequency in Hz");
    fit->add_option("--fs", ft.fs, "Sampling rate in Hz")->capture_default_str();
    fit->add_option("--n", ft.n, "Trace length for synthesis")->capture_default_str();
    fit->add_flag("--exact", ft.exact,
                  "Fit the synthesis grid's exact autocorrelation (no Monte Carlo)");
    fit->add_option("--traces", ft.traces,
                    "Monte Carlo trace count (alternative to --exact)");
    fit->add_option("--seed", ft.seed, "Master seed (PTRS_SEED overrides)")
        ->capture_default_str();
    fit->add_option("--lag-min", ft.lag_min, "First lag used")->capture_default_str();
    fit->add_option("--lag-max", ft.lag_max,
                    "Last lag used (default: quarter of the trace length)");
    fit->add_option("--out", ft.out, "Output model JSON (default <out-dir>/model.json)");
    fit->add_option("--out-dir", ft.out_dir, "Output directory")->capture_default_str();
    fit->callback([&] {
        std::vector<double> gamma;
        json src;
        if (!ft.autocorr.empty()) {
            gamma = ptrs::io::read_autocorr_csv(ft.autocorr);
            src = json{{"autocorr_file", ft.autocorr}};
        } else {
            if (std::isnan(ft.fc))
                throw UsageError("fit needs --autocorr, or --fc with a PSD");
            const auto spec = ptrs::io::read_psd_json(ft.psd);
            const std::size_t lags = ft.lag_max >= 0
                                         ? static_cast<std::size_t>(ft.lag_max)
                                         : std::max<std::size_t>(ft.n / 4, 1);
            if (ft.exact) {
                gamma = ptrs::noise::expected_autocorr(spec, ft.fc, ft.fs, ft.n, lags);
                src = json{{"psd_file", ft.psd}, {"mode", "exact"}};
            } else {
                if (ft.traces == 0)
                    throw UsageError("fit from a PSD needs --exact or --traces N");
                const auto seed = resolve_seed(ft.seed);
                const auto hs =
                    ptrs::noise::build_harmonic_spectrum(spec, ft.fc, ft.fs, ft.n);
                std::vector<std::vector<double>> traces(ft.traces);
                ptrs::math::parallel_for(ft.traces, [&](std::size_t t) {
                    ptrs::math::RandomStream rng(seed, static_cast<std::uint64_t>(t));
                    traces[t] = ptrs::noise::synthesize(hs, ft.n, rng);
                });
                gamma = ptrs::noise::empirical_autocorr(traces, lags).values;
                src = json{{"psd_file", ft.psd},
                           {"mode", "monte-carlo"},
                           {"traces", ft.traces},
                           {"seed", seed}};
            }
            src["fc_hz"] = ft.fc;
            src["fs_hz"] = ft.fs;
            src["n"] = ft.n;
        }
        const std::size_t j_min = static_cast<std::size_t>(std::max(ft.lag_min, 0LL));
        const std::size_t j_max = ft.lag_max >= 0 &&
                                          static_cast<std::size_t>(ft.lag_max) <
                                              gamma.size()
                                      ? static_cast<std::size_t>(ft.lag_max)
                                      : gamma.size() - 1;
        const auto m = ptrs::model::fit(
            gamma, j_min, j_max,
            std::isnan(ft.fc) ? std::nullopt : std::optional<double>(ft.fc));
        const std::string out = default_out(ft.out, ft.out_dir, "model.json");
        ensure_parent_dir(out);
        ptrs::io::write_model_json(out, m);
        src["lag_range"] = json::array({j_min, j_max});
        write_sidecar(out, "fit", std::move(src));
        std::cout << ptrs::io::model_to_json(m).dump(2) << "\n";
        if (m.fit_flagged)
            std::cerr << "warning: fit mean-square error " << *m.fit_mse
                      << " exceeds the trust threshold\n";
    });

    // ------------------------------------------------------------ coeffs
    struct {
        ModelFlags mf;
        long long n = 0, delta = 0, p1 = 1, np = -1;
        std::string mode = "auto", format = "csv";
        std::string out, out_dir = "./out";
    } co;
    auto* coeffs = app.add_subcommand("coeffs", "Wiener interpolation coefficients");
    add_model_flags(coeffs, co.mf);
    coeffs->add_option("--n", co.n, "Block length N")->required();
    coeffs->add_option("--delta", co.delta, "Pilot spacing")->required();
    coeffs->add_option("--p1", co.p1, "First pilot position")->capture_default_str();
    coeffs->add_option("--np", co.np, "Pilot count override (default ceil(N/delta))");
    coeffs->add_option("--mode", co.mode, "closed | numeric | auto")
        ->check(CLI::IsMember({"auto", "closed", "numeric"}))
        ->capture_default_str();
    coeffs->add_option("--format", co.format, "Output format")
        ->check(CLI::IsMember({"csv", "bin"}))
        ->capture_default_str();
    coeffs->add_option("--out", co.out, "Output file (default <out-dir>/coeffs.<ext>)");
    coeffs->add_option("--out-dir", co.out_dir, "Output directory")
        ->capture_default_str();
    coeffs->callback([&] {
        json resolved;
        const auto m = resolve_model(co.mf, &resolved);
        const auto pat = make_pattern(co.n, co.delta, co.p1, co.np);
        ptrs::wiener::WienerCoefficients w;
        std::string mode_used = co.mode;
        if (co.mode == "closed") {
            w = ptrs::wiener::coefficients_closed(m, pat);
        } else if (co.mode == "numeric") {
            w = ptrs::wiener::coefficients_numeric(m, pat);
        } else {
            try {
                w = ptrs::wiener::coefficients_closed(m, pat);
                mode_used = "closed";
            } catch (const ptrs::FallbackToNumeric&) {
                w = ptrs::wiener::coefficients_numeric(m, pat);
                mode_used = "numeric-fallback";
            }
        }
        const std::string out = default_out(
            co.out, co.out_dir, co.format == "bin" ? "coeffs.bin" : "coeffs.csv");
        ensure_parent_dir(out);
        if (co.format == "bin")
            ptrs::io::write_coeffs_bin(out, w);
        else
            ptrs::io::write_coeffs_csv(out, w);
        resolved["pattern"] = json{{"n_total", pat.n_total},
                                   {"p1", pat.p1},
                                   {"delta", pat.delta},
                                   {"n_pilots", pat.n_pilots}};
        resolved["mode"] = mode_used;
        write_sidecar(out, "coeffs", std::move(resolved));
        std::cerr << "wrote " << out << " (" << pat.n_total << " x " << pat.n_pilots
                  << ", " << mode_used << ")\n";
    });

    // -------------------------------------------------------------- cost
    struct {
        ModelFlags mf;
        long long n = 0, delta = 0, p1 = 1, np = -1;
        std::string method = "boxed";
        std::string dump_jn;
        std::string out, out_dir = "./out";
    } cst;
    auto* costc = app.add_subcommand("cost", "Global interpolation cost J");
    add_model_flags(costc, cst.mf);
    costc->add_option("--n", cst.n, "Block length N")->required();
    costc->add_option("--delta", cst.delta, "Pilot spacing")->required();
    costc->add_option("--p1", cst.p1, "First pilot position")->capture_default_str();
    costc->add_option("--np", cst.np, "Pilot count override (default ceil(N/delta))");
    costc->add_option("--method", cst.method, "numeric | boxed | quasipoly")
        ->check(CLI::IsMember({"numeric", "boxed", "quasipoly"}))
        ->capture_default_str();
    costc->add_option("--dump-jn", cst.dump_jn,
                      "Also write per-position costs J_n to this CSV");
    costc->add_option("--out", cst.out, "Output JSON (default <out-dir>/cost.json)");
    costc->add_option("--out-dir", cst.out_dir, "Output directory")
        ->capture_default_str();
    costc->callback([&] {
        json resolved;
        const auto m = resolve_model(cst.mf, &resolved);
        const auto pat = make_pattern(cst.n, cst.delta, cst.p1, cst.np);
        const auto [rep, method_used] =
            cost_with_fallback(m, pat, parse_method(cst.method));
        json out_json = ptrs::io::cost_to_json(rep);
        out_json["method"] = method_used;
        out_json["n_total"] = pat.n_total;
        out_json["n_pilots"] = pat.n_pilots;
        out_json["delta"] = pat.delta;
        out_json["p1"] = pat.p1;
        const std::string out = default_out(cst.out, cst.out_dir, "cost.json");
        ensure_parent_dir(out);
        ptrs::io::write_json(out, out_json);
        if (!cst.dump_jn.empty()) {
            std::vector<double> jn;
            ptrs::cost::cost_numeric(m, pat, &jn);
            ensure_parent_dir(cst.dump_jn);
            auto f = std::ofstream(cst.dump_jn);
            if (!f) throw ptrs::IoError("cannot open for writing: " + cst.dump_jn);
            f << "n,j_n\n";
            for (std::size_t i = 0; i < jn.size(); ++i) {
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%.17g", jn[i]);
                f << (i + 1) << ',' << buf << '\n';
            }
        }
        resolved["pattern"] = json{{"n_total", pat.n_total},
                                   {"p1", pat.p1},
                                   {"delta", pat.delta},
                                   {"n_pilots", pat.n_pilots}};
        resolved["method"] = method_used;
        write_sidecar(out, "cost", std::move(resolved));
        std::cout << out_json.dump(2) << "\n";
    });

    // ------------------------------------------------------- sweep-delta
    struct {
        ModelFlags mf;
        long long n = 4096, p1 = 1;
        std::string deltas = "1:109:12";
        std::string method = "boxed";
        std::string out, out_dir = "./out";
    } sd;
    auto* sweep_delta =
        app.add_subcommand("sweep-delta", "Cost against pilot spacing (CSV)");
    add_model_flags(sweep_delta, sd.mf);
    sweep_delta->add_option("--n", sd.n, "Block length N")->capture_default_str();
    sweep_delta->add_option("--p1", sd.p1, "First pilot position")
        ->capture_default_str();
    sweep_delta->add_option("--deltas", sd.deltas, "Spacings, lo:hi:step or list")
        ->capture_default_str();
    sweep_delta->add_option("--method", sd.method, "numeric | boxed | quasipoly")
        ->check(CLI::IsMember({"numeric", "boxed", "quasipoly"}))
        ->capture_default_str();
    sweep_delta->add_option("--out", sd.out,
                            "Output CSV (default <out-dir>/sweep_delta.csv)");
    sweep_delta->add_option("--out-dir", sd.out_dir, "Output directory")
        ->capture_default_str();
    sweep_delta->callback([&] {
        json resolved;
        const auto m = resolve_model(sd.mf, &resolved);
        const auto deltas = parse_range_ll(sd.deltas);
        const auto rows =
            ptrs::cost::cost_vs_spacing(m, sd.n, sd.p1, deltas, parse_method(sd.method));
        const std::string out = default_out(sd.out, sd.out_dir, "sweep_delta.csv");
        ensure_parent_dir(out);
        ptrs::io::write_sweep_csv(out, rows);
        resolved["n"] = sd.n;
        resolved["p1"] = sd.p1;
        resolved["deltas"] = sd.deltas;
        resolved["method"] = sd.method;
        write_sidecar(out, "sweep-delta", std::move(resolved));
        std::cerr << "wrote " << out << " (" << rows.size() << " rows)\n";
    });

    // ---------------------------------------------------------- sweep-fc
    struct {
        std::string models_file = "data/fitted_models.json";
        std::string fcs;
        long long delta = 0, n = 4096, p1 = 1;
        std::string method = "boxed";
        std::string out, out_dir = "./out";
    } sf;
    auto* sweep_fc =
        app.add_subcommand("sweep-fc", "Cost against carrier frequency (CSV)");
    sweep_fc->add_option("--models-file", sf.models_file, "Per-carrier fitted models")
        ->capture_default_str();
    sweep_fc->add_option("--fcs", sf.fcs, "Carriers in Hz, lo:hi:step or list")
        ->required();
    sweep_fc->add_option("--delta", sf.delta, "Pilot spacing")->required();
    sweep_fc->add_option("--n", sf.n, "Block length N")->capture_default_str();
    sweep_fc->add_option("--p1", sf.p1, "First pilot position")->capture_default_str();
    sweep_fc->add_option("--method", sf.method, "numeric | boxed | quasipoly")
        ->check(CLI::IsMember({"numeric", "boxed", "quasipoly"}))
        ->capture_default_str();
    sweep_fc->add_option("--out", sf.out, "Output CSV (default <out-dir>/sweep_fc.csv)");
    sweep_fc->add_option("--out-dir", sf.out_dir, "Output directory")
        ->capture_default_str();
    sweep_fc->callback([&] {
        const auto models = ptrs::io::read_fitted_models(sf.models_file);
        const auto fcs = parse_range_d(sf.fcs);
        const std::string out = default_out(sf.out, sf.out_dir, "sweep_fc.csv");
        ensure_parent_dir(out);
        auto f = std::ofstream(out);
        if (!f) throw ptrs::IoError("cannot open for writing: " + out);
        f << "fc_hz,a,b,delta,n_pilots,j_pct,method\n";
        const auto method = parse_method(sf.method);
        for (const double fc : fcs) {
            const auto m = ptrs::io::model_for_fc(models, fc);
            const auto pat = ptrs::wiener::from_spacing(sf.n, sf.delta, sf.p1);
            double j = std::numeric_limits<double>::quiet_NaN();
            std::string used;
            try {
                const auto [rep, mu] = cost_with_fallback(m, pat, method);
                j = rep.j_pct;
                used = mu;
            } catch (const ptrs::Error& e) {
                used = std::string("error(") + e.what() + ")";
            }
            char buf[160];
            std::snprintf(buf, sizeof(buf), "%.9g,%.17g,%.17g,%lld,%lld,%.9g,",
                          fc, m.a, m.b, static_cast<long long>(sf.delta),
                          static_cast<long long>(pat.n_pilots), j);
            f << buf << used << '\n';
        }
        if (!f) throw ptrs::IoError("write failed: " + out);
        f.close();
        write_sidecar(out, "sweep-fc",
                      json{{"models_file", sf.models_file},
                           {"fcs", sf.fcs},
                           {"delta", sf.delta},
                           {"n", sf.n},
                           {"p1", sf.p1},
                           {"method", sf.method}});
        std::cerr << "wrote " << out << " (" << fcs.size() << " rows)\n";
    });

    // ---------------------------------------------------------- sweep-ab
    struct {
        std::string as, bs;
        long long delta = 0, n = 4096, p1 = 1;
        std::string method = "boxed";
        std::string out, out_dir = "./out";
    } sab;
    auto* sweep_ab =
        app.add_subcommand("sweep-ab", "Cost over a grid of model parameters (CSV)");
    sweep_ab->add_option("--as", sab.as, "Decay rates, lo:hi:step or list")->required();
    sweep_ab->add_option("--bs", sab.bs, "Floors, lo:hi:step or list")->required();
    sweep_ab->add_option("--delta", sab.delta, "Pilot spacing")->required();
    sweep_ab->add_option("--n", sab.n, "Block length N")->capture_default_str();
    sweep_ab->add_option("--p1", sab.p1, "First pilot position")->capture_default_str();
    sweep_ab->add_option("--method", sab.method, "numeric | boxed | quasipoly")
        ->check(CLI::IsMember({"numeric", "boxed", "quasipoly"}))
        ->capture_default_str();
    sweep_ab->add_option("--out", sab.out,
                         "Output CSV (default <out-dir>/sweep_ab.csv)");
    sweep_ab->add_option("--out-dir", sab.out_dir, "Output directory")
        ->capture_default_str();
    sweep_ab->callback([&] {
        const auto as = parse_range_d(sab.as);
        const auto bs = parse_range_d(sab.bs);
        const std::string out = default_out(sab.out, sab.out_dir, "sweep_ab.csv");
        ensure_parent_dir(out);
        auto f = std::ofstream(out);
        if (!f) throw ptrs::IoError("cannot open for writing: " + out);
        f << "a,b,delta,n_pilots,j_pct,method\n";
        const auto method = parse_method(sab.method);
        for (const double a : as) {
            for (const double b : bs) {
                double j = std::numeric_limits<double>::quiet_NaN();
                std::string used;
                long long npil = 0;
                try {
                    const ptrs::model::ExpModel m(a, b);
                    const auto pat = ptrs::wiener::from_spacing(sab.n, sab.delta, sab.p1);
                    npil = pat.n_pilots;
                    const auto [rep, mu] = cost_with_fallback(m, pat, method);
                    j = rep.j_pct;
                    used = mu;
                } catch (const ptrs::Error& e) {
                    used = std::string("error(") + e.what() + ")";
                }
                char buf[160];
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%lld,%lld,%.9g,", a, b,
                              static_cast<long long>(sab.delta), npil, j);
                f << buf << used << '\n';
            }
        }
        if (!f) throw ptrs::IoError("write failed: " + out);
        f.close();
        write_sidecar(out, "sweep-ab",
                      json{{"as", sab.as},
                           {"bs", sab.bs},
                           {"delta", sab.delta},
                           {"n", sab.n},
                           {"p1", sab.p1},
                           {"method", sab.method}});
        std::cerr << "wrote " << out << " (" << as.size() * bs.size() << " rows)\n";
    });

    // --------------------------------------------------------- fit-affine
    struct {
        std::string sweep;
        ModelFlags mf;
        std::string deltas;
        long long n = 4096, p1 = 1;
        std::string out, out_dir = "./out";
    } fa;
    auto* fit_affine = app.add_subcommand(
        "fit-affine", "Fit J ~= omega * delta + eta to a spacing sweep");
    fit_affine->add_option("--sweep", fa.sweep, "Sweep CSV from sweep-delta");
    add_model_flags(fit_affine, fa.mf);
    fit_affine->add_option("--deltas", fa.deltas,
                           "Compute the sweep in-process over these spacings");
    fit_affine->add_option("--n", fa.n, "Block length N")->capture_default_str();
    fit_affine->add_option("--p1", fa.p1, "First pilot position")
        ->capture_default_str();
    fit_affine->add_option("--out", fa.out,
                           "Output JSON (default <out-dir>/fit_affine.json)");
    fit_affine->add_option("--out-dir", fa.out_dir, "Output directory")
        ->capture_default_str();
    fit_affine->callback([&] {
        std::vector<ptrs::cost::SweepRow> rows;
        json resolved;
        if (!fa.sweep.empty()) {
            rows = ptrs::io::read_sweep_csv(fa.sweep);
            resolved["sweep_file"] = fa.sweep;
        } else {
            if (fa.deltas.empty())
                throw UsageError("fit-affine needs --sweep or a model plus --deltas");
            const auto m = resolve_model(fa.mf, &resolved);
            rows = ptrs::cost::cost_vs_spacing(m, fa.n, fa.p1,
                                               parse_range_ll(fa.deltas));
            resolved["n"] = fa.n;
            resolved["p1"] = fa.p1;
            resolved["deltas"] = fa.deltas;
        }
        std::vector<std::pair<double, double>> pts;
        for (const auto& r : rows)
            if (std::isfinite(r.j_pct) && r.method.rfind("error", 0) != 0)
                pts.emplace_back(static_cast<double>(r.delta), r.j_pct);
        const auto fitres = ptrs::planner::fit_affine(pts);
        json out_json{{"omega", fitres.omega},
                      {"eta", fitres.eta},
                      {"r2", fitres.r2},
                      {"delta_lo", fitres.delta_lo},
                      {"delta_hi", fitres.delta_hi},
                      {"n_points", pts.size()}};
        const std::string out = default_out(fa.out, fa.out_dir, "fit_affine.json");
        ensure_parent_dir(out);
        ptrs::io::write_json(out, out_json);
        write_sidecar(out, "fit-affine", std::move(resolved));
        std::cout << out_json.dump(2) << "\n";
    });

    // -------------------------------------------------------------- plan
    struct {
        double fc = std::numeric_limits<double>::quiet_NaN();
        double omega = std::numeric_limits<double>::quiet_NaN();
        double eta = std::numeric_limits<double>::quiet_NaN();
        std::string quad_file;
        long long n = 4096, delta0 = 1;
        double max_cost = 0.0;
        bool exact_refine = false;
        ModelFlags mf;
        std::string out, out_dir = "./out";
    } pl;
    auto* plan = app.add_subcommand(
        "plan", "Maximum pilot spacing under a cost ceiling and overhead floor");
    plan->add_option("--fc", pl.fc, "Carrier frequency in Hz");
    plan->add_option("--omega", pl.omega, "Affine slope override (% of N per spacing)");
    plan->add_option("--eta", pl.eta, "Affine intercept override (% of N)");
    plan->add_option("--quad-file", pl.quad_file,
                     "JSON with refit quadratic coefficients "
                     "{omega_coeff, eta_coeff}");
    plan->add_option("--n", pl.n, "Block length N")->capture_default_str();
    plan->add_option("--max-cost", pl.max_cost, "Cost ceiling in % of N")->required();
    plan->add_option("--delta0", pl.delta0, "Minimum spacing (overhead constraint)")
        ->required();
    plan->add_flag("--exact-refine", pl.exact_refine,
                   "Re-check the ceiling with the closed-form cost and back off");
    plan->add_option("--a", pl.mf.a, "Model decay rate (for --exact-refine)");
    plan->add_option("--b", pl.mf.b, "Model floor (for --exact-refine)");
    plan->add_option("--model-file", pl.mf.model_file, "Model JSON (for --exact-refine)");
    plan->add_option("--models-file", pl.mf.models_file,
                     "Per-carrier fitted models JSON")
        ->capture_default_str();
    plan->add_option("--out", pl.out, "Output JSON (default <out-dir>/plan.json)");
    plan->add_option("--out-dir", pl.out_dir, "Output directory")
        ->capture_default_str();
    plan->callback([&] {
        const bool has_omega = !std::isnan(pl.omega), has_eta = !std::isnan(pl.eta);
        if (has_omega != has_eta)
            throw UsageError("--omega and --eta must be given together");
        double omega = pl.omega, eta = pl.eta;
        json resolved;
        if (!has_omega) {
            if (std::isnan(pl.fc))
                throw UsageError("plan needs --fc or explicit --omega/--eta");
            double oc = ptrs::planner::kOmegaQuadCoeff;
            double ec = ptrs::planner::kEtaQuadCoeff;
            if (!pl.quad_file.empty()) {
                const json q = ptrs::io::read_json(pl.quad_file);
                oc = q.at("omega_coeff").get<double>();
                ec = q.at("eta_coeff").get<double>();
                resolved["quad_file"] = pl.quad_file;
            }
            bool in_range = true;
            std::tie(omega, eta) =
                ptrs::planner::omega_eta_of_fc(pl.fc, oc, ec, &in_range);
            if (!in_range)
                std::cerr << "warning: carrier " << pl.fc
                          << " Hz is outside the calibrated 100-300 GHz range\n";
            resolved["omega_coeff"] = oc;
            resolved["eta_coeff"] = ec;
        }
        std::optional<ptrs::model::ExpModel> refine_model;
        if (pl.exact_refine) {
            pl.mf.fc = pl.fc;
            refine_model = resolve_model(pl.mf, &resolved);
        }
        const auto res = ptrs::planner::plan_with(
            omega, eta,
            std::isnan(pl.fc) ? std::nullopt : std::optional<double>(pl.fc), pl.n,
            pl.max_cost, pl.delta0, pl.exact_refine, refine_model);
        const json out_json = ptrs::io::plan_to_json(res);
        const std::string out = default_out(pl.out, pl.out_dir, "plan.json");
        ensure_parent_dir(out);
        ptrs::io::write_json(out, out_json);
        write_sidecar(out, "plan", std::move(resolved));
        std::cout << out_json.dump(2) << "\n";
    });

    // ---------------------------------------------------------- simulate
    struct {
        std::string mode = "surrogate";
        ModelFlags mf;
        std::string psd;
        double fs = 983.04e6;
        long long n = 0, delta = 0, p1 = 1, np = -1;
        std::size_t trials = 10000;
        std::uint64_t seed = 1;
        double snr_db = std::numeric_limits<double>::infinity();
        std::string out, out_dir = "./out";
    } sm;
    auto* simulate = app.add_subcommand(
        "simulate", "Monte Carlo tracking-error measurement against analytic J");
    simulate->add_option("--mode", sm.mode, "surrogate | physical")
        ->check(CLI::IsMember({"surrogate", "physical"}))
        ->capture_default_str();
    add_model_flags(simulate, sm.mf);
    simulate->add_option("--psd", sm.psd, "PSD JSON (physical mode)");
    simulate->add_option("--fs", sm.fs, "Sampling rate in Hz (physical mode)")
        ->capture_default_str();
    simulate->add_option("--n", sm.n, "Block length N")->required();
    simulate->add_option("--delta", sm.delta, "Pilot spacing")->required();
    simulate->add_option("--p1", sm.p1, "First pilot position")->capture_default_str();
    simulate->add_option("--np", sm.np, "Pilot count override");
    simulate->add_option("--trials", sm.trials, "Monte Carlo trials")
        ->capture_default_str();
    simulate->add_option("--seed", sm.seed, "Master seed (PTRS_SEED overrides)")
        ->capture_default_str();
    simulate->add_option("--snr-db", sm.snr_db,
                         "Add noise to data positions (demos only)");
    simulate->add_option("--out", sm.out, "Output JSON (default <out-dir>/sim.json)");
    simulate->add_option("--out-dir", sm.out_dir, "Output directory")
        ->capture_default_str();
    simulate->callback([&] {
        json resolved;
        ptrs::sim::SimScenario sc;
        sc.model = resolve_model(sm.mf, &resolved);
        sc.pattern = make_pattern(sm.n, sm.delta, sm.p1, sm.np);
        sc.mode = sm.mode == "surrogate" ? ptrs::sim::Mode::surrogate
                                         : ptrs::sim::Mode::physical;
        if (sc.mode == ptrs::sim::Mode::physical) {
            if (sm.psd.empty())
                throw UsageError("physical mode needs --psd (and --fc, --fs)");
            if (std::isnan(sm.mf.fc))
                throw UsageError("physical mode needs --fc for the PSD carrier");
            sc.psd = ptrs::io::read_psd_json(sm.psd);
            sc.fc_hz = sm.mf.fc;
            sc.fs_hz = sm.fs;
            resolved["psd_file"] = sm.psd;
            resolved["fs_hz"] = sm.fs;
        }
        sc.trials = sm.trials;
        sc.seed = resolve_seed(sm.seed);
        sc.snr_db = sm.snr_db;
        const auto res = ptrs::sim::run(sc);
        const json out_json = ptrs::io::sim_to_json(res);
        const std::string out = default_out(sm.out, sm.out_dir, "sim.json");
        ensure_parent_dir(out);
        ptrs::io::write_json(out, out_json);
        resolved["pattern"] = json{{"n_total", sc.pattern.n_total},
                                   {"p1", sc.pattern.p1},
                                   {"delta", sc.pattern.delta},
                                   {"n_pilots", sc.pattern.n_pilots}};
        resolved["trials"] = sc.trials;
        resolved["seed"] = sc.seed;
        resolved["mode"] = sm.mode;
        write_sidecar(out, "simulate", std::move(resolved));
        std::cout << out_json.dump(2) << "\n";
    });

    // ----------------------------------------------------------- run it
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        suggest_unknown(app, argc, argv);
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ptrs::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

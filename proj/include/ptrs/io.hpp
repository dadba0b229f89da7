/**
 * @file io.hpp
 * @brief File formats: phase-trace binaries, CSV tables, and JSON documents
 *        for models, PSDs, plans, and simulation results.
 *
 * Binary formats (little-endian, fixed-width):
 *  - trace:  "PNTR" | u32 version=1 | f64 fs_hz | u64 n | n x f64 phase
 *  - weights: "PTWM" | u32 version=1 | u64 n_total | u64 n_pilots | row-major f64
 *
 * CSV formats:
 *  - trace:    header "index,phase", 1-based index, %.17g
 *  - autocorr: header "lag,gamma", lag from 0, %.17g
 *  - weights:  header "n,j,w" triplets, 1-based, %.17g
 *  - sweep:    header "delta,n_pilots,j_pct,method", %.9g
 *
 * All JSON I/O goes through nlohmann::json; optional values serialize as
 * null (e.g. a PSD with no flat level at all, meaning "no phase noise").
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptrs/chain_sim.hpp"
#include "ptrs/cost.hpp"
#include "ptrs/error.hpp"
#include "ptrs/exp_model.hpp"
#include "ptrs/pilot_pattern.hpp"
#include "ptrs/planner.hpp"
#include "ptrs/psd.hpp"
#include "ptrs/wiener.hpp"

namespace ptrs::io {

using nlohmann::json;

namespace detail {

inline std::ofstream open_out(const std::string& path, bool binary) {
    std::ofstream f(path, binary ? std::ios::binary | std::ios::out : std::ios::out);
    if (!f) throw IoError("cannot open for writing: " + path);
    return f;
}

inline std::ifstream open_in(const std::string& path, bool binary) {
    std::ifstream f(path, binary ? std::ios::binary | std::ios::in : std::ios::in);
    if (!f) throw IoError("cannot open for reading: " + path);
    return f;
}

template <typename T>
void put(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& f, const std::string& path) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) throw IoError("truncated file: " + path);
    return v;
}

inline std::string fmt(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

}  // namespace detail

// ---------------------------------------------------------------- traces

inline void write_trace_bin(const std::string& path, double fs_hz,
                            const std::vector<double>& phase) {
    auto f = detail::open_out(path, true);
    f.write("PNTR", 4);
    detail::put(f, std::uint32_t{1});
    detail::put(f, fs_hz);
    detail::put(f, static_cast<std::uint64_t>(phase.size()));
    f.write(reinterpret_cast<const char*>(phase.data()),
            static_cast<std::streamsize>(phase.size() * sizeof(double)));
    if (!f) throw IoError("write failed: " + path);
}

struct TraceFile {
    double fs_hz = 0.0;
    std::vector<double> phase;
};

inline TraceFile read_trace_bin(const std::string& path) {
    auto f = detail::open_in(path, true);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "PNTR", 4) != 0)
        throw IoError("not a phase-trace file (bad magic): " + path);
    const auto version = detail::get<std::uint32_t>(f, path);
    if (version != 1)
        throw IoError("unsupported trace version " + std::to_string(version) +
                      ": " + path);
    TraceFile t;
    t.fs_hz = detail::get<double>(f, path);
    const auto n = detail::get<std::uint64_t>(f, path);
    t.phase.resize(n);
    f.read(reinterpret_cast<char*>(t.phase.data()),
           static_cast<std::streamsize>(n * sizeof(double)));
    if (!f) throw IoError("truncated file: " + path);
    return t;
}

inline void write_trace_csv(const std::string& path, const std::vector<double>& phase) {
    auto f = detail::open_out(path, false);
    f << "index,phase\n";
    for (std::size_t i = 0; i < phase.size(); ++i)
        f << (i + 1) << ',' << detail::fmt(phase[i]) << '\n';
    if (!f) throw IoError("write failed: " + path);
}

inline std::vector<double> read_trace_csv(const std::string& path) {
    auto f = detail::open_in(path, false);
    std::string line;
    if (!std::getline(f, line) || line.rfind("index,phase", 0) != 0)
        throw IoError("not a trace CSV (bad header): " + path);
    std::vector<double> phase;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw IoError("malformed row in " + path + ": " + line);
        phase.push_back(std::stod(line.substr(comma + 1)));
    }
    if (phase.empty()) throw IoError("empty trace CSV: " + path);
    return phase;
}

/// Reads either trace format, sniffing the binary magic first.
inline std::vector<double> read_trace_any(const std::string& path) {
    {
        auto f = detail::open_in(path, true);
        char magic[4] = {0, 0, 0, 0};
        f.read(magic, 4);
        if (f && std::memcmp(magic, "PNTR", 4) == 0) return read_trace_bin(path).phase;
    }
    return read_trace_csv(path);
}

// ------------------------------------------------------------- autocorr

inline void write_autocorr_csv(const std::string& path,
                               const std::vector<double>& gamma) {
    auto f = detail::open_out(path, false);
    f << "lag,gamma\n";
    for (std::size_t j = 0; j < gamma.size(); ++j)
        f << j << ',' << detail::fmt(gamma[j]) << '\n';
    if (!f) throw IoError("write failed: " + path);
}

inline std::vector<double> read_autocorr_csv(const std::string& path) {
    auto f = detail::open_in(path, false);
    std::string line;
    if (!std::getline(f, line) || line.rfind("lag,gamma", 0) != 0)
        throw IoError("not an autocorrelation CSV (bad header): " + path);
    std::vector<double> gamma;
    std::size_t expect = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw IoError("malformed row in " + path + ": " + line);
        const auto lag = std::stoull(line.substr(0, comma));
        if (lag != expect)
            throw IoError("non-contiguous lags in " + path + " (expected " +
                          std::to_string(expect) + ", got " + std::to_string(lag) + ")");
        gamma.push_back(std::stod(line.substr(comma + 1)));
        ++expect;
    }
    if (gamma.empty()) throw IoError("empty autocorrelation CSV: " + path);
    return gamma;
}

// ---------------------------------------------------------------- model

inline json model_to_json(const model::ExpModel& m) {
    json j;
    j["a"] = m.a;
    j["b"] = m.b;
    j["fc_hz"] = m.fc_hz ? json(*m.fc_hz) : json(nullptr);
    j["fit_mse"] = m.fit_mse ? json(*m.fit_mse) : json(nullptr);
    return j;
}

inline model::ExpModel model_from_json(const json& j) {
    if (!j.contains("a") || !j.contains("b"))
        throw IoError("model JSON must contain \"a\" and \"b\"");
    std::optional<double> fc, mse;
    if (j.contains("fc_hz") && !j["fc_hz"].is_null()) fc = j["fc_hz"].get<double>();
    if (j.contains("fit_mse") && !j["fit_mse"].is_null())
        mse = j["fit_mse"].get<double>();
    return model::ExpModel(j["a"].get<double>(), j["b"].get<double>(), fc, mse);
}

inline void write_model_json(const std::string& path, const model::ExpModel& m) {
    auto f = detail::open_out(path, false);
    f << model_to_json(m).dump(2) << '\n';
    if (!f) throw IoError("write failed: " + path);
}

inline model::ExpModel read_model_json(const std::string& path) {
    auto f = detail::open_in(path, false);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw IoError("bad JSON in " + path + ": " + e.what());
    }
    return model_from_json(j);
}

// ------------------------------------------------------------------ PSD

inline noise::PsdSpec psd_from_json(const json& j) {
    noise::PsdSpec spec;
    if (!j.contains("ref_carrier_hz"))
        throw IoError("PSD JSON must contain \"ref_carrier_hz\"");
    spec.ref_carrier_hz = j["ref_carrier_hz"].get<double>();
    if (j.contains("psd0_db") && !j["psd0_db"].is_null())
        spec.psd0_db = j["psd0_db"].get<double>();
    else
        spec.psd0_db = -std::numeric_limits<double>::infinity();
    auto read_terms = [&](const char* key, std::vector<noise::CornerTerm>& out) {
        if (!j.contains(key)) return;
        for (const auto& t : j[key]) {
            noise::CornerTerm term;
            term.corner_hz = t.at("corner_hz").get<double>();
            term.order = t.contains("order") ? t["order"].get<double>() : 1.0;
            out.push_back(term);
        }
    };
    read_terms("poles", spec.poles);
    read_terms("zeros", spec.zeros);
    spec.validate();
    return spec;
}

inline json psd_to_json(const noise::PsdSpec& spec) {
    json j;
    j["ref_carrier_hz"] = spec.ref_carrier_hz;
    j["psd0_db"] = spec.is_silent() ? json(nullptr) : json(spec.psd0_db);
    j["poles"] = json::array();
    for (const auto& t : spec.poles)
        j["poles"].push_back({{"corner_hz", t.corner_hz}, {"order", t.order}});
    j["zeros"] = json::array();
    for (const auto& t : spec.zeros)
        j["zeros"].push_back({{"corner_hz", t.corner_hz}, {"order", t.order}});
    return j;
}

inline noise::PsdSpec read_psd_json(const std::string& path) {
    auto f = detail::open_in(path, false);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw IoError("bad JSON in " + path + ": " + e.what());
    }
    try {
        return psd_from_json(j);
    } catch (const json::exception& e) {
        throw IoError("bad PSD JSON in " + path + ": " + e.what());
    }
}

inline void write_psd_json(const std::string& path, const noise::PsdSpec& spec) {
    auto f = detail::open_out(path, false);
    f << psd_to_json(spec).dump(2) << '\n';
    if (!f) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------- fitted models

/// Per-carrier fitted models, sorted by carrier, for interpolation in fc.
inline std::vector<model::ExpModel> read_fitted_models(const std::string& path) {
    auto f = detail::open_in(path, false);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw IoError("bad JSON in " + path + ": " + e.what());
    }
    if (!j.contains("models") || !j["models"].is_array() || j["models"].empty())
        throw IoError("fitted-models JSON needs a non-empty \"models\" array: " + path);
    std::vector<model::ExpModel> models;
    for (const auto& mj : j["models"]) {
        model::ExpModel m = model_from_json(mj);
        if (!m.fc_hz)
            throw IoError("every fitted model needs an \"fc_hz\": " + path);
        models.push_back(m);
    }
    std::sort(models.begin(), models.end(),
              [](const model::ExpModel& x, const model::ExpModel& y) {
                  return *x.fc_hz < *y.fc_hz;
              });
    for (std::size_t i = 1; i < models.size(); ++i)
        if (*models[i].fc_hz == *models[i - 1].fc_hz)
            throw IoError("duplicate fc_hz in fitted models: " + path);
    return models;
}

inline void write_fitted_models(const std::string& path,
                                const std::vector<model::ExpModel>& models) {
    json j;
    j["models"] = json::array();
    for (const auto& m : models) j["models"].push_back(model_to_json(m));
    auto f = detail::open_out(path, false);
    f << j.dump(2) << '\n';
    if (!f) throw IoError("write failed: " + path);
}

/// Model at an arbitrary carrier by linear interpolation of (a, b) between
/// the bracketing fitted carriers. Out-of-range carriers are an error; the
/// quadratic affine-parameter model is the extrapolation tool, not this.
inline model::ExpModel model_for_fc(const std::vector<model::ExpModel>& models,
                                    double fc_hz) {
    if (models.empty()) throw DomainError("model_for_fc: no fitted models");
    if (fc_hz < *models.front().fc_hz || fc_hz > *models.back().fc_hz)
        throw DomainError("model_for_fc: carrier " + std::to_string(fc_hz) +
                          " outside fitted range [" +
                          std::to_string(*models.front().fc_hz) + ", " +
                          std::to_string(*models.back().fc_hz) + "]");
    for (std::size_t i = 0; i + 1 < models.size(); ++i) {
        const double lo = *models[i].fc_hz, hi = *models[i + 1].fc_hz;
        if (fc_hz <= hi) {
            const double t = hi == lo ? 0.0 : (fc_hz - lo) / (hi - lo);
            return model::ExpModel(
                models[i].a + t * (models[i + 1].a - models[i].a),
                models[i].b + t * (models[i + 1].b - models[i].b), fc_hz);
        }
    }
    return model::ExpModel(models.back().a, models.back().b, fc_hz);
}

// ---------------------------------------------------------------- weights

inline void write_coeffs_csv(const std::string& path,
                             const wiener::WienerCoefficients& coeffs) {
    auto f = detail::open_out(path, false);
    f << "n,j,w\n";
    const auto& w = coeffs.weights;
    for (std::size_t i = 0; i < w.rows; ++i)
        for (std::size_t j = 0; j < w.cols; ++j)
            if (w.at(i, j) != 0.0)
                f << (i + 1) << ',' << (j + 1) << ',' << detail::fmt(w.at(i, j))
                  << '\n';
    if (!f) throw IoError("write failed: " + path);
}

inline void write_coeffs_bin(const std::string& path,
                             const wiener::WienerCoefficients& coeffs) {
    auto f = detail::open_out(path, true);
    f.write("PTWM", 4);
    detail::put(f, std::uint32_t{1});
    detail::put(f, static_cast<std::uint64_t>(coeffs.weights.rows));
    detail::put(f, static_cast<std::uint64_t>(coeffs.weights.cols));
    f.write(reinterpret_cast<const char*>(coeffs.weights.data.data()),
            static_cast<std::streamsize>(coeffs.weights.data.size() * sizeof(double)));
    if (!f) throw IoError("write failed: " + path);
}

inline wiener::DenseMatrix read_coeffs_bin(const std::string& path) {
    auto f = detail::open_in(path, true);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "PTWM", 4) != 0)
        throw IoError("not a weights file (bad magic): " + path);
    const auto version = detail::get<std::uint32_t>(f, path);
    if (version != 1)
        throw IoError("unsupported weights version " + std::to_string(version) +
                      ": " + path);
    const auto rows = detail::get<std::uint64_t>(f, path);
    const auto cols = detail::get<std::uint64_t>(f, path);
    wiener::DenseMatrix m(static_cast<std::size_t>(rows),
                          static_cast<std::size_t>(cols));
    f.read(reinterpret_cast<char*>(m.data.data()),
           static_cast<std::streamsize>(m.data.size() * sizeof(double)));
    if (!f) throw IoError("truncated file: " + path);
    return m;
}

// ----------------------------------------------------------------- sweeps

inline void write_sweep_csv(const std::string& path,
                            const std::vector<cost::SweepRow>& rows) {
    auto f = detail::open_out(path, false);
    f << "delta,n_pilots,j_pct,method\n";
    for (const auto& r : rows)
        f << r.delta << ',' << r.n_pilots << ',' << detail::fmt(r.j_pct, "%.9g")
          << ',' << r.method << '\n';
    if (!f) throw IoError("write failed: " + path);
}

inline std::vector<cost::SweepRow> read_sweep_csv(const std::string& path) {
    auto f = detail::open_in(path, false);
    std::string line;
    if (!std::getline(f, line) || line.rfind("delta,n_pilots,j_pct,method", 0) != 0)
        throw IoError("not a sweep CSV (bad header): " + path);
    std::vector<cost::SweepRow> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        cost::SweepRow r;
        if (!std::getline(ss, field, ',')) throw IoError("malformed row: " + line);
        r.delta = std::stoll(field);
        if (!std::getline(ss, field, ',')) throw IoError("malformed row: " + line);
        r.n_pilots = std::stoll(field);
        if (!std::getline(ss, field, ',')) throw IoError("malformed row: " + line);
        r.j_pct = std::stod(field);
        std::getline(ss, r.method);
        rows.push_back(r);
    }
    if (rows.empty()) throw IoError("empty sweep CSV: " + path);
    return rows;
}

// ------------------------------------------------------------- plan / sim

inline json plan_to_json(const planner::PlanResult& p) {
    json j;
    j["fc_hz"] = p.fc_hz ? json(*p.fc_hz) : json(nullptr);
    j["n_total"] = p.n_total;
    j["max_cost_pct"] = p.max_cost_pct;
    j["delta0"] = p.delta0;
    j["omega"] = p.omega;
    j["eta"] = p.eta;
    j["j_at_delta0_pct"] = p.j_at_delta0_pct;
    j["delta_pf"] = p.delta_pf;
    j["n_pilots"] = p.n_pilots;
    j["overhead_pct"] = std::isfinite(p.overhead_pct) ? json(p.overhead_pct) : json(nullptr);
    j["feasible"] = p.feasible;
    j["method"] = p.method;
    if (!p.note.empty()) j["note"] = p.note;
    return j;
}

inline json sim_to_json(const sim::SimResult& r) {
    json j;
    j["empirical_j_pct"] = r.empirical_j_pct;
    j["stderr_pct"] = r.stderr_pct;
    j["analytic_j_pct"] = r.analytic_j_pct;
    j["z_score"] = r.z_score;
    j["mode"] = sim::mode_name(r.mode);
    j["trials"] = r.trials;
    j["seed"] = r.seed;
    return j;
}

inline json cost_to_json(const cost::CostReport& r) {
    json j;
    j["j_abs"] = r.j_abs;
    j["j_pct"] = r.j_pct;
    j["method"] = cost::method_name(r.method);
    if (!r.terms.empty()) {
        json t;
        for (const auto& [k, v] : r.terms) t[k] = v;
        j["terms"] = t;
    }
    return j;
}

inline void write_json(const std::string& path, const json& j) {
    auto f = detail::open_out(path, false);
    f << j.dump(2) << '\n';
    if (!f) throw IoError("write failed: " + path);
}

inline json read_json(const std::string& path) {
    auto f = detail::open_in(path, false);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw IoError("bad JSON in " + path + ": " + e.what());
    }
    return j;
}

}  // namespace ptrs::io

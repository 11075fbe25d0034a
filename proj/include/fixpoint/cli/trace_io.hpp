#pragma once

// Trace files. Each run writes
//   <stem>.csv   header comments, then n,residual,stepNorm,distFromStart,cutCount
//   <stem>.json  sidecar: x0, outcome and, for d <= 20, every x_n and T_n x_n
// Numbers are written in shortest round-trip form so a trace re-reads to the
// same doubles.

#include "fixpoint/algorithms.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fixpoint::cli {

inline constexpr Eigen::Index kMaxSidecarDim = 20;

inline nlohmann::json to_json(const Vector& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline Vector vector_from_json(const nlohmann::json& a) {
    Vector v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
}

inline Outcome::Kind outcome_kind_from(const std::string& s) {
    if (s == "converged") return Outcome::Kind::Converged;
    if (s == "terminated") return Outcome::Kind::Terminated;
    if (s == "divergent") return Outcome::Kind::Divergent;
    if (s == "max_iter") return Outcome::Kind::MaxIterReached;
    throw std::runtime_error("unknown outcome '" + s + "'");
}

inline std::string trace_csv(const IterationTrace& t, const std::optional<std::string>& timestamp) {
    std::string out = "# fixpoint trace v1\n";
    out += "# algorithm: " + t.algorithm + "\n";
    if (timestamp) out += "# generated: " + *timestamp + "\n";
    out += "n,residual,stepNorm,distFromStart,cutCount\n";
    for (const auto& s : t.steps) {
        out += fmt::format("{},{},{},{},{}\n", s.n, s.residual,
                           s.step_norm ? fmt::format("{}", *s.step_norm) : std::string(),
                           s.dist_from_start, s.cut_count);
    }
    return out;
}

inline nlohmann::json trace_sidecar(const IterationTrace& t, const std::optional<std::string>& timestamp) {
    nlohmann::json j;
    j["schema"] = 1;
    j["algorithm"] = t.algorithm;
    j["dimension"] = t.x0.size();
    j["x0"] = to_json(t.x0);
    if (timestamp) j["generated"] = *timestamp;
    j["outcome"] = {{"kind", to_string(t.outcome.kind)},
                    {"n", t.outcome.n},
                    {"point", to_json(t.outcome.point)},
                    {"evidence", t.outcome.evidence}};
    const bool vectors = t.x0.size() <= kMaxSidecarDim;
    j["vectors"] = vectors;
    if (vectors) {
        nlohmann::json steps = nlohmann::json::array();
        for (const auto& s : t.steps) steps.push_back({{"x", to_json(s.x)}, {"tx", to_json(s.tx)}});
        j["steps"] = std::move(steps);
    }
    return j;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

/// Writes <dir>/<stem>.csv and <dir>/<stem>.json.
inline void write_trace(const std::filesystem::path& dir, const std::string& stem, const IterationTrace& t,
                        const std::optional<std::string>& timestamp) {
    std::filesystem::create_directories(dir);
    write_text(dir / (stem + ".csv"), trace_csv(t, timestamp));
    write_text(dir / (stem + ".json"), trace_sidecar(t, timestamp).dump(2) + "\n");
}

/// Re-reads a trace pair. Without stored vectors the steps carry empty x/tx.
inline IterationTrace read_trace(const std::filesystem::path& csv_path, const std::filesystem::path& json_path) {
    std::ifstream jin(json_path);
    if (!jin) throw std::runtime_error("cannot read " + json_path.string());
    const nlohmann::json j = nlohmann::json::parse(jin);
    IterationTrace t;
    t.algorithm = j.at("algorithm").get<std::string>();
    t.x0 = vector_from_json(j.at("x0"));
    const auto& o = j.at("outcome");
    t.outcome.kind = outcome_kind_from(o.at("kind").get<std::string>());
    t.outcome.n = o.at("n").get<std::size_t>();
    t.outcome.point = vector_from_json(o.at("point"));
    t.outcome.evidence = o.at("evidence").get<std::string>();

    std::ifstream cin(csv_path);
    if (!cin) throw std::runtime_error("cannot read " + csv_path.string());
    std::string line;
    bool header = false;
    while (std::getline(cin, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != "n,residual,stepNorm,distFromStart,cutCount") {
                throw std::runtime_error(csv_path.string() + ": unexpected header '" + line + "'");
            }
            header = true;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() == 4 && !line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 5) throw std::runtime_error(csv_path.string() + ": malformed row '" + line + "'");
        TraceStep s;
        s.n = std::stoull(f[0]);
        s.residual = std::stod(f[1]);
        if (!f[2].empty()) s.step_norm = std::stod(f[2]);
        s.dist_from_start = std::stod(f[3]);
        s.cut_count = std::stoull(f[4]);
        t.steps.push_back(std::move(s));
    }
    if (j.value("vectors", false)) {
        const auto& steps = j.at("steps");
        if (steps.size() != t.steps.size()) throw std::runtime_error("trace sidecar and CSV disagree on step count");
        for (std::size_t i = 0; i < steps.size(); ++i) {
            t.steps[i].x = vector_from_json(steps[i].at("x"));
            t.steps[i].tx = vector_from_json(steps[i].at("tx"));
        }
    }
    return t;
}

}  // namespace fixpoint::cli

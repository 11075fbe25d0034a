#pragma once

// The three subcommands behind `fixpoint run|verify|compare <config>`.
//
// Exit codes: 0 success, 1 config error or failed precondition,
// 2 invariant or battery violation, 3 a run ended Terminated, Divergent or
// without converging.

#include "fixpoint/algorithms.hpp"
#include "fixpoint/cli/config.hpp"
#include "fixpoint/cli/trace_io.hpp"
#include "fixpoint/verify.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fixpoint::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kViolation = 2, kNotConverged = 3 };

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> max_iter;
    std::optional<std::string> out_dir;
    bool no_timestamps = false;
};

inline void apply_overrides(ExperimentConfig& cfg, const Overrides& o) {
    if (o.seed) cfg.seed = *o.seed;
    if (o.max_iter) {
        if (*o.max_iter < 1) throw ConfigError("--max-iter must be >= 1");
        cfg.run.max_iter = *o.max_iter;
    }
    if (o.out_dir) cfg.output.dir = *o.out_dir;
    if (o.no_timestamps) cfg.output.timestamps = false;
}

inline std::optional<std::string> timestamp(const ExperimentConfig& cfg) {
    if (!cfg.output.timestamps) return std::nullopt;
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return std::string(buf);
}

inline IterationTrace run_algorithm(const Experiment& ex, const std::string& name, const RunConfig& rc) {
    if (name == "haugazeau") return run_haugazeau(ex.problem, rc);
    if (name == "cq") return run_cq(ex.problem, ex.r_family, rc);
    return run_shrinking(ex.problem, rc);
}

inline nlohmann::json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline std::string fixed_set_label(const Experiment& ex) {
    if (ex.fixed_set_empty) return "empty";
    if (!ex.oracle) return "unknown";
    const auto* a = ex.oracle->as_affine();
    return a ? "affine(dim " + std::to_string(a->basis.cols()) + ")" : "explicit";
}

inline nlohmann::json base_report(const Experiment& ex, const std::string& command,
                                  const std::optional<std::string>& stamp) {
    nlohmann::json j;
    j["schema"] = 1;
    j["command"] = command;
    j["name"] = ex.config.name;
    j["seed"] = ex.config.seed;
    j["dimension"] = ex.config.dimension;
    j["fixed_set"] = fixed_set_label(ex);
    j["x0"] = to_json(ex.problem.x0);
    j["x0_projected"] = ex.problem.x0_projected;
    if (stamp) j["generated"] = *stamp;
    return j;
}

inline void write_report(const ExperimentConfig& cfg, const std::string& suffix, const nlohmann::json& j) {
    const std::filesystem::path dir(cfg.output.dir);
    std::filesystem::create_directories(dir);
    write_text(dir / (cfg.name + "." + suffix + ".json"), j.dump(2) + "\n");
}

inline void log_problem(const Experiment& ex) {
    if (ex.problem.x0_projected) spdlog::warn("x0 lies outside C; projected onto C before running");
    spdlog::info("{}: d = {}, C = {}, F = {}", ex.config.name, ex.config.dimension, ex.problem.c.name(),
                 fixed_set_label(ex));
}

// ---------------------------------------------------------------------------
// run

inline int cmd_run(const ExperimentConfig& cfg, std::ostream& out) {
    const Experiment ex = build_experiment(cfg);
    log_problem(ex);
    const auto stamp = timestamp(cfg);
    nlohmann::json report = base_report(ex, "run", stamp);
    report["runs"] = nlohmann::json::array();

    bool violation = false;
    bool unconverged = false;
    out << fmt::format("{:<10} {:<11} {:>7} {:>13} {:>10}\n", "algorithm", "outcome", "n", "error", "invariants");
    for (const auto& name : cfg.algorithms) {
        spdlog::debug("running {}", name);
        const auto t0 = std::chrono::steady_clock::now();
        const IterationTrace trace = run_algorithm(ex, name, cfg.run);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const OutcomeReport rep = classify_outcome(trace, ex.problem.oracle);
        const std::string stem = cfg.name + "." + name;
        write_trace(cfg.output.dir, stem, trace, stamp);
        spdlog::info("{}: {} at n = {} ({}) in {:.3f} s", name, to_string(trace.outcome.kind), trace.outcome.n,
                     trace.outcome.evidence, seconds);
        for (const auto& v : rep.violations) spdlog::error("{}: {}", name, v);

        nlohmann::json r;
        r["algorithm"] = name;
        r["outcome"] = to_string(trace.outcome.kind);
        r["n"] = trace.outcome.n;
        r["evidence"] = trace.outcome.evidence;
        r["point"] = to_json(trace.outcome.point);
        r["error_vs_oracle"] = optional_number(rep.error_vs_oracle);
        r["oracle_distance"] = optional_number(rep.oracle_distance);
        r["sum_squared_steps"] = rep.sum_squared_steps;
        r["sum_squared_residuals"] = rep.sum_squared_residuals;
        r["invariants_ok"] = rep.invariants_ok();
        r["violations"] = rep.violations;
        r["trace"] = {{"csv", stem + ".csv"}, {"sidecar", stem + ".json"}};
        if (!ex.probes.empty() && !trace.steps.empty()) {
            const auto coh = verify::check_nst_on_orbit(trace, ex.probes);
            r["probe_residuals"] = coh.cluster_residuals;
        }
        if (ex.tower && !trace.steps.empty()) {
            r["level_residual_tail_max"] = verify::check_gamma_cascade(trace, *ex.tower).tail_max;
        }
        report["runs"].push_back(std::move(r));

        violation = violation || !rep.invariants_ok();
        unconverged = unconverged || trace.outcome.kind != Outcome::Kind::Converged;
        out << fmt::format("{:<10} {:<11} {:>7} {:>13} {:>10}\n", name, to_string(trace.outcome.kind),
                           trace.outcome.n,
                           rep.error_vs_oracle ? fmt::format("{:.3e}", *rep.error_vs_oracle) : "-",
                           rep.invariants_ok() ? "pass" : "FAIL");
    }
    const int code = violation ? kViolation : unconverged ? kNotConverged : kOk;
    report["exit_code"] = code;
    write_report(cfg, "summary", report);
    return code;
}

// ---------------------------------------------------------------------------
// verify

namespace detail {

struct BatteryRow {
    std::string battery;
    std::string subject;
    std::size_t samples = 0;
    double max_violation = 0.0;
    std::string status;  ///< pass, FAIL or skipped
    std::string note;
};

inline BatteryRow row(const std::string& battery, const std::string& subject, const verify::CheckReport& r) {
    return {battery, subject, r.samples, r.samples ? r.max_violation : 0.0, r.passed ? "pass" : "FAIL", {}};
}

inline std::vector<Vector> fixed_samples(const FixedPointSet& f, Rng& rng, std::size_t count) {
    std::vector<Vector> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(f.project(verify::sample_point(rng, f.dim())));
    return out;
}

}  // namespace detail

inline int cmd_verify(const ExperimentConfig& cfg, std::ostream& out) {
    const auto& vo = cfg.verify;
    const Rng root(cfg.seed);
    std::vector<detail::BatteryRow> rows;
    auto has = [&](const char* b) { return std::find(vo.batteries.begin(), vo.batteries.end(), b) != vo.batteries.end(); };

    // Subjects are the R maps under test; `common` is a fixed set they share.
    struct Subject {
        std::string name;
        Mapping r;
    };
    std::vector<Subject> subjects;
    std::optional<FixedPointSet> common;
    std::vector<Semigroup> semigroups;
    std::optional<Experiment> ex;
    if (vo.target == "zoo") {
        Rng zr = root.split("zoo");
        auto zoo = verify::operator_zoo(vo.zoo_dimension, vo.zoo_fixed_dimension, zr);
        for (const auto& m : zoo.members) subjects.push_back({m.name(), m});
        common = zoo.common;
        Rng sr = root.split("semigroups");
        const Eigen::Index d = vo.zoo_dimension;
        Matrix q = sr.orthogonal(d);
        Vector lam(d);
        for (Eigen::Index i = 0; i < d; ++i) lam[i] = i == 0 ? 0.0 : sr.uniform(0.1, 2.0);
        semigroups.push_back(semigroup_linear_psd(q * lam.asDiagonal() * q.transpose()));
        std::vector<double> rates;
        for (Eigen::Index b = 0; b < d / 2; ++b) rates.push_back(sr.uniform(0.5, 2.0));
        semigroups.push_back(semigroup_rotation(rates, d % 2));
    } else {
        ex.emplace(build_experiment(cfg));
        log_problem(*ex);
        for (std::size_t n = 0; n < vo.members; ++n) {
            subjects.push_back({"R_" + std::to_string(n), ex->r_family.at(n)});
        }
        common = ex->oracle;
        semigroups = ex->semigroups;
    }

    if (vo.batteries.empty()) spdlog::warn("no verification batteries selected");

    if (has("tc_class")) {
        for (std::size_t i = 0; i < subjects.size(); ++i) {
            const auto& s = subjects[i];
            const std::string label = vo.tc_operand == "direct" ? s.name : "halve(" + s.name + ")";
            if (!common) {
                rows.push_back({"tc_class", label, 0, 0.0, "skipped", "no closed-form fixed set"});
                continue;
            }
            Rng r = root.split("tc_class").split(i);
            const Mapping t = vo.tc_operand == "direct" ? s.r : halve(s.r);
            auto rep = verify::check_tc_class(t, detail::fixed_samples(*common, r, 3), vo.trials, r);
            rows.push_back(detail::row("tc_class", label, rep));
        }
    }
    if (has("nonexpansive")) {
        for (std::size_t i = 0; i < subjects.size(); ++i) {
            const auto& s = subjects[i];
            if (!is_nonexpansive(s.r.declared_class())) {
                rows.push_back({"nonexpansive", s.name, 0, 0.0, "skipped", "declared quasi-nonexpansive"});
                continue;
            }
            Rng r = root.split("nonexpansive").split(i);
            rows.push_back(detail::row("nonexpansive", s.name, verify::check_nonexpansive(s.r, vo.trials, r)));
        }
    }
    if (has("halving")) {
        for (std::size_t i = 0; i < subjects.size(); ++i) {
            Rng r = root.split("halving").split(i);
            rows.push_back(detail::row("halving", subjects[i].name,
                                       verify::check_halving_identity(subjects[i].r, vo.trials, r)));
        }
    }
    if (has("lemmas")) {
        if (!common) {
            rows.push_back({"lemmas", "-", 0, 0.0, "skipped", "no closed-form fixed set"});
        } else {
            for (std::size_t i = 0; i < subjects.size(); ++i) {
                for (std::size_t j = 0; j < subjects.size(); ++j) {
                    if (vo.target == "family" && j != (i + 1) % subjects.size()) continue;
                    Rng r = root.split("lemmas").split(i * subjects.size() + j);
                    auto rep = verify::lemma_battery(subjects[i].r, subjects[j].r, *common, vo.betas, vo.trials, r);
                    const std::string subj = "T=" + subjects[i].name + ", S=" + subjects[j].name;
                    rows.push_back(detail::row("lemma1", subj, rep.averaged));
                    rows.push_back(detail::row("lemma2a", subj, rep.composed));
                    if (rep.triangle.samples) rows.push_back(detail::row("lemma2b", subj, rep.triangle));
                }
            }
        }
    }
    if (has("semigroup")) {
        if (semigroups.empty()) rows.push_back({"semigroup", "-", 0, 0.0, "skipped", "no semigroup in the family"});
        for (std::size_t i = 0; i < semigroups.size(); ++i) {
            Rng r = root.split("semigroup").split(i);
            auto rep = verify::check_semigroup_axioms(semigroups[i], vo.trials, r);
            const std::string subj = semigroups[i].name();
            rows.push_back(detail::row("semigroup.identity", subj, rep.identity_at_zero));
            rows.push_back(detail::row("semigroup.composition", subj, rep.composition));
            rows.push_back(detail::row("semigroup.nonexpansive", subj, rep.nonexpansive));
            rows.push_back(detail::row("semigroup.cesaro", subj, rep.cesaro_quadrature));
        }
    }
    if (has("projectors")) {
        Rng r = root.split("projectors");
        auto bf = verify::check_projectors_vs_brute_force(vo.projector_instances, r);
        detail::BatteryRow b{"projectors.brute_force", "built-in sets (gap/h, bound 2)", bf.instances, bf.worst_gap_ratio,
                             bf.passed() ? "pass" : "FAIL", "max violation = worst distance gap / grid spacing"};
        rows.push_back(b);
        auto it = verify::check_polyhedral_vs_kkt(vo.projector_instances, r);
        rows.push_back(detail::row("projectors.dykstra", "two half-spaces", it.dykstra));
        rows.push_back(detail::row("projectors.active_set", "two half-spaces", it.active_set));
    }

    bool failed = false;
    nlohmann::json report;
    report["schema"] = 1;
    report["command"] = "verify";
    report["name"] = cfg.name;
    report["seed"] = cfg.seed;
    report["target"] = vo.target;
    if (auto stamp = timestamp(cfg)) report["generated"] = *stamp;
    report["checks"] = nlohmann::json::array();
    out << fmt::format("{:<24} {:<38} {:>8} {:>13} {}\n", "battery", "subject", "samples", "max_violation", "status");
    for (const auto& rw : rows) {
        failed = failed || rw.status == "FAIL";
        out << fmt::format("{:<24} {:<38} {:>8} {:>13.3e} {}\n", rw.battery, rw.subject, rw.samples,
                           rw.max_violation, rw.status);
        nlohmann::json c = {{"battery", rw.battery}, {"subject", rw.subject},     {"samples", rw.samples},
                            {"max_violation", rw.max_violation}, {"status", rw.status}};
        if (!rw.note.empty()) c["note"] = rw.note;
        report["checks"].push_back(std::move(c));
    }
    const int code = failed ? kViolation : kOk;
    report["exit_code"] = code;
    write_report(cfg, "verify", report);
    return code;
}

// ---------------------------------------------------------------------------
// compare

inline int cmd_compare(const ExperimentConfig& cfg, std::ostream& out) {
    if (cfg.algorithms.size() < 2) {
        throw ConfigError(cfg.source + ": compare needs at least two algorithms, got " +
                          std::to_string(cfg.algorithms.size()));
    }
    const Experiment ex = build_experiment(cfg);
    log_problem(ex);
    const auto stamp = timestamp(cfg);
    const auto& co = cfg.compare;

    std::vector<IterationTrace> traces;
    for (const auto& name : cfg.algorithms) traces.push_back(run_algorithm(ex, name, cfg.run));

    nlohmann::json report = base_report(ex, "compare", stamp);
    report["runs"] = nlohmann::json::array();
    bool violation = false;
    bool unconverged = false;
    std::optional<Vector> pf;
    if (ex.problem.oracle) pf = ex.problem.oracle->project(ex.problem.x0);
    for (const auto& t : traces) {
        const auto rep = classify_outcome(t, ex.problem.oracle);
        violation = violation || !rep.invariants_ok();
        const bool converged = t.outcome.kind == Outcome::Kind::Converged;
        if (co.limits && !converged) unconverged = true;
        report["runs"].push_back({{"algorithm", t.algorithm},
                                  {"outcome", to_string(t.outcome.kind)},
                                  {"n", t.outcome.n},
                                  {"error_vs_oracle", optional_number(rep.error_vs_oracle)},
                                  {"invariants_ok", rep.invariants_ok()},
                                  {"violations", rep.violations}});
    }

    report["pairs"] = nlohmann::json::array();
    out << fmt::format("{:<22} {:>8} {:>16} {:>16} {}\n", "pair", "steps", "max_iterate_dev", "limit_dev", "status");
    for (std::size_t i = 0; i < traces.size(); ++i) {
        for (std::size_t j = i + 1; j < traces.size(); ++j) {
            const auto& a = traces[i];
            const auto& b = traces[j];
            nlohmann::json p;
            p["pair"] = {a.algorithm, b.algorithm};
            bool ok = true;
            const bool iterate_pair =
                ex.problem.c.is_whole_space() &&
                ((a.algorithm == "cq" && b.algorithm == "haugazeau") || (a.algorithm == "haugazeau" && b.algorithm == "cq"));
            std::size_t steps = 0;
            std::optional<double> iterate_dev;
            if (iterate_pair) {
                steps = std::min({a.steps.size(), b.steps.size(), co.steps});
                double dev = 0.0;
                for (std::size_t k = 0; k < steps; ++k) dev = std::max(dev, (a.steps[k].x - b.steps[k].x).norm());
                iterate_dev = dev;
                ok = ok && dev <= co.iterate_tol;
                p["steps"] = steps;
            }
            p["max_iterate_deviation"] = optional_number(iterate_dev);
            std::optional<double> limit_dev;
            if (co.limits) {
                const bool both = a.outcome.kind == Outcome::Kind::Converged && b.outcome.kind == Outcome::Kind::Converged;
                if (both) {
                    limit_dev = (a.outcome.point - b.outcome.point).norm();
                    ok = ok && *limit_dev <= co.limit_tol;
                    if (pf) {
                        const double ea = (a.outcome.point - *pf).norm();
                        const double eb = (b.outcome.point - *pf).norm();
                        p["errors_vs_oracle"] = {ea, eb};
                        ok = ok && ea <= co.limit_tol && eb <= co.limit_tol;
                    }
                }
            }
            p["limit_deviation"] = optional_number(limit_dev);
            p["within_tolerance"] = ok;
            violation = violation || !ok;
            out << fmt::format("{:<22} {:>8} {:>16} {:>16} {}\n", a.algorithm + " vs " + b.algorithm,
                               iterate_pair ? std::to_string(steps) : "-",
                               iterate_dev ? fmt::format("{:.3e}", *iterate_dev) : "-",
                               limit_dev ? fmt::format("{:.3e}", *limit_dev) : "-", ok ? "pass" : "FAIL");
            report["pairs"].push_back(std::move(p));
        }
    }
    const int code = violation ? kViolation : unconverged ? kNotConverged : kOk;
    report["exit_code"] = code;
    write_report(cfg, "compare", report);
    return code;
}

/// Loads the config, applies overrides and runs `command`; every failure is
/// mapped to an exit code.
inline int dispatch(const std::string& command, const std::string& config_path, const Overrides& overrides,
                    std::ostream& out) {
    try {
        ExperimentConfig cfg = load_config(config_path);
        apply_overrides(cfg, overrides);
        if (command == "run") return cmd_run(cfg, out);
        if (command == "verify") return cmd_verify(cfg, out);
        if (command == "compare") return cmd_compare(cfg, out);
        spdlog::error("unknown command '{}'", command);
        return kConfigError;
    } catch (const ConfigError& e) {
        spdlog::error("{}", e.what());
        return kConfigError;
    } catch (const std::exception& e) {
        spdlog::error("{}: {}", config_path, e.what());
        return kConfigError;
    }
}

}  // namespace fixpoint::cli

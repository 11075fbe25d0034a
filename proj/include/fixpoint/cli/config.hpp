#pragma once

// Experiment configuration (JSON, schema 1) and construction of the problem
// it describes.
//
//   {
//     "schema": 1,
//     "name": "h1",
//     "dimension": 5,
//     "seed": 7,
//     "set": {"kind": "whole"},
//     "x0": [1, 2, 3, 4, 5]  |  "random(42)",
//     "family": <family spec>,
//     "algorithms": ["haugazeau", "cq", "shrinking"],
//     "run": {"max_iter": 10000, "residual_tol": 1e-8, ...},
//     "output": {"dir": "out", "timestamps": true},
//     "verify": {"target": "family", "batteries": ["tc_class", ...]},
//     "compare": {"steps": 50, "iterate_tol": 1e-8, "limit_tol": 2e-6}
//   }
//
// Family specs describe the nonexpansive R_n; the drivers iterate with
// T_n = (R_n + Id)/2. Kinds: identity, projection, reflection, constant,
// scale, random_affine, cyclic, semigroup_at_times, cesaro, gamma_tower.

#include "fixpoint/algorithms.hpp"
#include "fixpoint/cli/json_locator.hpp"
#include "fixpoint/operators.hpp"
#include "fixpoint/random.hpp"
#include "fixpoint/verify.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fixpoint::cli {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OutputOptions {
    std::string dir = "out";
    bool timestamps = true;
};

struct VerifyOptions {
    std::string target = "family";     ///< "family" or "zoo"
    std::string tc_operand = "halved"; ///< check halve(R_n) or R_n itself
    std::vector<std::string> batteries;
    std::size_t trials = 1000;
    std::size_t members = 4;           ///< family indices n = 0..members-1 to test
    std::size_t projector_instances = 100;
    std::vector<double> betas = {0.25, 0.5, 0.75};
    Eigen::Index zoo_dimension = 4;
    Eigen::Index zoo_fixed_dimension = 1;
};

struct CompareOptions {
    std::size_t steps = 50;
    double iterate_tol = 1e-8;
    double limit_tol = 2e-6;
    bool limits = true;  ///< require converged limits and compare them
};

struct ExperimentConfig {
    std::string source;
    std::string name = "experiment";
    std::uint64_t seed = 0;
    Eigen::Index dimension = 0;
    json set;
    json x0;
    json family;
    std::vector<std::string> algorithms{"haugazeau", "cq", "shrinking"};
    RunConfig run;
    OutputOptions output;
    VerifyOptions verify;
    CompareOptions compare;
    JsonLocator locator;

    [[noreturn]] void fail(const std::string& pointer, const std::string& msg) const {
        const std::size_t line = locator.line_of(pointer);
        std::ostringstream os;
        os << source;
        if (line) os << ':' << line;
        os << ": " << (pointer.empty() ? "/" : pointer) << ": " << msg;
        throw ConfigError(os.str());
    }
};

namespace detail {

inline const json& require(const ExperimentConfig& cfg, const json& obj, const std::string& ptr,
                           const char* key) {
    if (!obj.is_object() || !obj.contains(key)) cfg.fail(ptr, std::string("missing field '") + key + "'");
    return obj.at(key);
}

inline double number(const ExperimentConfig& cfg, const json& v, const std::string& ptr) {
    if (!v.is_number()) cfg.fail(ptr, "expected a number");
    return v.get<double>();
}

inline std::size_t count(const ExperimentConfig& cfg, const json& v, const std::string& ptr) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        cfg.fail(ptr, "expected a non-negative integer");
    }
    return v.get<std::size_t>();
}

inline Vector vector(const ExperimentConfig& cfg, const json& v, const std::string& ptr,
                     Eigen::Index dim) {
    if (!v.is_array()) cfg.fail(ptr, "expected an array of numbers");
    if (static_cast<Eigen::Index>(v.size()) != dim) {
        cfg.fail(ptr, "expected " + std::to_string(dim) + " entries, got " + std::to_string(v.size()));
    }
    Vector out(dim);
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = number(cfg, v[i], ptr + "/" + std::to_string(i));
    }
    if (!out.allFinite()) cfg.fail(ptr, "non-finite entry");
    return out;
}

/// A list of columns, each a d-vector.
inline Matrix columns(const ExperimentConfig& cfg, const json& v, const std::string& ptr, Eigen::Index dim) {
    if (!v.is_array()) cfg.fail(ptr, "expected a list of column vectors");
    Matrix m(dim, static_cast<Eigen::Index>(v.size()));
    for (std::size_t j = 0; j < v.size(); ++j) {
        m.col(static_cast<Eigen::Index>(j)) = vector(cfg, v[j], ptr + "/" + std::to_string(j), dim);
    }
    return m;
}

inline Matrix square_matrix(const ExperimentConfig& cfg, const json& v, const std::string& ptr,
                            Eigen::Index dim) {
    if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != dim) {
        cfg.fail(ptr, "expected " + std::to_string(dim) + " rows");
    }
    Matrix m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        m.row(i) = vector(cfg, v[static_cast<std::size_t>(i)], ptr + "/" + std::to_string(i), dim).transpose();
    }
    return m;
}

inline void require_orthonormal(const ExperimentConfig& cfg, const Matrix& b, const std::string& ptr) {
    const Matrix g = b.transpose() * b;
    if ((g - Matrix::Identity(b.cols(), b.cols())).norm() > 1e-9) cfg.fail(ptr, "basis columns must be orthonormal");
}

inline std::string kind_of(const ExperimentConfig& cfg, const json& spec, const std::string& ptr) {
    const json& k = require(cfg, spec, ptr, "kind");
    if (!k.is_string()) cfg.fail(ptr + "/kind", "expected a string");
    return k.get<std::string>();
}

inline void check_keys(const ExperimentConfig& cfg, const json& obj, const std::string& ptr,
                       std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) cfg.fail(ptr, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) cfg.fail(ptr + "/" + it.key(), "unknown field '" + it.key() + "'");
    }
}

}  // namespace detail

/// Parses and validates the top-level fields. Family and set specs are kept
/// as JSON and checked by build_experiment.
inline ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    ExperimentConfig cfg;
    cfg.source = source;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(source + ": " + e.what());
    }
    cfg.locator = JsonLocator(text);
    using namespace detail;
    check_keys(cfg, root, "", {"schema", "name", "dimension", "seed", "set", "x0", "family",
                               "algorithms", "run", "output", "verify", "compare"});
    const json& schema = require(cfg, root, "", "schema");
    if (!schema.is_number_integer() || schema.get<int>() != 1) cfg.fail("/schema", "unsupported schema (expected 1)");
    if (root.contains("name")) {
        if (!root["name"].is_string() || root["name"].get<std::string>().empty()) {
            cfg.fail("/name", "expected a non-empty string");
        }
        cfg.name = root["name"].get<std::string>();
        if (cfg.name.find_first_of("/\\") != std::string::npos) cfg.fail("/name", "name must not contain path separators");
    }
    const std::size_t d = count(cfg, require(cfg, root, "", "dimension"), "/dimension");
    if (d < 1) cfg.fail("/dimension", "dimension must be >= 1");
    cfg.dimension = static_cast<Eigen::Index>(d);
    if (root.contains("seed")) cfg.seed = count(cfg, root["seed"], "/seed");
    cfg.set = root.value("set", json{{"kind", "whole"}});
    cfg.x0 = require(cfg, root, "", "x0");
    cfg.family = require(cfg, root, "", "family");

    if (root.contains("algorithms")) {
        const json& a = root["algorithms"];
        if (!a.is_array()) cfg.fail("/algorithms", "expected a list");
        cfg.algorithms.clear();
        std::set<std::string> seen;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const std::string ptr = "/algorithms/" + std::to_string(i);
            if (!a[i].is_string()) cfg.fail(ptr, "expected a string");
            const auto name = a[i].get<std::string>();
            if (name != "haugazeau" && name != "cq" && name != "shrinking") {
                cfg.fail(ptr, "unknown algorithm '" + name + "' (haugazeau, cq, shrinking)");
            }
            if (!seen.insert(name).second) cfg.fail(ptr, "algorithm listed twice");
            cfg.algorithms.push_back(name);
        }
    }

    if (root.contains("run")) {
        const json& r = root["run"];
        check_keys(cfg, r, "/run", {"max_iter", "residual_tol", "step_tol", "norm_cap", "proj_tol",
                                    "proj_max_inner", "converge_window"});
        if (r.contains("max_iter")) cfg.run.max_iter = count(cfg, r["max_iter"], "/run/max_iter");
        if (r.contains("residual_tol")) cfg.run.residual_tol = number(cfg, r["residual_tol"], "/run/residual_tol");
        if (r.contains("step_tol")) cfg.run.step_tol = number(cfg, r["step_tol"], "/run/step_tol");
        if (r.contains("norm_cap")) cfg.run.norm_cap = number(cfg, r["norm_cap"], "/run/norm_cap");
        if (r.contains("proj_tol")) cfg.run.proj_tol = number(cfg, r["proj_tol"], "/run/proj_tol");
        if (r.contains("proj_max_inner")) cfg.run.proj_max_inner = count(cfg, r["proj_max_inner"], "/run/proj_max_inner");
        if (r.contains("converge_window")) cfg.run.converge_window = count(cfg, r["converge_window"], "/run/converge_window");
        try {
            cfg.run.validate();
        } catch (const std::invalid_argument& e) {
            cfg.fail("/run", e.what());
        }
    }

    if (root.contains("output")) {
        const json& o = root["output"];
        check_keys(cfg, o, "/output", {"dir", "timestamps"});
        if (o.contains("dir")) {
            if (!o["dir"].is_string()) cfg.fail("/output/dir", "expected a string");
            cfg.output.dir = o["dir"].get<std::string>();
        }
        if (o.contains("timestamps")) {
            if (!o["timestamps"].is_boolean()) cfg.fail("/output/timestamps", "expected true or false");
            cfg.output.timestamps = o["timestamps"].get<bool>();
        }
    }

    if (root.contains("verify")) {
        const json& v = root["verify"];
        check_keys(cfg, v, "/verify", {"target", "tc_operand", "batteries", "trials", "members",
                                       "projector_instances", "betas", "zoo_dimension",
                                       "zoo_fixed_dimension"});
        if (v.contains("target")) {
            cfg.verify.target = v["target"].is_string() ? v["target"].get<std::string>() : "";
            if (cfg.verify.target != "family" && cfg.verify.target != "zoo") {
                cfg.fail("/verify/target", "expected \"family\" or \"zoo\"");
            }
        }
        if (v.contains("tc_operand")) {
            cfg.verify.tc_operand = v["tc_operand"].is_string() ? v["tc_operand"].get<std::string>() : "";
            if (cfg.verify.tc_operand != "halved" && cfg.verify.tc_operand != "direct") {
                cfg.fail("/verify/tc_operand", "expected \"halved\" or \"direct\"");
            }
        }
        if (v.contains("batteries")) {
            const json& b = v["batteries"];
            if (!b.is_array()) cfg.fail("/verify/batteries", "expected a list");
            static const std::set<std::string> known = {"tc_class", "nonexpansive", "halving",
                                                        "lemmas", "semigroup", "projectors"};
            for (std::size_t i = 0; i < b.size(); ++i) {
                const std::string ptr = "/verify/batteries/" + std::to_string(i);
                if (!b[i].is_string() || !known.count(b[i].get<std::string>())) {
                    cfg.fail(ptr, "unknown battery (tc_class, nonexpansive, halving, lemmas, semigroup, projectors)");
                }
                cfg.verify.batteries.push_back(b[i].get<std::string>());
            }
        }
        if (v.contains("trials")) cfg.verify.trials = count(cfg, v["trials"], "/verify/trials");
        if (v.contains("members")) cfg.verify.members = count(cfg, v["members"], "/verify/members");
        if (v.contains("projector_instances")) {
            cfg.verify.projector_instances = count(cfg, v["projector_instances"], "/verify/projector_instances");
        }
        if (v.contains("betas")) {
            const json& b = v["betas"];
            if (!b.is_array() || b.empty()) cfg.fail("/verify/betas", "expected a non-empty list");
            cfg.verify.betas.clear();
            for (std::size_t i = 0; i < b.size(); ++i) {
                const double beta = number(cfg, b[i], "/verify/betas/" + std::to_string(i));
                if (!(beta > 0.0 && beta < 1.0)) cfg.fail("/verify/betas/" + std::to_string(i), "beta must lie in (0, 1)");
                cfg.verify.betas.push_back(beta);
            }
        }
        if (v.contains("zoo_dimension")) {
            cfg.verify.zoo_dimension = static_cast<Eigen::Index>(count(cfg, v["zoo_dimension"], "/verify/zoo_dimension"));
        }
        if (v.contains("zoo_fixed_dimension")) {
            cfg.verify.zoo_fixed_dimension =
                static_cast<Eigen::Index>(count(cfg, v["zoo_fixed_dimension"], "/verify/zoo_fixed_dimension"));
        }
        if (cfg.verify.zoo_dimension < 2 || cfg.verify.zoo_fixed_dimension >= cfg.verify.zoo_dimension) {
            cfg.fail("/verify", "zoo needs dimension >= 2 and fixed dimension below it");
        }
    }

    if (root.contains("compare")) {
        const json& c = root["compare"];
        check_keys(cfg, c, "/compare", {"steps", "iterate_tol", "limit_tol", "limits"});
        if (c.contains("steps")) cfg.compare.steps = count(cfg, c["steps"], "/compare/steps");
        if (c.contains("iterate_tol")) cfg.compare.iterate_tol = number(cfg, c["iterate_tol"], "/compare/iterate_tol");
        if (c.contains("limit_tol")) cfg.compare.limit_tol = number(cfg, c["limit_tol"], "/compare/limit_tol");
        if (c.contains("limits")) {
            if (!c["limits"].is_boolean()) cfg.fail("/compare/limits", "expected true or false");
            cfg.compare.limits = c["limits"].get<bool>();
        }
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Construction

/// Everything a command needs, built from one config.
struct Experiment {
    ExperimentConfig config;
    Problem problem;
    OperatorFamily r_family;  ///< the nonexpansive R_n
    std::optional<FixedPointSet> oracle;
    bool fixed_set_empty = false;     ///< the leaf fixed sets do not intersect
    std::optional<GammaTower> tower;  ///< top-level tower, if the family is one
    std::vector<Semigroup> semigroups;
    std::vector<Mapping> probes;      ///< leaf maps at n = 0, for coherence checks
};

namespace detail {

struct Node {
    OperatorFamily family;
    std::vector<FixedPointSet> fixed;  ///< leaf fixed sets whose intersection is F
    bool fixed_known = true;
};

class FamilyBuilder {
public:
    FamilyBuilder(const ExperimentConfig& cfg, Experiment& out) : cfg_(cfg), out_(out) {}

    Node build(const json& spec, const std::string& ptr) {
        const Eigen::Index d = cfg_.dimension;
        const std::string kind = kind_of(cfg_, spec, ptr);
        try {
            if (kind == "identity") {
                check_keys(cfg_, spec, ptr, {"kind"});
                return leaf(maps::identity(d));
            }
            if (kind == "projection" || kind == "reflection") {
                check_keys(cfg_, spec, ptr, {"kind", "basepoint", "basis", "random_dim"});
                const Vector base = spec.contains("basepoint")
                                        ? vector(cfg_, spec["basepoint"], ptr + "/basepoint", d)
                                        : Vector::Zero(d);
                Matrix basis;
                if (spec.contains("basis") == spec.contains("random_dim")) {
                    cfg_.fail(ptr, "give exactly one of 'basis' or 'random_dim'");
                }
                if (spec.contains("basis")) {
                    basis = columns(cfg_, spec["basis"], ptr + "/basis", d);
                    require_orthonormal(cfg_, basis, ptr + "/basis");
                } else {
                    const auto k = static_cast<Eigen::Index>(count(cfg_, spec["random_dim"], ptr + "/random_dim"));
                    if (k > d) cfg_.fail(ptr + "/random_dim", "exceeds the dimension");
                    basis = rng(ptr).orthonormal(d, k);
                }
                return leaf(kind == "projection" ? maps::projection(base, basis)
                                                 : maps::reflection(base, basis));
            }
            if (kind == "constant") {
                check_keys(cfg_, spec, ptr, {"kind", "point"});
                return leaf(maps::constant(vector(cfg_, require(cfg_, spec, ptr, "point"), ptr + "/point", d)));
            }
            if (kind == "scale") {
                check_keys(cfg_, spec, ptr, {"kind", "factor"});
                return leaf(maps::scale(number(cfg_, require(cfg_, spec, ptr, "factor"), ptr + "/factor"), d));
            }
            if (kind == "random_affine") {
                check_keys(cfg_, spec, ptr, {"kind", "fixed_dim", "contraction"});
                const auto k = static_cast<Eigen::Index>(count(cfg_, require(cfg_, spec, ptr, "fixed_dim"), ptr + "/fixed_dim"));
                if (k >= d) cfg_.fail(ptr + "/fixed_dim", "must be below the dimension");
                const double gamma = spec.contains("contraction")
                                         ? number(cfg_, spec["contraction"], ptr + "/contraction")
                                         : 1.0;
                if (!(gamma >= 0.0 && gamma <= 1.0)) cfg_.fail(ptr + "/contraction", "must lie in [0, 1]");
                Rng r = rng(ptr);
                const Vector c = r.gaussian(d);
                const Matrix q = r.orthogonal(d);
                const Matrix b = q.leftCols(k);
                const Matrix w = q.rightCols(d - k);
                const Matrix g = r.rotation_without_fixed_points(d - k);
                const Matrix m = b * b.transpose() + gamma * w * g * w.transpose();
                return leaf(maps::affine_about(c, m, OperatorClass::Nonexpansive,
                                               FixedPointSet::affine(c, b), "random_affine"));
            }
            if (kind == "cyclic") {
                check_keys(cfg_, spec, ptr, {"kind", "members"});
                const json& members = require(cfg_, spec, ptr, "members");
                if (!members.is_array() || members.empty()) cfg_.fail(ptr + "/members", "expected a non-empty list");
                std::vector<OperatorFamily> fams;
                Node node{OperatorFamily::constant(maps::identity(d)), {}, true};
                std::optional<OperatorClass> cls;
                for (std::size_t i = 0; i < members.size(); ++i) {
                    Node child = build(members[i], ptr + "/members/" + std::to_string(i));
                    const auto c = child.family.declared_class();
                    cls = cls ? common_class(*cls, c) : c;
                    fams.push_back(child.family);
                    absorb(node, child);
                }
                node.family = OperatorFamily(
                    [fams](std::size_t n) { return fams[n % fams.size()].at(n); }, d,
                    *cls, "cyclic");
                return node;
            }
            if (kind == "semigroup_at_times" || kind == "cesaro") {
                check_keys(cfg_, spec, ptr, {"kind", "semigroup", "schedule"});
                const Semigroup s = semigroup(require(cfg_, spec, ptr, "semigroup"), ptr + "/semigroup");
                const TimeSchedule sched = schedule(require(cfg_, spec, ptr, "schedule"), ptr + "/schedule");
                out_.semigroups.push_back(s);
                Node node{kind == "cesaro" ? cesaro_family(s, sched) : semigroup_family_at_times(s, sched),
                          {verify::oracle_semigroup_fixset(s)}, true};
                return node;
            }
            if (kind == "gamma_tower") {
                check_keys(cfg_, spec, ptr, {"kind", "levels", "alpha"});
                const json& levels = require(cfg_, spec, ptr, "levels");
                if (!levels.is_array() || levels.empty()) cfg_.fail(ptr + "/levels", "expected a non-empty list");
                Node node{OperatorFamily::constant(maps::identity(d)), {}, true};
                std::vector<OperatorFamily> fams;
                for (std::size_t i = 0; i < levels.size(); ++i) {
                    Node child = build(levels[i], ptr + "/levels/" + std::to_string(i));
                    fams.push_back(child.family);
                    absorb(node, child);
                }
                const json& alpha = require(cfg_, spec, ptr, "alpha");
                check_keys(cfg_, alpha, ptr + "/alpha", {"a", "b", "values"});
                const double a = alpha.contains("a") ? number(cfg_, alpha["a"], ptr + "/alpha/a") : 0.1;
                const double b = alpha.contains("b") ? number(cfg_, alpha["b"], ptr + "/alpha/b") : 0.9;
                const json& values = require(cfg_, alpha, ptr + "/alpha", "values");
                if (!values.is_array() || values.size() != levels.size()) {
                    cfg_.fail(ptr + "/alpha/values", "expected one value per level");
                }
                std::vector<double> vals;
                for (std::size_t i = 0; i < values.size(); ++i) {
                    vals.push_back(number(cfg_, values[i], ptr + "/alpha/values/" + std::to_string(i)));
                }
                GammaTower tower = gamma_tower(fams, AlphaSchedule::constant(vals, a, b));
                if (ptr == "/family") out_.tower = tower;
                node.family = tower.family();
                return node;
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            cfg_.fail(ptr, e.what());
        }
        cfg_.fail(ptr + "/kind", "unknown family kind '" + kind + "'");
    }

private:
    Node leaf(Mapping m) {
        out_.probes.push_back(m);
        Node node{OperatorFamily::constant(m), {}, m.known_fixed_points().has_value()};
        if (m.known_fixed_points()) node.fixed.push_back(*m.known_fixed_points());
        return node;
    }

    static void absorb(Node& into, const Node& child) {
        into.fixed_known = into.fixed_known && child.fixed_known;
        into.fixed.insert(into.fixed.end(), child.fixed.begin(), child.fixed.end());
    }

    Rng rng(const std::string& ptr) const { return Rng(cfg_.seed).split(ptr); }

    Semigroup semigroup(const json& spec, const std::string& ptr) {
        const Eigen::Index d = cfg_.dimension;
        const std::string kind = kind_of(cfg_, spec, ptr);
        if (kind == "linear_psd") {
            check_keys(cfg_, spec, ptr, {"kind", "matrix", "diag"});
            if (spec.contains("matrix") == spec.contains("diag")) cfg_.fail(ptr, "give exactly one of 'matrix' or 'diag'");
            const Matrix a = spec.contains("matrix")
                                 ? square_matrix(cfg_, spec["matrix"], ptr + "/matrix", d)
                                 : Matrix(vector(cfg_, spec["diag"], ptr + "/diag", d).asDiagonal());
            return semigroup_linear_psd(a);
        }
        if (kind == "rotation") {
            check_keys(cfg_, spec, ptr, {"kind", "rates", "fixed_dims"});
            const json& rates = require(cfg_, spec, ptr, "rates");
            if (!rates.is_array()) cfg_.fail(ptr + "/rates", "expected a list");
            std::vector<double> r;
            for (std::size_t i = 0; i < rates.size(); ++i) r.push_back(number(cfg_, rates[i], ptr + "/rates/" + std::to_string(i)));
            const auto fixed = static_cast<Eigen::Index>(count(cfg_, require(cfg_, spec, ptr, "fixed_dims"), ptr + "/fixed_dims"));
            if (2 * static_cast<Eigen::Index>(r.size()) + fixed != d) {
                cfg_.fail(ptr, "2 * blocks + fixed_dims must equal the dimension");
            }
            return semigroup_rotation(r, fixed);
        }
        cfg_.fail(ptr + "/kind", "unknown semigroup kind '" + kind + "' (linear_psd, rotation)");
    }

    TimeSchedule schedule(const json& spec, const std::string& ptr) {
        const std::string kind = kind_of(cfg_, spec, ptr);
        if (kind == "triangular_sweep") {
            check_keys(cfg_, spec, ptr, {"kind"});
            return TimeSchedule::triangular_sweep();
        }
        if (kind == "divergent") {
            check_keys(cfg_, spec, ptr, {"kind", "rate"});
            return TimeSchedule::divergent(spec.contains("rate") ? number(cfg_, spec["rate"], ptr + "/rate") : 1.0);
        }
        if (kind == "custom") {
            check_keys(cfg_, spec, ptr, {"kind", "times"});
            const json& times = require(cfg_, spec, ptr, "times");
            if (!times.is_array() || times.empty()) cfg_.fail(ptr + "/times", "expected a non-empty list");
            std::vector<double> t;
            for (std::size_t i = 0; i < times.size(); ++i) t.push_back(number(cfg_, times[i], ptr + "/times/" + std::to_string(i)));
            return TimeSchedule::custom(t);
        }
        cfg_.fail(ptr + "/kind", "unknown schedule kind '" + kind + "' (triangular_sweep, divergent, custom)");
    }

    const ExperimentConfig& cfg_;
    Experiment& out_;
};

inline ConvexSet build_set(const ExperimentConfig& cfg, const json& spec) {
    const std::string ptr = "/set";
    const Eigen::Index d = cfg.dimension;
    const std::string kind = kind_of(cfg, spec, ptr);
    try {
        if (kind == "whole") {
            check_keys(cfg, spec, ptr, {"kind"});
            return ConvexSet::whole(d);
        }
        if (kind == "ball") {
            check_keys(cfg, spec, ptr, {"kind", "center", "radius"});
            return ConvexSet::ball(vector(cfg, require(cfg, spec, ptr, "center"), ptr + "/center", d),
                                   number(cfg, require(cfg, spec, ptr, "radius"), ptr + "/radius"));
        }
        if (kind == "box") {
            check_keys(cfg, spec, ptr, {"kind", "lower", "upper"});
            return ConvexSet::box(vector(cfg, require(cfg, spec, ptr, "lower"), ptr + "/lower", d),
                                  vector(cfg, require(cfg, spec, ptr, "upper"), ptr + "/upper", d));
        }
        if (kind == "affine") {
            check_keys(cfg, spec, ptr, {"kind", "basepoint", "basis"});
            return ConvexSet::affine(vector(cfg, require(cfg, spec, ptr, "basepoint"), ptr + "/basepoint", d),
                                     columns(cfg, require(cfg, spec, ptr, "basis"), ptr + "/basis", d));
        }
        if (kind == "halfspaces") {
            check_keys(cfg, spec, ptr, {"kind", "list"});
            const json& list = require(cfg, spec, ptr, "list");
            if (!list.is_array()) cfg.fail(ptr + "/list", "expected a list");
            std::vector<HalfSpace> hs;
            for (std::size_t i = 0; i < list.size(); ++i) {
                const std::string p = ptr + "/list/" + std::to_string(i);
                check_keys(cfg, list[i], p, {"normal", "offset"});
                hs.push_back(HalfSpace{vector(cfg, require(cfg, list[i], p, "normal"), p + "/normal", d),
                                       number(cfg, require(cfg, list[i], p, "offset"), p + "/offset"), false});
            }
            return ConvexSet::halfspaces(hs, d);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        cfg.fail(ptr, e.what());
    }
    cfg.fail(ptr + "/kind", "unknown set kind '" + kind + "' (whole, ball, box, affine, halfspaces)");
}

inline Vector build_x0(const ExperimentConfig& cfg) {
    if (cfg.x0.is_string()) {
        static const std::regex pattern(R"(random\((\d+)\))");
        std::smatch m;
        const std::string s = cfg.x0.get<std::string>();
        if (!std::regex_match(s, m, pattern)) cfg.fail("/x0", "expected a vector or \"random(<seed>)\"");
        return Rng(std::stoull(m[1].str())).gaussian(cfg.dimension, 3.0);
    }
    return vector(cfg, cfg.x0, "/x0", cfg.dimension);
}

}  // namespace detail

/// Builds the problem, the R_n family and, when the leaf fixed sets are all
/// affine, the closed-form oracle for F.
inline Experiment build_experiment(const ExperimentConfig& cfg) {
    Experiment ex{cfg,
                  Problem{ConvexSet::whole(1), Vector::Zero(1), OperatorFamily::constant(maps::identity(1)),
                          std::nullopt, false},
                  OperatorFamily::constant(maps::identity(1)),
                  std::nullopt,
                  false,
                  std::nullopt,
                  {},
                  {}};
    detail::FamilyBuilder builder(cfg, ex);
    detail::Node root = builder.build(cfg.family, "/family");
    if (!is_nonexpansive(root.family.declared_class()) &&
        root.family.declared_class() != OperatorClass::QuasiNonexpansive) {
        cfg.fail("/family", "family must be (quasi-)nonexpansive");
    }
    ex.r_family = root.family;
    if (root.fixed_known && !root.fixed.empty()) {
        ex.oracle = verify::oracle_affine_intersection(root.fixed);
        ex.fixed_set_empty = !ex.oracle.has_value();
    }
    const ConvexSet c = detail::build_set(cfg, cfg.set);
    const Vector x0 = detail::build_x0(cfg);
    // The oracle describes F inside the whole space; with a proper C it is
    // only an oracle when F lies inside C, which is not checked here.
    std::optional<FixedPointSet> oracle = c.is_whole_space() ? ex.oracle : std::nullopt;
    try {
        ex.problem = make_problem(c, x0, halve(root.family), oracle);
    } catch (const std::exception& e) {
        cfg.fail("/x0", e.what());
    }
    if (!c.is_whole_space()) ex.oracle.reset();
    return ex;
}

}  // namespace fixpoint::cli

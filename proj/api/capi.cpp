#include "randlmi.h"

#include <cstring>
#include <exception>
#include <string>

#include <json.hpp>

#include "learning.hpp"
#include "problem.hpp"
#include "problem_json.hpp"
#include "sampling.hpp"
#include "sequential.hpp"
#include "solver.hpp"
#include "util.hpp"

using nlohmann::ordered_json;

struct randlmi_problem {
    randlmi::UncertainProblem p;
};

struct randlmi_result {
    randlmi::SolveResult r;
    long long samples = 0;
    uint64_t seed = 0;
};

struct randlmi_outcome {
    randlmi::SequentialOutcome o;
};

namespace {

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void set_err(char** err, const std::string& msg) {
    if (err) *err = dup_string(msg);
}

// Maps the library's exception taxonomy onto C status codes.
int classify(const std::exception& e, char** err) {
    set_err(err, e.what());
    if (dynamic_cast<const randlmi::SchemaError*>(&e)) return RANDLMI_ERR_SCHEMA;
    if (dynamic_cast<const randlmi::ParseError*>(&e)) return RANDLMI_ERR_SCHEMA;
    if (dynamic_cast<const randlmi::ModelError*>(&e)) return RANDLMI_ERR_SCHEMA;
    if (dynamic_cast<const randlmi::EvalError*>(&e)) return RANDLMI_ERR_EVAL;
    if (dynamic_cast<const randlmi::ParameterError*>(&e)) return RANDLMI_ERR_USAGE;
    if (dynamic_cast<const randlmi::SolveError*>(&e)) return RANDLMI_ERR_USAGE;
    if (dynamic_cast<const randlmi::SequentialError*>(&e)) return RANDLMI_ERR_NUMERIC;
    return RANDLMI_ERR_INTERNAL;
}

randlmi::SolveOptions solve_options_from_json(const ordered_json& j) {
    randlmi::SolveOptions o;
    if (j.contains("sigma")) o.sigma_override = j["sigma"].get<double>();
    if (j.contains("box_radius")) o.box_radius = j["box_radius"].get<double>();
    if (j.contains("gap_tol")) o.gap_tol = j["gap_tol"].get<double>();
    if (j.contains("newton_tol")) o.newton_tol = j["newton_tol"].get<double>();
    if (j.contains("restarts")) o.restarts = j["restarts"].get<int>();
    if (j.contains("max_alt_rounds")) o.max_alt_rounds = j["max_alt_rounds"].get<int>();
    if (j.contains("max_boot_rounds")) o.max_boot_rounds = j["max_boot_rounds"].get<int>();
    if (j.contains("alt_tol")) o.alt_tol = j["alt_tol"].get<double>();
    if (j.contains("seed")) o.seed = j["seed"].get<uint64_t>();
    if (j.contains("y_init")) o.y_init = j["y_init"].get<std::vector<double>>();
    return o;
}

ordered_json result_to_json(const randlmi_result& res) {
    ordered_json j;
    j["status"] = randlmi::to_string(res.r.status);
    j["objective"] = res.r.objective;
    j["theta"] = res.r.theta;
    j["worst_min_eigenvalue"] = res.r.worst_min_eigenvalue;
    j["sigma"] = res.r.sigma;
    j["newton_steps"] = res.r.newton_steps;
    j["alternation_rounds"] = res.r.alternation_rounds;
    j["restarts_used"] = res.r.restarts_used;
    j["samples"] = res.samples;
    j["seed"] = res.seed;
    if (!res.r.message.empty()) j["message"] = res.r.message;
    return j;
}

}  // namespace

extern "C" {

const char* randlmi_version(void) { return "0.1.0"; }

void randlmi_string_free(char* s) { std::free(s); }

int randlmi_problem_load_file(const char* path, randlmi_problem** out, char** err) {
    if (!path || !out) return RANDLMI_ERR_USAGE;
    try {
        auto* h = new randlmi_problem{randlmi::load_problem_file(path)};
        *out = h;
        return RANDLMI_OK;
    } catch (const std::exception& e) {
        return classify(e, err);
    }
}

int randlmi_problem_load_json(const char* json_text, randlmi_problem** out, char** err) {
    if (!json_text || !out) return RANDLMI_ERR_USAGE;
    try {
        auto* h = new randlmi_problem{randlmi::load_problem_json(json_text)};
        *out = h;
        return RANDLMI_OK;
    } catch (const std::exception& e) {
        return classify(e, err);
    }
}

void randlmi_problem_free(randlmi_problem* p) { delete p; }

int randlmi_problem_info_json(const randlmi_problem* p, char** out_json) {
    if (!p || !out_json) return RANDLMI_ERR_USAGE;
    ordered_json j;
    j["name"] = p->p.name;
    j["kind"] = p->p.kind() == randlmi::ProblemKind::LMI ? "lmi" : "bmi";
    j["m_theta"] = p->p.layout.m_theta();
    j["m_x"] = p->p.layout.m_x();
    j["m_y"] = p->p.layout.m_y();
    j["n_sum"] = p->p.n_for_bounds();
    j["strictness"] = p->p.all_strict() ? "strict" : "nonstrict";
    ordered_json params = ordered_json::array();
    for (const auto& e : p->p.params.entries())
        params.push_back({{"name", e.name},
                          {"nominal", e.nominal},
                          {"lower", e.lower},
                          {"upper", e.upper}});
    j["parameters"] = std::move(params);
    ordered_json entries = ordered_json::array();
    for (int i = 0; i < p->p.layout.m_theta(); ++i) entries.push_back(p->p.layout.entry_name(i));
    j["packed_entries"] = std::move(entries);
    ordered_json blocks = ordered_json::array();
    for (const auto& b : p->p.blocks)
        blocks.push_back({{"name", b.name}, {"dim", b.dim}, {"strict", b.strict}});
    j["blocks"] = std::move(blocks);
    *out_json = dup_string(j.dump(2));
    return RANDLMI_OK;
}

int randlmi_vc_bound(int m_theta, int n, int nonstrict, double* out_d) {
    if (!out_d) return RANDLMI_ERR_USAGE;
    try {
        *out_d = nonstrict ? randlmi::vc_bound_nonstrict(m_theta, n)
                           : randlmi::vc_bound_strict(m_theta, n);
        return RANDLMI_OK;
    } catch (const std::exception&) {
        return RANDLMI_ERR_USAGE;
    }
}

int randlmi_sample_bound(double epsilon, double delta, double rho, int m_theta, int n,
                         int nonstrict, int one_sided, double* out_d, long long* out_n,
                         char** err) {
    if (!out_d || !out_n) return RANDLMI_ERR_USAGE;
    try {
        randlmi::Levels levels(epsilon, delta, rho);
        randlmi::Strictness s =
            nonstrict ? randlmi::Strictness::Nonstrict : randlmi::Strictness::Strict;
        randlmi::BoundReport r = one_sided
                                     ? randlmi::sample_bound_one_sided(levels, m_theta, n, s)
                                     : randlmi::sample_bound_two_sided(levels, m_theta, n, s);
        *out_d = r.d;
        *out_n = r.n;
        return RANDLMI_OK;
    } catch (const std::exception& e) {
        return classify(e, err);
    }
}

int randlmi_validation_bound(long long k, long long kt, double alpha, double a, double epsilon,
                             double delta, double rho, long long* out_m, char** err) {
    if (!out_m) return RANDLMI_ERR_USAGE;
    try {
        randlmi::Levels levels(epsilon, delta, rho);
        double aa = a <= 0.0 ? randlmi::kAInfinity : a;
        *out_m = randlmi::validation_bound(k, kt, alpha, aa, levels);
        return RANDLMI_OK;
    } catch (const std::exception& e) {
        return classify(e, err);
    }
}

int randlmi_p_series(long long kt, double alpha, double* out, char** err) {
    if (!out) return RANDLMI_ERR_USAGE;
    try {
        *out = randlmi::p_series(kt, alpha);
        return RANDLMI_OK;
    } catch (const std::exception& e) {
        return classify(e, err);
    }
}

int randlmi_solve(const randlmi_problem* p, const char* options_json, randlmi_result** out,
                  char** err) {
    if (!p || !out) return RANDLMI_ERR_USAGE;
    try {
        ordered_json j = options_json && *options_json ? ordered_json::parse(options_json)
                                                       : ordered_json::object();
        randlmi::SolveOptions opts = solve_options_from_json(j);
        uint64_t seed = j.contains("seed") ? j["seed"].get<uint64_t>() : 1;
        long long n_samples = j.contains("samples") ? j["samples"].get<long long>() : 0;
        randlmi::ScenarioSet scen;
        if (j.contains("scenarios_csv")) {
            scen = randlmi::scenarios_from_csv(j["scenarios_csv"].get<std::string>(),
                                               p->p.params);
        } else {
            if (j.value("auto_samples", false)) {
                randlmi::Levels levels(j.value("epsilon", 0.1), j.value("delta", 0.01),
                                       j.value("rho", 0.0));
                randlmi::Strictness s = p->p.all_strict() ? randlmi::Strictness::Strict
                                                          : randlmi::Strictness::Nonstrict;
                n_samples = randlmi::sample_bound_one_sided(levels, p->p.layout.m_theta(),
                                                            p->p.n_for_bounds(), s)
                                .n;
            }
            if (n_samples < 1)
                throw randlmi::ParameterError(
                    "solve options must give 'samples' >= 1, 'auto_samples', or "
                    "'scenarios_csv'");
            scen = randlmi::draw(p->p.params, static_cast<size_t>(n_samples), seed, "design", 0);
        }
        randlmi::SolveResult sr = randlmi::solve_scenario(p->p, scen, opts);
        auto* h = new randlmi_result{std::move(sr), static_cast<long long>(scen.n_samples), seed};
        *out = h;
        switch (h->r.status) {
            case randlmi::SolveStatus::Optimal:
            case randlmi::SolveStatus::IterationLimit: return RANDLMI_OK;
            case randlmi::SolveStatus::Infeasible:
            case randlmi::SolveStatus::AllRestartsFailed: return RANDLMI_ERR_INFEASIBLE;
            case randlmi::SolveStatus::NumericalFailure: return RANDLMI_ERR_NUMERIC;
        }
        return RANDLMI_OK;
    } catch (const std::exception& e) {
        return classify(e, err);
    }
}

void randlmi_result_free(randlmi_result* r) { delete r; }

int randlmi_result_json(const randlmi_result* r, char** out_json) {
    if (!r || !out_json) return RANDLMI_ERR_USAGE;
    *out_json = dup_string(result_to_json(*r).dump(2));
    return RANDLMI_OK;
}

int randlmi_result_status(const randlmi_result* r) {
    if (!r) return RANDLMI_ERR_USAGE;
    switch (r->r.status) {
        case randlmi::SolveStatus::Optimal:
        case randlmi::SolveStatus::IterationLimit: return RANDLMI_OK;
        case randlmi::SolveStatus::Infeasible:
        case randlmi::SolveStatus::AllRestartsFailed: return RANDLMI_ERR_INFEASIBLE;
        case randlmi::SolveStatus::NumericalFailure: return RANDLMI_ERR_NUMERIC;
    }
    return RANDLMI_ERR_INTERNAL;
}

double randlmi_result_objective(const randlmi_result* r) { return r ? r->r.objective : 0.0; }

int randlmi_result_theta(const randlmi_result* r, double* buf, size_t buf_len, size_t* out_len) {
    if (!r || !out_len) return RANDLMI_ERR_USAGE;
    *out_len = r->r.theta.size();
    if (!buf) return RANDLMI_OK;
    if (buf_len < r->r.theta.size()) return RANDLMI_ERR_USAGE;
    std::memcpy(buf, r->r.theta.data(), r->r.theta.size() * sizeof(double));
    return RANDLMI_OK;
}

int randlmi_sequential_run(const randlmi_problem* p, const char* config_json,
                           randlmi_outcome** out, char** err) {
    if (!p || !out) return RANDLMI_ERR_USAGE;
    try {
        ordered_json j = config_json && *config_json ? ordered_json::parse(config_json)
                                                     : ordered_json::object();
        randlmi::SequentialConfig cfg;
        cfg.levels = randlmi::Levels(j.value("epsilon", 0.2), j.value("delta", 0.01),
                                     j.value("rho", 0.0));
        cfg.kt = j.value("kt", 10LL);
        cfg.bound_kt = j.value("bound_kt", 0LL);
        cfg.alpha = j.value("alpha", -1.0);
        cfg.a = j.value("a", -1.0);
        cfg.seed = j.value("seed", uint64_t{1});
        if (j.contains("solver")) cfg.solver = solve_options_from_json(j["solver"]);
        auto* h = new randlmi_outcome{randlmi::run_sequential(p->p, cfg)};
        *out = h;
        return h->o.status == randlmi::SequentialStatus::Infeasible ? RANDLMI_ERR_INFEASIBLE
                                                                    : RANDLMI_OK;
    } catch (const std::exception& e) {
        return classify(e, err);
    }
}

void randlmi_outcome_free(randlmi_outcome* o) { delete o; }

int randlmi_outcome_json(const randlmi_outcome* o, int include_volatile, char** out_json) {
    if (!o || !out_json) return RANDLMI_ERR_USAGE;
    *out_json = dup_string(randlmi::outcome_json(o->o, include_volatile == 0));
    return RANDLMI_OK;
}

int randlmi_outcome_status(const randlmi_outcome* o) {
    if (!o) return -1;
    switch (o->o.status) {
        case randlmi::SequentialStatus::ProbabilisticSolution: return 0;
        case randlmi::SequentialStatus::Infeasible: return 1;
        case randlmi::SequentialStatus::ExitAtLastIteration: return 2;
    }
    return -1;
}

int randlmi_outcome_load_json(const char* json_text, randlmi_outcome** out, char** err) {
    if (!json_text || !out) return RANDLMI_ERR_USAGE;
    try {
        ordered_json j = ordered_json::parse(json_text);
        randlmi::SequentialOutcome o;
        std::string status = j.at("status").get<std::string>();
        if (status == "probabilistic-solution")
            o.status = randlmi::SequentialStatus::ProbabilisticSolution;
        else if (status == "infeasible")
            o.status = randlmi::SequentialStatus::Infeasible;
        else if (status == "exit-at-last-iteration")
            o.status = randlmi::SequentialStatus::ExitAtLastIteration;
        else
            throw randlmi::ParameterError("unknown outcome status '" + status + "'");
        o.exit_iteration = j.value("exit_iteration", 0LL);
        o.objective = j.value("objective", 0.0);
        o.theta = j.value("theta", std::vector<double>{});
        o.total_design_samples = j.value("total_design_samples", 0LL);
        o.total_validation_samples = j.value("total_validation_samples", 0LL);
        o.bound_n = j.value("bound_n", 0LL);
        o.vc_d = j.value("vc_d", 0.0);
        *out = new randlmi_outcome{std::move(o)};
        return RANDLMI_OK;
    } catch (const std::exception& e) {
        return classify(e, err);
    }
}

int randlmi_audit(const randlmi_problem* p, const randlmi_outcome* o, long long samples,
                  uint64_t seed, double epsilon, double delta, double rho, double confidence,
                  char** out_json, char** err) {
    if (!p || !o || !out_json) return RANDLMI_ERR_USAGE;
    try {
        randlmi::Levels levels(epsilon, delta, rho);
        randlmi::AuditReport r = randlmi::audit(o->o, p->p, samples, seed, levels, confidence);
        *out_json = dup_string(randlmi::audit_report_json(r));
        return RANDLMI_OK;
    } catch (const std::exception& e) {
        return classify(e, err);
    }
}

uint64_t randlmi_derive_seed(uint64_t master, const char* purpose, uint64_t k) {
    return randlmi::derive_seed(master, purpose ? purpose : "", k);
}

int randlmi_scenarios_csv(const randlmi_problem* p, long long n, uint64_t seed,
                          const char* purpose, long long k, char** out_csv, char** err) {
    if (!p || !out_csv || n < 1) return RANDLMI_ERR_USAGE;
    try {
        randlmi::ScenarioSet s =
            randlmi::draw(p->p.params, static_cast<size_t>(n), seed,
                          purpose ? purpose : "design", static_cast<uint64_t>(k));
        *out_csv = dup_string(randlmi::scenarios_to_csv(s));
        return RANDLMI_OK;
    } catch (const std::exception& e) {
        return classify(e, err);
    }
}

int randlmi_empirical_violation(const randlmi_problem* p, const double* theta, size_t theta_len,
                                const char* scenarios_csv, double* out, char** err) {
    if (!p || !theta || !scenarios_csv || !out) return RANDLMI_ERR_USAGE;
    try {
        randlmi::ScenarioSet s = randlmi::scenarios_from_csv(scenarios_csv, p->p.params);
        std::span<const double> th(theta, theta_len);
        *out = randlmi::empirical_violation(p->p, th, s);
        return RANDLMI_OK;
    } catch (const std::exception& e) {
        return classify(e, err);
    }
}

}  // extern "C"

#include "sequential.hpp"

#include <chrono>
#include <cmath>

#include <json.hpp>

#include "util.hpp"

namespace randlmi {

using nlohmann::ordered_json;

std::string to_string(SequentialStatus s) {
    switch (s) {
        case SequentialStatus::ProbabilisticSolution: return "probabilistic-solution";
        case SequentialStatus::Infeasible: return "infeasible";
        case SequentialStatus::ExitAtLastIteration: return "exit-at-last-iteration";
    }
    return "unknown";
}

SequentialOutcome run_sequential(const UncertainProblem& p, const SequentialConfig& cfg) {
    if (cfg.kt <= 1) throw ParameterError("run_sequential: kt must be > 1");
    const long long schedule_kt = cfg.schedule_kt();
    if (schedule_kt < cfg.kt)
        throw ParameterError("run_sequential: bound_kt must be >= kt");
    double a = cfg.a, alpha = cfg.alpha;
    if (a < 0.0 || alpha <= 0.0) {
        double da, dalpha;
        default_validation_constants(cfg.levels.rho, da, dalpha);
        if (a < 0.0) a = da;
        if (alpha <= 0.0) alpha = dalpha;
    }

    const Strictness strictness = p.all_strict() ? Strictness::Strict : Strictness::Nonstrict;
    BoundReport bound =
        sample_bound_one_sided(cfg.levels, p.layout.m_theta(), p.n_for_bounds(), strictness);

    SequentialOutcome out;
    out.bound_n = bound.n;
    out.vc_d = bound.d;

    using clock = std::chrono::steady_clock;
    for (long long k = 1; k <= cfg.kt; ++k) {
        auto t0 = clock::now();
        IterationRecord rec;
        rec.k = k;
        rec.n_design = (bound.n * k + schedule_kt - 1) / schedule_kt;  // ceil(N k / kt)
        out.total_design_samples += rec.n_design;

        ScenarioSet design = draw(p.params, static_cast<size_t>(rec.n_design), cfg.seed,
                                  "design", static_cast<uint64_t>(k));
        SolveOptions solver_opts = cfg.solver;
        solver_opts.seed = derive_seed(cfg.seed, "solver", static_cast<uint64_t>(k));
        SolveResult sr;
        try {
            sr = solve_scenario(p, design, solver_opts);
        } catch (const std::exception& e) {
            out.log.push_back(rec);
            throw SequentialError(std::string("iteration ") + std::to_string(k) +
                                      ": " + e.what(),
                                  out.log);
        }
        rec.design_status = to_string(sr.status);
        rec.objective = sr.objective;

        if (sr.status == SolveStatus::Infeasible ||
            sr.status == SolveStatus::AllRestartsFailed) {
            rec.wall_s = std::chrono::duration<double>(clock::now() - t0).count();
            out.log.push_back(rec);
            out.status = SequentialStatus::Infeasible;
            out.exit_iteration = k;
            out.message = "scenario program reported " + rec.design_status +
                          "; the original problem is then infeasible as well";
            return out;
        }
        if (sr.status == SolveStatus::NumericalFailure) {
            out.log.push_back(rec);
            throw SequentialError("iteration " + std::to_string(k) +
                                      ": solver failure: " + sr.message,
                                  out.log);
        }

        if (k == cfg.kt) {
            // final iteration exits without validation
            rec.wall_s = std::chrono::duration<double>(clock::now() - t0).count();
            out.log.push_back(rec);
            out.status = SequentialStatus::ExitAtLastIteration;
            out.theta = sr.theta;
            out.objective = sr.objective;
            out.exit_iteration = k;
            out.message = "loop cap reached; candidate returned without validation";
            return out;
        }

        rec.m_validation = validation_bound(k, schedule_kt, alpha, a, cfg.levels);
        out.total_validation_samples += rec.m_validation;
        ScenarioSet validation = draw(p.params, static_cast<size_t>(rec.m_validation), cfg.seed,
                                      "validation", static_cast<uint64_t>(k));
        rec.validated = true;
        rec.validation_violation = empirical_violation(p, sr.theta, validation);
        rec.certified = rec.validation_violation <= cfg.levels.rho;
        rec.wall_s = std::chrono::duration<double>(clock::now() - t0).count();
        out.log.push_back(rec);

        if (rec.certified) {
            out.status = SequentialStatus::ProbabilisticSolution;
            out.theta = sr.theta;
            out.objective = sr.objective;
            out.exit_iteration = k;
            return out;
        }
        // validation failed: discard the candidate and iterate
    }
    throw SequentialError("unreachable: loop ended without exit", out.log);
}

AuditReport audit(const SequentialOutcome& outcome, const UncertainProblem& p,
                  long long m_audit, uint64_t seed, const Levels& levels, double confidence) {
    if (m_audit < 1) throw ParameterError("audit: sample count must be >= 1");
    if (outcome.theta.empty())
        throw ParameterError("audit: outcome carries no candidate (infeasible exit)");
    AuditReport r;
    r.estimate = violation_estimate(p, outcome.theta, static_cast<size_t>(m_audit), seed,
                                    confidence);
    r.threshold = levels.rho + levels.epsilon;
    r.within_threshold = r.estimate.estimate <= r.threshold;
    r.certified_outcome = outcome.status == SequentialStatus::ProbabilisticSolution;
    r.samples = m_audit;
    r.seed = seed;
    return r;
}

std::string iteration_record_json(const IterationRecord& r, bool canonical) {
    ordered_json j;
    j["k"] = r.k;
    j["n_design"] = r.n_design;
    j["design_status"] = r.design_status;
    j["objective"] = r.objective;
    j["m_validation"] = r.m_validation;
    if (r.validated) {
        j["validation_violation"] = r.validation_violation;
        j["certified"] = r.certified;
    }
    if (!canonical) j["wall_s"] = r.wall_s;
    return j.dump();
}

std::string outcome_json(const SequentialOutcome& o, bool canonical) {
    ordered_json j;
    j["status"] = to_string(o.status);
    j["exit_iteration"] = o.exit_iteration;
    j["objective"] = o.objective;
    j["theta"] = o.theta;
    j["total_design_samples"] = o.total_design_samples;
    j["total_validation_samples"] = o.total_validation_samples;
    j["bound_n"] = o.bound_n;
    j["vc_d"] = o.vc_d;
    if (!o.message.empty()) j["message"] = o.message;
    ordered_json log = ordered_json::array();
    for (const IterationRecord& r : o.log)
        log.push_back(ordered_json::parse(iteration_record_json(r, canonical)));
    j["iterations"] = std::move(log);
    return j.dump(2);
}

std::string audit_report_json(const AuditReport& r) {
    ordered_json j;
    j["samples"] = r.samples;
    j["violations"] = r.estimate.violations;
    j["estimate"] = r.estimate.estimate;
    j["interval_lower"] = r.estimate.interval_lower;
    j["interval_upper"] = r.estimate.interval_upper;
    j["interval_confidence"] = r.estimate.confidence;
    j["threshold"] = r.threshold;
    j["within_threshold"] = r.within_threshold;
    j["certified"] = r.certified_outcome;
    if (!r.certified_outcome)
        j["note"] = "uncertified: the candidate was returned at the loop cap without validation";
    j["seed"] = r.seed;
    return j.dump(2);
}

}  // namespace randlmi

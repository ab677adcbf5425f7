#pragma once

#include <string>
#include <vector>

#include "learning.hpp"
#include "solver.hpp"
#include "stats.hpp"

namespace randlmi {

struct SequentialConfig {
    Levels levels{0.2, 0.01, 0.0};
    long long kt = 10;        // iteration cap of the loop, > 1
    long long bound_kt = 0;   // termination parameter inside the N_k / M_k
                              // formulas; 0 means "same as kt". A larger value
                              // only enlarges the schedules, which keeps the
                              // certificate valid while the loop exits sooner.
    double alpha = -1.0;      // < 0 picks the default for the given rho
    double a = -1.0;          // < 0 picks the default for the given rho
    uint64_t seed = 1;
    SolveOptions solver;

    long long schedule_kt() const { return bound_kt > 0 ? bound_kt : kt; }
};

enum class SequentialStatus { ProbabilisticSolution, Infeasible, ExitAtLastIteration };

std::string to_string(SequentialStatus s);

struct IterationRecord {
    long long k = 0;
    long long n_design = 0;
    std::string design_status;
    double objective = 0.0;
    long long m_validation = 0;       // 0 when no validation ran this iteration
    double validation_violation = 0.0;
    bool validated = false;           // validation ran
    bool certified = false;           // validation passed
    double wall_s = 0.0;
};

struct SequentialOutcome {
    SequentialStatus status = SequentialStatus::Infeasible;
    std::vector<double> theta;
    double objective = 0.0;
    long long exit_iteration = 0;
    std::vector<IterationRecord> log;
    long long total_design_samples = 0;
    long long total_validation_samples = 0;
    long long bound_n = 0;  // one-shot sample bound N the schedule derives from
    double vc_d = 0.0;
    std::string message;
};

// The sequential design/validation loop. Iteration k draws ceil(N k / kt)
// design samples, solves the scenario program, and either certifies the
// candidate on an independent validation set of validation_bound(k) samples
// or moves on. Solver failures are surfaced as exceptions carrying the log.
SequentialOutcome run_sequential(const UncertainProblem& p, const SequentialConfig& cfg);

struct SequentialError : std::runtime_error {
    std::vector<IterationRecord> log;
    SequentialError(const std::string& what, std::vector<IterationRecord> log_)
        : std::runtime_error(what), log(std::move(log_)) {}
};

struct AuditReport {
    ViolationEstimate estimate;
    double threshold = 0.0;  // rho + epsilon
    bool within_threshold = false;
    bool certified_outcome = false;  // false for loop-cap exits
    long long samples = 0;
    uint64_t seed = 0;
};

// Fresh a-posteriori violation estimate for an outcome's candidate.
AuditReport audit(const SequentialOutcome& outcome, const UncertainProblem& p,
                  long long m_audit, uint64_t seed, const Levels& levels,
                  double confidence = 0.99);

// Serialization used by the log files and the C API. Volatile fields (wall
// time) are omitted when canonical is true, so reruns hash identically.
std::string iteration_record_json(const IterationRecord& r, bool canonical);
std::string outcome_json(const SequentialOutcome& o, bool canonical);
std::string audit_report_json(const AuditReport& r);

}  // namespace randlmi

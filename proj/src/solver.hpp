#pragma once

#include <optional>
#include <string>
#include <vector>

#include "problem.hpp"
#include "sampling.hpp"

namespace randlmi {

struct SolveError : std::runtime_error {
    explicit SolveError(const std::string& what) : std::runtime_error(what) {}
};

struct SolveOptions {
    double sigma_override = -1.0;  // strictness margin; < 0 derives it from the problem
    double box_radius = 1e6;       // |theta_i| <= R trust box added to every solve
    double gap_tol = 1e-7;         // duality-gap tolerance, relative to 1 + |objective|
    double newton_tol = 1e-9;      // Newton decrement^2 / 2 threshold per centering
    double mu_factor = 0.2;        // barrier parameter reduction per outer step
    int max_outer = 90;
    int max_newton = 60;
    int restarts = 5;              // bilinear alternation restarts
    int max_alt_rounds = 50;
    int max_boot_rounds = 25;      // feasibility (margin) alternation rounds
    double alt_tol = 1e-5;         // relative objective improvement stop
    double descent_gap_tol = 1e-3; // phase gap during alternation rounds
    uint64_t seed = 1;             // restart-initialization stream
    std::optional<std::vector<double>> y_init;  // initial y-group values, length m_y
    long long max_stacked_dim = 2000;
    int max_m_theta = 200;
    bool trace = false;  // progress lines on stderr
};

enum class SolveStatus { Optimal, Infeasible, IterationLimit, NumericalFailure,
                         AllRestartsFailed };

std::string to_string(SolveStatus s);

struct SolveResult {
    SolveStatus status = SolveStatus::NumericalFailure;
    std::vector<double> theta;
    double objective = 0.0;
    double worst_min_eigenvalue = 0.0;  // min over sampled blocks at theta (unshifted)
    double sigma = 0.0;                 // strictness margin used
    long long newton_steps = 0;
    int alternation_rounds = 0;
    int restarts_used = 0;
    std::string message;
};

// One affine matrix-inequality constraint of a scenario program:
// a0 + sum_i theta_i * terms[i].second >= shift * I.
struct AffineBlock {
    Mat a0;
    std::vector<std::pair<int, Mat>> terms;
    double shift = 0.0;
    int dim() const { return a0.n(); }
};

struct ScenarioProgram {
    int m_theta = 0;
    std::vector<double> objective;
    std::vector<AffineBlock> blocks;  // sample major, block minor
    double sigma = 0.0;
    long long stacked_dim = 0;
};

// Strictness margin sigma = 1e-6 * (1 + max_b |F0_b(q_nominal)|_inf).
double strictness_margin(const UncertainProblem& p);

// Instantiates every block at every sample of the set and stacks the affine
// constraints (LMI problems only). Ordering is sample major, block minor.
ScenarioProgram assemble(const UncertainProblem& p, const ScenarioSet& scenarios,
                         const SolveOptions& opts = {});

// Phase-1 feasibility (maximize the uniform margin t s.t. blocks >= t I)
// followed by log-det barrier path following on the shifted program.
SolveResult solve_scenario_lmi(const ScenarioProgram& sp, const SolveOptions& opts = {});

// Alternating minimization for bilinear problems: fixing the y-coupled
// variables yields an affine scenario program in the rest, and vice versa.
// Entries without bilinear coupling stay free in both phases. Margin
// alternation bootstraps feasibility before the descent rounds; the best
// restart is returned.
SolveResult solve_scenario_bmi(const UncertainProblem& p, const ScenarioSet& scenarios,
                               const SolveOptions& opts = {});

// Dispatches on the problem kind.
SolveResult solve_scenario(const UncertainProblem& p, const ScenarioSet& scenarios,
                           const SolveOptions& opts = {});

}  // namespace randlmi

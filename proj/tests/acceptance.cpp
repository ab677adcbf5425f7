// Acceptance suite: one check per shipped claim, each printing a PASS/FAIL
// line. The process exits nonzero when any check fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "problem_json.hpp"
#include "sequential.hpp"
#include "util.hpp"

using namespace randlmi;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& label, const std::function<bool(std::string&)>& fn) {
    std::string detail;
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
        ok = fn(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d: %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", number,
                label.c_str(), secs, detail.empty() ? "" : " — ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

UncertainProblem testbed() {
    return load_problem_json(R"({
        "parameters": [{"name": "q", "nominal": 0.5, "lower": 0, "upper": 1}],
        "variables": [{"name": "x"}],
        "objective": {"x": 1},
        "blocks": [{"dim": 1, "strict": true,
                    "constant": {"0,0": "-q"},
                    "linear": {"x": {"0,0": "1"}}}]
    })");
}

UncertainProblem manipulator() {
    return load_problem_file(std::string(RANDLMI_DATA_DIR) + "/manipulator.json");
}

double round_3sig(long long n) {
    double mag = std::pow(10.0, std::floor(std::log10(static_cast<double>(n))) - 2.0);
    return std::round(static_cast<double>(n) / mag) * mag;
}

double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    double num = 0, den = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
}

bool criterion1_bounds(std::string& detail) {
    struct Row {
        double eps, delta, reference;
    };
    const Row rows[] = {{0.2, 1e-2, 3.58e4},
                        {0.1, 1e-4, 8.12e4},
                        {0.05, 1e-6, 1.82e5},
                        {0.01, 1e-8, 1.13e6},
                        {0.005, 1e-10, 2.45e6}};
    std::ostringstream got;
    bool ok = true;
    for (const Row& r : rows) {
        BoundReport b =
            sample_bound_one_sided(Levels(r.eps, r.delta, 0.0), 13, 11, Strictness::Strict);
        double three = round_3sig(b.n);
        got << dtos(three) << " ";
        if (std::fabs(three - r.reference) > 1e-9 * r.reference) ok = false;
    }
    detail = "counts at 3 significant figures: " + got.str();
    return ok;
}

bool criterion2_validation(std::string& detail) {
    long long m1a = validation_bound(1, 5000, 0.1, kAInfinity, Levels(0.2, 1e-2, 0.0));
    long long m1b = validation_bound(1, 5000, 0.1, kAInfinity, Levels(0.1, 1e-4, 0.0));
    detail = "M1 = " + std::to_string(m1a) + " and " + std::to_string(m1b);
    return m1a >= 55 && m1a <= 58 && m1b >= 160 && m1b <= 165;
}

bool criterion3_growth(std::string& detail) {
    const std::vector<double> eps_grid{0.005, 0.01, 0.05, 0.1, 0.2};
    const std::vector<double> delta_grid{1e-2, 1e-4, 1e-6, 1e-8, 1e-10};
    double slope1_lo = 10, slope1_hi = 0, slope2_lo = 10, slope2_hi = 0;
    for (double delta : delta_grid) {
        std::vector<double> x, y1, y2;
        for (double eps : eps_grid) {
            Levels l(eps, delta, 0.0);
            long long n1 = sample_bound_one_sided(l, 13, 11, Strictness::Strict).n;
            long long n2 = sample_bound_two_sided(l, 13, 11, Strictness::Strict).n;
            if (n1 >= n2) {
                detail = "dominance violated at eps=" + dtos(eps) + " delta=" + dtos(delta);
                return false;
            }
            x.push_back(std::log(1.0 / eps));
            y1.push_back(std::log(static_cast<double>(n1)));
            y2.push_back(std::log(static_cast<double>(n2)));
        }
        double s1 = regression_slope(x, y1);
        double s2 = regression_slope(x, y2);
        slope1_lo = std::min(slope1_lo, s1);
        slope1_hi = std::max(slope1_hi, s1);
        slope2_lo = std::min(slope2_lo, s2);
        slope2_hi = std::max(slope2_hi, s2);
    }
    detail = "one-sided slope in [" + dtos(slope1_lo) + ", " + dtos(slope1_hi) +
             "], two-sided in [" + dtos(slope2_lo) + ", " + dtos(slope2_hi) + "]";
    return slope1_lo >= 1.0 && slope1_hi <= 1.3 && slope2_lo >= 2.0 && slope2_hi <= 2.3;
}

bool criterion4_definiteness(std::string& detail) {
    Rng rng(480001);
    int checked = 0;
    for (int trial = 0; checked < 1000; ++trial) {
        if (trial > 20000) {
            detail = "generator starved";
            return false;
        }
        int n = 2 + static_cast<int>(rng.next_u64() % 7);
        Mat m(n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                double v = rng.uniform(-1.0, 1.0);
                m(i, j) = v;
                m(j, i) = v;
            }
        // half the trials are shifted toward the PSD boundary
        if (trial % 2) m.shift_diag(-sym_min_eigenvalue(m) + (trial % 4 == 1 ? 1e-3 : -1e-3));
        double lmin = sym_eigenvalues(m).front();
        if (std::fabs(lmin) <= 1e-6) continue;
        double tau = definiteness_tolerance(m);
        bool pd = is_positive_definite(m, tau);
        bool psd = is_positive_semidefinite(m, tau);
        bool eig_pd = lmin > 0.0;
        if (pd != eig_pd || psd != eig_pd) {
            detail = "cholesky check disagrees with the eigenvalue oracle";
            return false;
        }
        if (pd != principal_minors_check(m, MinorMode::Leading)) {
            detail = "leading-minor oracle disagreement";
            return false;
        }
        if (psd != principal_minors_check(m, MinorMode::All)) {
            detail = "all-minors oracle disagreement";
            return false;
        }
        ++checked;
    }
    Mat counterexample(3);
    double vals[3][3] = {{1, 1, 1}, {1, 1, 1}, {1, 1, 0}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) counterexample(i, j) = vals[i][j];
    double tau = definiteness_tolerance(counterexample);
    if (is_positive_definite(counterexample, tau) ||
        is_positive_semidefinite(counterexample, tau)) {
        detail = "the leading-minor counterexample matrix was accepted";
        return false;
    }
    detail = "1000 matrices agree across cholesky, minors, eigenvalues";
    return true;
}

bool criterion5_scenario_law(std::string& detail) {
    UncertainProblem p = testbed();
    const int trials = 2000;
    const size_t n_samples = 50;
    int exceed_05 = 0, exceed_10 = 0;
    for (int t = 0; t < trials; ++t) {
        ScenarioSet s = draw(p.params, n_samples, derive_seed(52000, "trial", t), "design");
        SolveResult r = solve_scenario(p, s);
        if (r.status != SolveStatus::Optimal) {
            detail = "solve failed at trial " + std::to_string(t);
            return false;
        }
        double violation = 1.0 - r.theta[0];
        if (violation > 0.05) ++exceed_05;
        if (violation > 0.10) ++exceed_10;
    }
    auto bound = [&](double eps) {
        double pstar = std::pow(1.0 - eps, static_cast<double>(n_samples));
        return pstar + 3.0 * std::sqrt(pstar * (1.0 - pstar) / trials);
    };
    double f05 = static_cast<double>(exceed_05) / trials;
    double f10 = static_cast<double>(exceed_10) / trials;
    detail = "freq(violation > .05) = " + dtos(f05) + " vs " + dtos(bound(0.05)) +
             ", freq(violation > .10) = " + dtos(f10) + " vs " + dtos(bound(0.10));
    return f05 <= bound(0.05) && f10 <= bound(0.10);
}

bool criterion6_lemma1(std::string& detail) {
    UncertainProblem p = testbed();
    SequentialConfig cfg;
    cfg.levels = Levels(0.2, 0.1, 0.0);
    cfg.kt = 10;
    int certified = 0, violated = 0;
    for (int i = 0; i < 200; ++i) {
        cfg.seed = derive_seed(66000, "master", i);
        SequentialOutcome o = run_sequential(p, cfg);
        if (o.status != SequentialStatus::ProbabilisticSolution) continue;
        ++certified;
        if (1.0 - o.theta[0] > cfg.levels.rho + cfg.levels.epsilon) ++violated;
    }
    if (certified == 0) {
        detail = "no certified outcomes";
        return false;
    }
    // one-sided binomial test at 95%: consistent with p <= delta iff the
    // exact 95% lower confidence bound for p stays at or below delta
    double lo = 0.0, hi = 1.0;
    if (violated > 0) {
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            double tail = 1.0 - binomial_cdf(violated - 1, certified, mid);  // P(X >= k)
            (tail < 0.05 ? lo : hi) = mid;
        }
    }
    double lower_bound = 0.5 * (lo + hi);
    if (violated == 0) lower_bound = 0.0;
    detail = std::to_string(violated) + " of " + std::to_string(certified) +
             " certified candidates exceed rho+epsilon; 95% lower bound " + dtos(lower_bound);
    return lower_bound <= cfg.levels.delta;
}

struct RepException {
    double validation_mean = 0.0;
    double iteration_mean = 0.0;
    double objective_mean = 0.0;
};

bool criterion7_reproduction(std::string& detail) {
    UncertainProblem p = manipulator();
    const int runs = 20;
    double sum_validation = 0.0, sum_iteration = 0.0, sum_objective = 0.0;
    for (int i = 0; i < runs; ++i) {
        SequentialConfig cfg;
        cfg.levels = Levels(0.2, 0.01, 0.0);
        cfg.kt = 10;
        cfg.bound_kt = 5000;  // schedule termination parameter at reference scale
        cfg.seed = derive_seed(20240808, "repeat", i);
        cfg.solver.restarts = 2;
        SequentialOutcome o = run_sequential(p, cfg);
        if (o.status == SequentialStatus::Infeasible) {
            detail = "run " + std::to_string(i) + " did not terminate with a candidate";
            return false;
        }
        long long last_validation = 0;
        for (const IterationRecord& r : o.log)
            if (r.m_validation > 0) last_validation = r.m_validation;
        sum_validation += static_cast<double>(last_validation);
        sum_iteration += static_cast<double>(o.exit_iteration);
        sum_objective += o.objective;
        std::fprintf(stderr, "  run %d: %s k=%lld obj=%.4f M=%lld\n", i,
                     to_string(o.status).c_str(), o.exit_iteration, o.objective,
                     last_validation);
    }
    double mv = sum_validation / runs;
    double mi = sum_iteration / runs;
    double mo = sum_objective / runs;
    detail = "mean validation samples " + dtos(mv) + ", mean exit iteration " + dtos(mi) +
             ", mean objective " + dtos(mo);
    return std::fabs(mv - 57.0) <= 5.0 && mi <= 12.0 && mo >= 0.9 && mo <= 1.2;
}

bool criterion8_determinism(std::string& detail) {
    // (a) a full sequential run on the manipulator model
    auto run7 = [&]() {
        UncertainProblem p = manipulator();
        SequentialConfig cfg;
        cfg.levels = Levels(0.2, 0.01, 0.0);
        cfg.kt = 10;
        cfg.bound_kt = 5000;
        cfg.seed = derive_seed(20240808, "repeat", 0);
        cfg.solver.restarts = 2;
        return outcome_json(run_sequential(p, cfg), true);
    };
    // (b) a batch of scenario solves from the scenario-law family
    auto run5 = [&]() {
        UncertainProblem p = testbed();
        std::ostringstream log;
        for (int t = 0; t < 50; ++t) {
            ScenarioSet s = draw(p.params, 50, derive_seed(52000, "trial", t), "design");
            SolveResult r = solve_scenario(p, s);
            log << to_string(r.status) << ',' << dtos(r.objective) << '\n';
        }
        return log.str();
    };
    // (c) the bound table over the criterion-3 grid
    auto run3 = [&]() {
        std::ostringstream log;
        for (double eps : {0.005, 0.01, 0.05, 0.1, 0.2})
            for (double delta : {1e-2, 1e-6, 1e-10}) {
                Levels l(eps, delta, 0.0);
                log << sample_bound_one_sided(l, 13, 11, Strictness::Strict).n << ','
                    << sample_bound_two_sided(l, 13, 11, Strictness::Strict).n << '\n';
            }
        return log.str();
    };
    std::string a1 = run7(), a2 = run7();
    std::string b1 = run5(), b2 = run5();
    std::string c1 = run3(), c2 = run3();
    detail = "hashes " + fnv1a64_hex(a1) + " / " + fnv1a64_hex(b1) + " / " + fnv1a64_hex(c1);
    return fnv1a64(a1) == fnv1a64(a2) && fnv1a64(b1) == fnv1a64(b2) &&
           fnv1a64(c1) == fnv1a64(c2);
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion(1, "one-sided sample bound reproduces the five reference counts to 3 "
                 "significant figures", criterion1_bounds);
    criterion(2, "validation bound lands at 56 and 162 for the reference levels",
              criterion2_validation);
    criterion(3, "one-sided bound dominates and the log-log growth orders separate",
              criterion3_growth);
    criterion(4, "cholesky definiteness checks agree with minor and eigenvalue oracles",
              criterion4_definiteness);
    criterion(5, "scenario optimum obeys the (1-eps)^N violation law on the analytic testbed",
              criterion5_scenario_law);
    criterion(6, "certified sequential outcomes violate rho+epsilon at most a delta fraction",
              criterion6_lemma1);
    criterion(7, "scaled manipulator reproduction: 20 runs terminate with reference-level "
                 "statistics", criterion7_reproduction);
    criterion(8, "reruns with identical seeds hash to identical canonical logs",
              criterion8_determinism);
    if (g_failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criteria FAILED\n", g_failures);
    return g_failures;
}

#include "solver.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <functional>
#include <map>

namespace randlmi {

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::IterationLimit: return "iteration-limit";
        case SolveStatus::NumericalFailure: return "numerical-failure";
        case SolveStatus::AllRestartsFailed: return "all-restarts-failed";
    }
    return "unknown";
}

double strictness_margin(const UncertainProblem& p) {
    std::vector<double> nominal = p.params.nominal_values();
    double scale = 0.0;
    std::vector<std::string> names = p.params.names();
    ParamBinding binding{names, nominal};
    for (const ConstraintBlock& b : p.blocks) {
        for (const ExprPtr& e : b.constant)
            if (e) scale = std::max(scale, std::fabs(eval_expr(*e, binding)));
    }
    return 1e-6 * (1.0 + scale);
}

namespace {

// ---------------------------------------------------------------------------
// Barrier machinery. The working program is a list of shifted affine blocks
// G_m(theta) = a0_m - shift_m I + sum_i theta_i A_im required positive
// definite, plus box constraints |theta_i| <= R handled as 1x1 blocks.
// ---------------------------------------------------------------------------

struct WorkBlock {
    Mat a0;  // shift already folded in
    std::vector<std::pair<int, Mat>> terms;
};

struct WorkProgram {
    int m = 0;
    std::vector<double> c;
    std::vector<WorkBlock> blocks;      // matrix blocks (dim >= 1)
    std::vector<double> box_radius;     // per-variable trust box radius
    std::vector<double> box_center;     // per-variable trust box center
    double nu = 0.0;                    // total barrier parameter (dims + 2m)

    void finalize() {
        if (box_center.empty()) box_center.assign(static_cast<size_t>(m), 0.0);
        nu = 2.0 * m;
        for (const WorkBlock& b : blocks) nu += b.a0.n();
    }
};

// Congruence-scales a block so its rows have comparable norms at the given
// reference point: G -> D G D with diagonal D. Positive definiteness of the
// block is exactly preserved, so the feasible set does not change, while the
// barrier linear algebra sees far better conditioning.
void equilibrate_block(WorkBlock& b, std::span<const double> theta_ref) {
    const int n = b.a0.n();
    if (n <= 1) return;
    Mat ref = b.a0;
    for (const auto& [idx, mat] : b.terms) ref.add_scaled(mat, theta_ref[idx]);
    double max_row = 0.0;
    std::vector<double> row(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double r = 0.0;
        for (int j = 0; j < n; ++j) r = std::max(r, std::fabs(ref(i, j)));
        row[i] = r;
        max_row = std::max(max_row, r);
    }
    if (max_row <= 0.0) return;
    std::vector<double> d(n);
    bool nontrivial = false;
    for (int i = 0; i < n; ++i) {
        double r = std::max(row[i], 1e-8 * max_row);
        d[i] = 1.0 / std::sqrt(r);
        if (max_row > 10.0 * r) nontrivial = true;  // rows differ by over a decade
    }
    if (!nontrivial) return;
    auto scale_mat = [&](Mat& mat) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) mat(i, j) *= d[i] * d[j];
    };
    scale_mat(b.a0);
    for (auto& [idx, mat] : b.terms) scale_mat(mat);
}

struct BlockScratch {
    Mat value;            // assembled G
    Mat chol;             // Cholesky factor
    Mat w;                // G^{-1}
    std::vector<Mat> u;   // W * A_i per term
};

class Barrier {
public:
    Barrier(const WorkProgram& prog, const SolveOptions& opts)
        : prog_(prog), opts_(opts) {
        scratch_.resize(prog.blocks.size());
        for (size_t b = 0; b < prog.blocks.size(); ++b) {
            int n = prog.blocks[b].a0.n();
            scratch_[b].value = Mat(n);
            scratch_[b].w = Mat(n);
            scratch_[b].u.assign(prog.blocks[b].terms.size(), Mat(n));
        }
        grad_.resize(prog.m);
        dir_.resize(prog.m);
        hess_ = Mat(prog.m);
    }

    long long newton_steps() const { return newton_steps_; }

    // Barrier parameter making theta closest to central: minimizes the
    // Newton decrement of t*c + grad_phi over t. Returns false when theta is
    // not a useful warm start (negative or tiny optimal t).
    bool warm_t(const std::vector<double>& theta, double& t_out) {
        if (!gradient_hessian(theta, 0.0)) return false;
        const int m = prog_.m;
        std::vector<double> scale(m);
        for (int i = 0; i < m; ++i)
            scale[i] = 1.0 / std::sqrt(std::max(hess_(i, i), 1e-300));
        Mat h(m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) h(i, j) = hess_(i, j) * scale[i] * scale[j];
        std::vector<double> cs(m), gs(m), x1(m), x2(m);
        for (int i = 0; i < m; ++i) {
            cs[i] = prog_.c[i] * scale[i];
            gs[i] = grad_[i] * scale[i];  // grad at t=0 is the barrier gradient
        }
        Mat h2 = h;
        if (!solve_spd(std::move(h), cs, x1)) return false;
        if (!solve_spd(std::move(h2), gs, x2)) return false;
        double chc = 0.0, chg = 0.0;
        for (int i = 0; i < m; ++i) {
            chc += cs[i] * x1[i];
            chg += cs[i] * x2[i];
        }
        if (!(chc > 0.0)) return false;
        double t = -chg / chc;
        if (!(t > 1e-12) || !std::isfinite(t)) return false;
        t_out = t;
        return true;
    }

    // Assembles block b at theta into out.
    void block_value(size_t b, std::span<const double> theta, Mat& out) const {
        const WorkBlock& blk = prog_.blocks[b];
        out = blk.a0;
        for (const auto& [idx, mat] : blk.terms) out.add_scaled(mat, theta[idx]);
    }

    // True when theta is strictly feasible (all blocks PD, box strict).
    bool strictly_feasible(std::span<const double> theta) {
        for (int i = 0; i < prog_.m; ++i)
            if (std::fabs(theta[i] - prog_.box_center[i]) >= prog_.box_radius[i]) return false;
        Mat tmp;
        for (size_t b = 0; b < prog_.blocks.size(); ++b) {
            block_value(b, theta, tmp);
            if (!cholesky_succeeds(std::move(tmp))) return false;
        }
        return true;
    }

    // extended precision keeps the line search meaningful when hundreds of
    // log-det terms nearly cancel
    long double barrier_value(std::span<const double> theta, double t, bool& ok) {
        ok = true;
        long double f = 0.0;
        for (int i = 0; i < prog_.m; ++i) {
            double d = theta[i] - prog_.box_center[i];
            double lo = prog_.box_radius[i] + d;
            double hi = prog_.box_radius[i] - d;
            if (lo <= 0.0 || hi <= 0.0) {
                ok = false;
                return 0.0;
            }
            f -= std::log(static_cast<long double>(lo)) + std::log(static_cast<long double>(hi));
        }
        Mat tmp;
        for (size_t b = 0; b < prog_.blocks.size(); ++b) {
            block_value(b, theta, tmp);
            if (!cholesky_in_place(tmp)) {
                ok = false;
                return 0.0;
            }
            for (int i = 0; i < tmp.n(); ++i)
                f -= 2.0 * std::log(static_cast<long double>(tmp(i, i)));
        }
        for (int i = 0; i < prog_.m; ++i)
            f += static_cast<long double>(t) * prog_.c[i] * theta[i];
        return f;
    }

    // One centering run: Newton iterations at fixed t from a strictly
    // feasible theta (updated in place). Returns false on numerical failure.
    // centered reports whether the decrement tolerance was actually met;
    // otherwise the run ended on the iteration cap or a step-size floor.
    bool center(std::vector<double>& theta, double t, std::string& err, bool& centered) {
        centered = false;
        int tiny_steps = 0;
        for (int it = 0; it < opts_.max_newton; ++it) {
            if (!gradient_hessian(theta, t)) {
                err = "lost positive definiteness while centering";
                return false;
            }
            // Newton direction: H d = -g, solved on the diagonally
            // equilibrated system to survive badly scaled variables
            const int m = prog_.m;
            std::vector<double> scale(m);
            for (int i = 0; i < m; ++i)
                scale[i] = 1.0 / std::sqrt(std::max(hess_(i, i), 1e-300));
            Mat h(m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) h(i, j) = hess_(i, j) * scale[i] * scale[j];
            std::vector<double> rhs(static_cast<size_t>(m));
            for (int i = 0; i < m; ++i) rhs[i] = -grad_[i] * scale[i];
            double ridge = 0.0;
            bool solved = false;
            for (int attempt = 0; attempt < 8 && !solved; ++attempt) {
                Mat hr = h;
                if (ridge > 0.0) hr.shift_diag(ridge);
                solved = solve_spd(std::move(hr), rhs, dir_);
                if (!solved) ridge = ridge == 0.0 ? 1e-12 : ridge * 100.0;
            }
            if (!solved) {
                err = "Newton system not positive definite";
                return false;
            }
            for (int i = 0; i < m; ++i) dir_[i] *= scale[i];
            double decrement2 = 0.0;
            for (size_t i = 0; i < grad_.size(); ++i) decrement2 -= grad_[i] * dir_[i];
            if (decrement2 < 0.0) {
                err = "non-descent Newton direction";
                return false;
            }
            if (0.5 * decrement2 <= opts_.newton_tol) {
                centered = true;
                return true;
            }

            // backtracking line search on the barrier objective
            bool ok = false;
            long double f0 = barrier_value(theta, t, ok);
            if (!ok) {
                err = "infeasible centering start";
                return false;
            }
            double g_dot_d = -decrement2;
            double alpha = 1.0;
            std::vector<double> trial(theta.size());
            bool accepted = false;
            for (int ls = 0; ls < 40; ++ls) {
                for (size_t i = 0; i < theta.size(); ++i) trial[i] = theta[i] + alpha * dir_[i];
                bool feas = false;
                long double f1 = barrier_value(trial, t, feas);
                if (feas && f1 <= f0 + 1e-4L * alpha * g_dot_d) {
                    theta = trial;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            ++newton_steps_;
            if (!accepted) {
                // Tiny steps near convergence are benign; a failed search far
                // from convergence is a genuine numerical failure.
                if (0.5 * decrement2 <= 1e3 * opts_.newton_tol) {
                    centered = true;
                    return true;
                }
                err = "line search failed";
                return false;
            }
            // roundoff floor: successive microscopic steps mean the Newton
            // model has run out of float precision at this conditioning
            if (alpha <= 1e-5) {
                if (++tiny_steps >= 3) return true;
            } else {
                tiny_steps = 0;
            }
        }
        return true;  // hit max_newton; centering is approximate but usable
    }

private:
    bool gradient_hessian(std::span<const double> theta, double t) {
        const int m = prog_.m;
        gacc_.assign(static_cast<size_t>(m), 0.0L);
        hacc_.assign(static_cast<size_t>(m) * m, 0.0L);
        for (int i = 0; i < m; ++i) gacc_[i] = static_cast<long double>(t) * prog_.c[i];
        // box terms
        for (int i = 0; i < m; ++i) {
            double d = theta[i] - prog_.box_center[i];
            double lo = prog_.box_radius[i] + d;
            double hi = prog_.box_radius[i] - d;
            if (lo <= 0.0 || hi <= 0.0) return false;
            gacc_[i] += 1.0L / hi - 1.0L / lo;
            hacc_[static_cast<size_t>(i) * m + i] += 1.0L / (hi * hi) + 1.0L / (lo * lo);
        }
        for (size_t b = 0; b < prog_.blocks.size(); ++b) {
            const WorkBlock& blk = prog_.blocks[b];
            BlockScratch& s = scratch_[b];
            const int n = blk.a0.n();
            if (n == 1) {
                // scalar fast path
                double g = blk.a0(0, 0);
                for (const auto& [idx, mat] : blk.terms) g += theta[idx] * mat(0, 0);
                if (g <= 0.0) return false;
                for (const auto& [i, mi] : blk.terms) {
                    gacc_[i] -= static_cast<long double>(mi(0, 0)) / g;
                    for (const auto& [j, mj] : blk.terms)
                        hacc_[static_cast<size_t>(i) * m + j] +=
                            static_cast<long double>(mi(0, 0)) * mj(0, 0) / (g * g);
                }
                continue;
            }
            block_value(b, theta, s.value);
            s.chol = s.value;
            if (!cholesky_in_place(s.chol)) return false;
            invert_from_chol(s.chol, s.w);
            for (size_t k = 0; k < blk.terms.size(); ++k) multiply(s.w, blk.terms[k].second, s.u[k]);
            for (size_t k = 0; k < blk.terms.size(); ++k) {
                int i = blk.terms[k].first;
                long double tr = 0.0;
                for (int d = 0; d < n; ++d) tr += s.u[k](d, d);
                gacc_[i] -= tr;
                for (size_t l = k; l < blk.terms.size(); ++l) {
                    int j = blk.terms[l].first;
                    long double hij = 0.0;
                    for (int a = 0; a < n; ++a)
                        for (int c = 0; c < n; ++c)
                            hij += static_cast<long double>(s.u[k](a, c)) * s.u[l](c, a);
                    hacc_[static_cast<size_t>(i) * m + j] += hij;
                    if (l != k) hacc_[static_cast<size_t>(j) * m + i] += hij;
                }
            }
        }
        for (int i = 0; i < m; ++i) grad_[i] = static_cast<double>(gacc_[i]);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                hess_(i, j) = static_cast<double>(hacc_[static_cast<size_t>(i) * m + j]);
        return true;
    }

    static void multiply(const Mat& a, const Mat& b, Mat& out) {
        const int n = a.n();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int k = 0; k < n; ++k) s += a(i, k) * b(k, j);
                out(i, j) = s;
            }
    }

    static void invert_from_chol(const Mat& chol, Mat& inv) {
        const int n = chol.n();
        std::vector<double> col(n), e(n, 0.0);
        for (int c = 0; c < n; ++c) {
            e[c] = 1.0;
            for (int i = 0; i < n; ++i) {
                double s = e[i];
                for (int j = 0; j < i; ++j) s -= chol(i, j) * col[j];
                col[i] = s / chol(i, i);
            }
            for (int i = n - 1; i >= 0; --i) {
                double s = col[i];
                for (int j = i + 1; j < n; ++j) s -= chol(j, i) * col[j];
                col[i] = s / chol(i, i);
            }
            for (int i = 0; i < n; ++i) inv(i, c) = col[i];
            e[c] = 0.0;
        }
        inv.symmetrize();
    }

    const WorkProgram& prog_;
    const SolveOptions& opts_;
    std::vector<BlockScratch> scratch_;
    std::vector<double> grad_, dir_;
    std::vector<long double> gacc_, hacc_;
    Mat hess_;
    long long newton_steps_ = 0;
};

struct PathResult {
    bool ok = false;
    std::vector<double> theta;
    double objective = 0.0;
    double gap = 0.0;
    bool hit_iteration_limit = false;
    bool stopped_early = false;
    long long newton_steps = 0;
    std::string message;
};

using EarlyStop = std::function<bool(const std::vector<double>&)>;

// Central-path following from a strictly feasible start. An early-stop
// predicate, checked after each centering, lets feasibility phases bail out
// once a good-enough iterate appears. persistent_climb keeps the path alive
// through ill-conditioned regions as long as the objective still moves
// (feasibility phases); otherwise two uncentered runs end the path, which
// suits descent phases where the alternation partner can take over.
PathResult follow_path(const WorkProgram& prog, std::vector<double> theta,
                       const SolveOptions& opts, const EarlyStop* early_stop = nullptr,
                       bool persistent_climb = false, bool warm_start_t = true) {
    Barrier barrier(prog, opts);
    PathResult out;
    if (!barrier.strictly_feasible(theta)) {
        out.message = "start point is not strictly feasible";
        return out;
    }
    double c_norm = 0.0;
    for (double v : prog.c) c_norm += std::fabs(v);
    auto objective = [&](const std::vector<double>& th) {
        double o = 0.0;
        for (int i = 0; i < prog.m; ++i) o += prog.c[i] * th[i];
        return o;
    };
    if (c_norm == 0.0) {
        // pure feasibility: one centering pass gives the analytic center
        std::string err;
        bool centered = false;
        if (!barrier.center(theta, 1.0, err, centered)) {
            out.message = err;
            out.newton_steps = barrier.newton_steps();
            return out;
        }
        out.ok = true;
        out.theta = std::move(theta);
        out.objective = 0.0;
        out.gap = 0.0;
        out.newton_steps = barrier.newton_steps();
        return out;
    }
    // start the path at the barrier parameter that makes the warm point
    // closest to central, so no effort is spent walking away from it; cold
    // starts fall back to an initial duality gap of 1 + |objective|
    double t = 0.0;
    if (!warm_start_t || !barrier.warm_t(theta, t) || t <= 0.0)
        t = std::max(1.0, prog.nu / (1.0 + std::fabs(objective(theta))));
    std::string err;
    int outer = 0;
    int stalled_centerings = 0;
    for (; outer < opts.max_outer; ++outer) {
        bool centered = false;
        double obj_before = objective(theta);
        if (!barrier.center(theta, t, err, centered)) {
            out.message = err;
            out.newton_steps = barrier.newton_steps();
            return out;
        }
        // an uncentered run that still moved the objective is a slow climb
        // through an ill-conditioned region, not a terminal precision floor
        bool progressed =
            persistent_climb &&
            std::fabs(obj_before - objective(theta)) > 1e-6 * (1.0 + std::fabs(obj_before));
        if (!centered && !progressed) {
            // two dead runs in a row: float precision is exhausted at this
            // conditioning, so the gap estimate stops being meaningful
            if (++stalled_centerings >= 2) {
                out.ok = true;
                out.theta = std::move(theta);
                out.objective = objective(out.theta);
                out.gap = prog.nu / t;
                out.newton_steps = barrier.newton_steps();
                out.message = "centering stalled at the precision floor";
                out.hit_iteration_limit = true;
                return out;
            }
        } else {
            stalled_centerings = 0;
        }
        if (early_stop && (*early_stop)(theta)) {
            out.ok = true;
            out.stopped_early = true;
            out.theta = std::move(theta);
            out.objective = objective(out.theta);
            out.gap = prog.nu / t;
            out.newton_steps = barrier.newton_steps();
            return out;
        }
        double gap = prog.nu / t;
        double obj = objective(theta);
        if (gap <= opts.gap_tol * (1.0 + std::fabs(obj))) {
            out.ok = true;
            out.theta = std::move(theta);
            out.objective = obj;
            out.gap = gap;
            out.newton_steps = barrier.newton_steps();
            return out;
        }
        t /= opts.mu_factor;
    }
    out.ok = true;
    out.hit_iteration_limit = true;
    out.theta = std::move(theta);
    out.objective = objective(out.theta);
    out.gap = prog.nu / t;
    out.newton_steps = barrier.newton_steps();
    out.message = "barrier outer-iteration limit reached";
    return out;
}

// Phase 1: maximize the uniform slack t with G_m(theta) >= t I. Returns the
// achieved margin and the corresponding theta.
struct FeasResult {
    bool ok = false;          // solver ran to completion
    double margin = -1.0;     // best uniform slack found
    std::vector<double> theta;
    long long newton_steps = 0;
    std::string message;
};

FeasResult find_feasible(const WorkProgram& prog, std::vector<double> theta0,
                         const SolveOptions& opts) {
    constexpr double kSlackCap = 1.0;
    // A margin this comfortable is plenty for the main barrier to start from;
    // thin feasible sets simply run the phase to optimality instead.
    constexpr double kSlackEnough = 0.02;

    // initial slack strictly below every block's least eigenvalue
    double min_eig = kSlackCap;
    Mat tmp;
    for (const WorkBlock& b : prog.blocks) {
        tmp = b.a0;
        for (const auto& [idx, mat] : b.terms) tmp.add_scaled(mat, theta0[idx]);
        min_eig = std::min(min_eig, sym_min_eigenvalue(tmp));
    }
    double slack0 = min_eig - 1.0 - 0.1 * std::fabs(min_eig);

    WorkProgram aux;
    aux.m = prog.m + 1;  // slack variable appended
    aux.c.assign(aux.m, 0.0);
    aux.c[prog.m] = -1.0;  // maximize t
    aux.box_radius = prog.box_radius;
    aux.box_radius.push_back(2.0 * std::fabs(slack0) + 16.0);
    aux.box_center = prog.box_center;
    if (aux.box_center.empty()) aux.box_center.assign(static_cast<size_t>(prog.m), 0.0);
    aux.box_center.push_back(0.0);
    aux.blocks.reserve(prog.blocks.size() + 1);
    for (const WorkBlock& b : prog.blocks) {
        WorkBlock nb;
        nb.a0 = b.a0;
        nb.terms = b.terms;
        Mat minus_i = Mat::identity(b.a0.n());
        for (int i = 0; i < minus_i.n(); ++i) minus_i(i, i) = -1.0;
        nb.terms.emplace_back(prog.m, std::move(minus_i));
        aux.blocks.push_back(std::move(nb));
    }
    {
        WorkBlock cap;
        cap.a0 = Mat(1);
        cap.a0(0, 0) = kSlackCap;
        Mat mt(1);
        mt(0, 0) = -1.0;
        cap.terms.emplace_back(prog.m, std::move(mt));
        aux.blocks.push_back(std::move(cap));
    }
    aux.finalize();

    std::vector<double> start = theta0;
    start.push_back(slack0);

    EarlyStop good_enough = [&](const std::vector<double>& th) {
        return th[prog.m] >= kSlackEnough;
    };
    PathResult pr = follow_path(aux, std::move(start), opts, &good_enough,
                                /*persistent_climb=*/true, /*warm_start_t=*/false);
    FeasResult out;
    out.newton_steps = pr.newton_steps;
    if (!pr.ok) {
        out.message = "feasibility phase failed: " + pr.message;
        return out;
    }
    out.ok = true;
    out.margin = pr.theta[prog.m];
    out.theta.assign(pr.theta.begin(), pr.theta.end() - 1);
    if (pr.hit_iteration_limit) out.message = "feasibility phase hit iteration limit";
    return out;
}

WorkProgram to_work_program(const ScenarioProgram& sp, const SolveOptions& opts) {
    WorkProgram wp;
    wp.m = sp.m_theta;
    wp.c = sp.objective;
    wp.box_radius.assign(wp.m, opts.box_radius);
    wp.blocks.reserve(sp.blocks.size());
    for (const AffineBlock& b : sp.blocks) {
        WorkBlock nb;
        nb.a0 = b.a0;
        if (b.shift != 0.0) nb.a0.shift_diag(-b.shift);
        nb.terms = b.terms;
        wp.blocks.push_back(std::move(nb));
    }
    wp.finalize();
    return wp;
}

double block_scale(const ScenarioProgram& sp) {
    double s = 0.0;
    for (const AffineBlock& b : sp.blocks) s = std::max(s, b.a0.norm_inf());
    return s;
}

}  // namespace

ScenarioProgram assemble(const UncertainProblem& p, const ScenarioSet& scenarios,
                         const SolveOptions& opts) {
    if (p.kind() != ProblemKind::LMI)
        throw SolveError("assemble: bilinear problems are stacked per alternation phase");
    if (p.layout.m_theta() > opts.max_m_theta)
        throw SolveError("assemble: variable count exceeds the desk-scale limit");
    ScenarioProgram sp;
    sp.m_theta = p.layout.m_theta();
    sp.objective = p.objective;
    sp.sigma = opts.sigma_override >= 0.0 ? opts.sigma_override : strictness_margin(p);
    for (size_t s = 0; s < scenarios.n_samples; ++s) {
        std::vector<InstantiatedConstraint> inst = instantiate(p, scenarios.row(s));
        for (InstantiatedConstraint& ic : inst) {
            AffineBlock b;
            b.a0 = std::move(ic.constant);
            b.shift = ic.strict ? sp.sigma : 0.0;
            for (auto& [idx, mat] : ic.linear) b.terms.emplace_back(idx, std::move(mat));
            sp.stacked_dim += b.dim();
            sp.blocks.push_back(std::move(b));
        }
    }
    if (sp.stacked_dim > opts.max_stacked_dim)
        throw SolveError("assemble: stacked constraint dimension exceeds the desk-scale limit");
    return sp;
}

SolveResult solve_scenario_lmi(const ScenarioProgram& sp, const SolveOptions& opts) {
    SolveResult res;
    res.sigma = sp.sigma;
    WorkProgram wp = to_work_program(sp, opts);

    std::vector<double> theta0(static_cast<size_t>(sp.m_theta), 0.0);
    FeasResult feas = find_feasible(wp, theta0, opts);
    res.newton_steps += feas.newton_steps;
    if (!feas.ok) {
        res.status = SolveStatus::NumericalFailure;
        res.message = feas.message;
        return res;
    }
    double feas_tol = 1e-9 * (1.0 + block_scale(sp));
    if (feas.margin <= feas_tol) {
        res.status = SolveStatus::Infeasible;
        res.message = "no strictly feasible point: max uniform margin " +
                      std::to_string(feas.margin) + " <= tolerance " + std::to_string(feas_tol);
        return res;
    }

    PathResult pr = follow_path(wp, feas.theta, opts);
    res.newton_steps += pr.newton_steps;
    if (!pr.ok) {
        res.status = SolveStatus::NumericalFailure;
        res.message = pr.message;
        return res;
    }
    res.status = pr.hit_iteration_limit ? SolveStatus::IterationLimit : SolveStatus::Optimal;
    res.theta = pr.theta;
    res.objective = pr.objective;
    res.message = pr.message;

    double worst = std::numeric_limits<double>::infinity();
    Mat tmp;
    for (const AffineBlock& b : sp.blocks) {
        tmp = b.a0;
        for (const auto& [idx, mat] : b.terms) tmp.add_scaled(mat, res.theta[idx]);
        worst = std::min(worst, sym_min_eigenvalue(tmp));
    }
    res.worst_min_eigenvalue = worst;
    return res;
}

namespace {

// ---------------------------------------------------------------------------
// Bilinear alternation.
// ---------------------------------------------------------------------------

struct InstantiatedScenario {
    // sample major, block minor; strictness resolved to shifts
    std::vector<InstantiatedConstraint> stacked;
    std::vector<double> shift;  // per stacked constraint
};

// Affine program in the free entries given the fixed entries of theta.
WorkProgram phase_program(const InstantiatedScenario& inst, const std::vector<double>& objective,
                          const std::vector<double>& theta, const std::vector<char>& free_mask,
                          const std::vector<int>& global_to_local, int n_free,
                          const SolveOptions& opts) {
    WorkProgram wp;
    wp.m = n_free;
    wp.c.assign(n_free, 0.0);
    for (size_t g = 0; g < objective.size(); ++g)
        if (free_mask[g]) wp.c[global_to_local[g]] = objective[g];
    wp.box_radius.assign(n_free, opts.box_radius);
    wp.blocks.reserve(inst.stacked.size());
    std::vector<double> local_ref(static_cast<size_t>(n_free), 0.0);
    for (size_t g = 0; g < theta.size(); ++g)
        if (free_mask[g]) local_ref[global_to_local[g]] = theta[g];
    for (size_t ci = 0; ci < inst.stacked.size(); ++ci) {
        const InstantiatedConstraint& ic = inst.stacked[ci];
        WorkBlock b;
        b.a0 = ic.constant;
        b.a0.shift_diag(-inst.shift[ci]);
        std::map<int, Mat> terms;  // local index -> coefficient
        for (const auto& [gi, mat] : ic.linear) {
            if (free_mask[gi]) {
                auto it = terms.try_emplace(global_to_local[gi], Mat(ic.dim)).first;
                it->second.add_scaled(mat, 1.0);
            } else {
                b.a0.add_scaled(mat, theta[gi]);
            }
        }
        for (const auto& [pair, mat] : ic.bilinear) {
            auto [xi, yi] = pair;
            bool xf = free_mask[xi], yf = free_mask[yi];
            if (xf && yf)
                throw SolveError("alternation phase left a bilinear pair fully free");
            if (!xf && !yf) {
                b.a0.add_scaled(mat, theta[xi] * theta[yi]);
            } else {
                int fg = xf ? xi : yi;
                double coeff = xf ? theta[yi] : theta[xi];
                auto it = terms.try_emplace(global_to_local[fg], Mat(ic.dim)).first;
                it->second.add_scaled(mat, coeff);
            }
        }
        for (auto& [li, mat] : terms) b.terms.emplace_back(li, std::move(mat));
        equilibrate_block(b, local_ref);
        wp.blocks.push_back(std::move(b));
    }
    wp.finalize();
    return wp;
}

// Trust box [theta - r, theta + r] intersected with the global box; keeps
// every phase iterate inside the solve-wide trust region.
void clamped_trust_box(double theta_i, double r, double global_r, double& center,
                       double& radius) {
    double lo = std::max(theta_i - r, -global_r);
    double hi = std::min(theta_i + r, global_r);
    center = 0.5 * (lo + hi);
    radius = std::max(0.5 * (hi - lo), 1e-12);
}

double full_objective(const std::vector<double>& c, const std::vector<double>& theta) {
    double o = 0.0;
    for (size_t i = 0; i < c.size(); ++i) o += c[i] * theta[i];
    return o;
}

// Least eigenvalue margin of all shifted constraints at theta.
double joint_margin(const InstantiatedScenario& inst, const std::vector<double>& theta) {
    double worst = std::numeric_limits<double>::infinity();
    for (size_t ci = 0; ci < inst.stacked.size(); ++ci) {
        Mat m = inst.stacked[ci].assemble(theta);
        m.shift_diag(-inst.shift[ci]);
        worst = std::min(worst, sym_min_eigenvalue(m));
    }
    return worst;
}

}  // namespace

SolveResult solve_scenario_bmi(const UncertainProblem& p, const ScenarioSet& scenarios,
                               const SolveOptions& opts) {
    if (p.kind() != ProblemKind::BMI)
        throw SolveError("solve_scenario_bmi: problem has no y-group variables");
    const int m = p.layout.m_theta();
    if (m > opts.max_m_theta)
        throw SolveError("solve_scenario_bmi: variable count exceeds the desk-scale limit");

    const double sigma = opts.sigma_override >= 0.0 ? opts.sigma_override : strictness_margin(p);

    InstantiatedScenario inst;
    long long stacked_dim = 0;
    for (size_t s = 0; s < scenarios.n_samples; ++s) {
        std::vector<InstantiatedConstraint> one = instantiate(p, scenarios.row(s));
        for (InstantiatedConstraint& ic : one) {
            stacked_dim += ic.dim;
            inst.shift.push_back(ic.strict ? sigma : 0.0);
            inst.stacked.push_back(std::move(ic));
        }
    }
    if (stacked_dim > opts.max_stacked_dim)
        throw SolveError("solve_scenario_bmi: stacked constraint dimension exceeds the "
                         "desk-scale limit");

    // entries carrying bilinear coupling stay fixed in the opposite phase;
    // everything else (purely affine entries) is free in both phases
    std::vector<char> coupled(static_cast<size_t>(m), 0);
    for (const ConstraintBlock& b : p.blocks)
        for (const auto& [pair, g] : b.bilinear) {
            coupled[pair.first] = 1;
            coupled[pair.second] = 1;
        }
    std::vector<char> x_phase_free(static_cast<size_t>(m)), y_phase_free(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        bool is_x = p.layout.group_of(i) == VarGroup::X;
        x_phase_free[i] = is_x || !coupled[i];
        y_phase_free[i] = !is_x || !coupled[i];
    }
    auto locals = [&](const std::vector<char>& mask) {
        std::vector<int> g2l(static_cast<size_t>(m), -1);
        int n = 0;
        for (int i = 0; i < m; ++i)
            if (mask[i]) g2l[i] = n++;
        return std::make_pair(g2l, n);
    };
    auto [x_g2l, x_n] = locals(x_phase_free);
    auto [y_g2l, y_n] = locals(y_phase_free);

    std::vector<int> y_indices;
    for (int i = 0; i < m; ++i)
        if (p.layout.group_of(i) == VarGroup::Y) y_indices.push_back(i);
    if (opts.y_init && opts.y_init->size() != y_indices.size())
        throw SolveError("solve_scenario_bmi: y_init length does not match y-entry count");
    std::vector<int> coupled_y;
    for (int yi : y_indices)
        if (coupled[yi]) coupled_y.push_back(yi);

    const size_t blocks_per_sample = p.blocks.size();
    const size_t n_samples = scenarios.n_samples;

    // growing sample-prefix ladder: a candidate tuned on a prefix is a strong
    // warm start for the next stage, which keeps every descent short and in
    // a well-conditioned neighborhood
    std::vector<size_t> stages;
    for (size_t sz = std::min<size_t>(8, n_samples); sz < n_samples; sz *= 3)
        stages.push_back(sz);
    stages.push_back(n_samples);

    auto prefix = [&](size_t count) {
        InstantiatedScenario sub;
        sub.stacked.assign(inst.stacked.begin(),
                           inst.stacked.begin() + count * blocks_per_sample);
        sub.shift.assign(inst.shift.begin(), inst.shift.begin() + count * blocks_per_sample);
        return sub;
    };

    long long total_newton = 0;

    SolveOptions boot_opts = opts;
    boot_opts.gap_tol = std::max(opts.gap_tol, 1e-5);
    SolveOptions loose = opts;
    loose.gap_tol = std::max(opts.gap_tol, opts.descent_gap_tol);

    // One max-margin phase over the given free set at fixed complement.
    // Trusted mode confines the slack maximization to a box around the
    // incoming point (tight on objective-carrying entries), so feasible
    // points come out near the useful region instead of drifting to an
    // analytic-center with an enormous objective; global mode is the
    // fallback when no feasible point exists in the trust box.
    auto margin_phase = [&](const InstantiatedScenario& cur, int phase,
                            std::vector<double>& th, bool trusted) -> double {
        const auto& mask = phase == 0 ? x_phase_free : y_phase_free;
        const auto& g2l = phase == 0 ? x_g2l : y_g2l;
        int n_free = phase == 0 ? x_n : y_n;
        WorkProgram wp = phase_program(cur, p.objective, th, mask, g2l, n_free, opts);
        if (trusted) {
            wp.box_center.assign(static_cast<size_t>(n_free), 0.0);
            for (int i = 0; i < m; ++i)
                if (mask[i]) {
                    double rel = p.objective[i] != 0.0 ? 2.0 : 50.0;
                    clamped_trust_box(th[i], rel * (1.0 + std::fabs(th[i])), opts.box_radius,
                                      wp.box_center[g2l[i]], wp.box_radius[g2l[i]]);
                }
        }
        std::vector<double> start(static_cast<size_t>(n_free), 0.0);
        for (int i = 0; i < m; ++i)
            if (mask[i]) start[g2l[i]] = th[i];
        FeasResult fr = find_feasible(wp, std::move(start), boot_opts);
        total_newton += fr.newton_steps;
        if (!fr.ok) return -std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i)
            if (mask[i]) th[i] = fr.theta[g2l[i]];
        return joint_margin(cur, th);
    };

    // feasibility restoration near a warm start: maximize the slack over the
    // x-free entries inside a trust box around the current point, so a stage
    // handoff keeps the tuned objective instead of jumping to the max-margin
    // point
    auto restore_near = [&](const InstantiatedScenario& cur,
                            std::vector<double>& th) -> double {
        WorkProgram wp = phase_program(cur, p.objective, th, x_phase_free, x_g2l, x_n, opts);
        wp.box_center.assign(static_cast<size_t>(x_n), 0.0);
        for (int i = 0; i < m; ++i)
            if (x_phase_free[i]) {
                // keep objective-carrying entries pinned near their tuned
                // values; the certificate entries get room to move
                double rel = p.objective[i] != 0.0 ? 0.05 : 0.5;
                clamped_trust_box(th[i], rel * (1.0 + std::fabs(th[i])), opts.box_radius,
                                  wp.box_center[x_g2l[i]], wp.box_radius[x_g2l[i]]);
            }
        std::vector<double> start(static_cast<size_t>(x_n), 0.0);
        for (int i = 0; i < m; ++i)
            if (x_phase_free[i]) start[x_g2l[i]] = th[i];
        FeasResult fr = find_feasible(wp, std::move(start), boot_opts);
        total_newton += fr.newton_steps;
        if (!fr.ok) return -std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i)
            if (x_phase_free[i]) th[i] = fr.theta[x_g2l[i]];
        return joint_margin(cur, th);
    };

    // deterministic rescue for a stalled margin alternation: scan single
    // y-coordinate candidates, scoring each by the margin achievable over the
    // x-group; the best-margin candidate also lands in well-conditioned land
    auto probe_y_sweeps = [&](const InstantiatedScenario& cur, std::vector<double>& th,
                              bool trusted) -> bool {
        static constexpr double kScales[] = {0.01, 0.1, 0.5, 2.0};
        // low-precision scoring is plenty for ranking candidates
        SolveOptions probe_opts = boot_opts;
        probe_opts.gap_tol = 1e-3;
        probe_opts.max_newton = 25;
        auto score = [&](std::vector<double> cand) -> double {
            const auto& mask = x_phase_free;
            WorkProgram wp = phase_program(cur, p.objective, cand, mask, x_g2l, x_n, opts);
            if (trusted) {
                wp.box_center.assign(static_cast<size_t>(x_n), 0.0);
                for (int i = 0; i < m; ++i)
                    if (mask[i]) {
                        double rel = p.objective[i] != 0.0 ? 2.0 : 50.0;
                        clamped_trust_box(cand[i], rel * (1.0 + std::fabs(cand[i])),
                                          opts.box_radius, wp.box_center[x_g2l[i]],
                                          wp.box_radius[x_g2l[i]]);
                    }
            }
            std::vector<double> start(static_cast<size_t>(x_n), 0.0);
            for (int i = 0; i < m; ++i)
                if (mask[i]) start[x_g2l[i]] = cand[i];
            FeasResult fr = find_feasible(wp, std::move(start), probe_opts);
            total_newton += fr.newton_steps;
            if (!fr.ok) return -std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i)
                if (mask[i]) cand[i] = fr.theta[x_g2l[i]];
            return joint_margin(cur, cand);
        };
        double baseline = score(th);
        // coordinate-descent sweeps over the gains from a clean slate: each
        // coordinate adopts its best ladder value given the others, so paired
        // gain patterns emerge after a couple of sweeps
        std::vector<double> work = th;
        for (int yj : coupled_y) work[yj] = 0.0;
        double best = score(work);
        for (int sweep = 0; sweep < 2 && best <= 0.1; ++sweep) {
            bool moved = false;
            for (int yi : coupled_y) {
                double keep = work[yi];
                double coord_best = best;
                double coord_val = keep;
                for (double s : kScales) {
                    for (double sign : {1.0, -1.0}) {
                        std::vector<double> cand = work;
                        cand[yi] = sign * s;
                        double margin = score(cand);
                        if (opts.trace)
                            std::fprintf(stderr, "[bmi] probe y[%d]=%g margin %.6e\n", yi,
                                         sign * s, margin);
                        if (margin > coord_best) {
                            coord_best = margin;
                            coord_val = sign * s;
                        }
                    }
                    if (coord_best > 0.1) break;
                }
                if (coord_val != keep) {
                    work[yi] = coord_val;
                    best = coord_best;
                    moved = true;
                }
                if (best > 0.1) break;
            }
            if (!moved) break;
        }
        if (best <= baseline + 1e-12) return false;
        for (int yj : coupled_y) th[yj] = work[yj];
        return true;
    };

    // margin alternation with stall detection and the probe rescue
    auto bootstrap_attempt = [&](const InstantiatedScenario& cur, std::vector<double>& th,
                                 int restart, bool trusted) -> bool {
        double margin = joint_margin(cur, th);
        if (margin > 0.0) return true;
        int probes_left = 2;
        for (int round = 0; round < opts.max_boot_rounds; ++round) {
            double before = margin;
            for (int phase = 0; phase < 2; ++phase) {
                double got = margin_phase(cur, phase, th, trusted);
                if (opts.trace)
                    std::fprintf(stderr, "[bmi] restart %d boot %d phase %s margin %.6e\n",
                                 restart, round, phase == 0 ? "x" : "y", got);
                if (std::isfinite(got)) margin = got;
                if (margin > 0.0) return true;
            }
            bool stalled = margin <= before + std::max(1e-8, 0.3 * std::fabs(before));
            if (stalled) {
                if (probes_left-- > 0 && !coupled_y.empty() &&
                    probe_y_sweeps(cur, th, trusted)) {
                    margin = margin_phase(cur, 0, th, trusted);
                    if (opts.trace)
                        std::fprintf(stderr, "[bmi] probe confirm margin %.6e\n", margin);
                    if (margin > 0.0) return true;
                } else {
                    return false;
                }
            }
        }
        return joint_margin(cur, th) > 0.0;
    };
    auto bootstrap = [&](const InstantiatedScenario& cur, std::vector<double>& th,
                         int restart) -> bool {
        std::vector<double> saved = th;
        if (bootstrap_attempt(cur, th, restart, /*trusted=*/true)) return true;
        th = saved;
        return bootstrap_attempt(cur, th, restart, /*trusted=*/false);
    };

    // one objective-minimization phase; loose gap keeps iterates interior
    auto descent_phase = [&](const InstantiatedScenario& cur, int phase,
                             const SolveOptions& phase_opts, std::vector<double>& th,
                             bool& ok) -> double {
        const auto& mask = phase == 0 ? x_phase_free : y_phase_free;
        const auto& g2l = phase == 0 ? x_g2l : y_g2l;
        int n_free = phase == 0 ? x_n : y_n;
        WorkProgram wp = phase_program(cur, p.objective, th, mask, g2l, n_free, opts);
        std::vector<double> start(static_cast<size_t>(n_free), 0.0);
        for (int i = 0; i < m; ++i)
            if (mask[i]) start[g2l[i]] = th[i];
        PathResult pr = follow_path(wp, std::move(start), phase_opts);
        total_newton += pr.newton_steps;
        if (opts.trace)
            std::fprintf(stderr, "[bmi] descent phase %s ok=%d obj=%.9g %s\n",
                         phase == 0 ? "x" : "y", pr.ok ? 1 : 0, pr.objective,
                         pr.message.c_str());
        ok = pr.ok;
        if (!pr.ok) return 0.0;
        for (int i = 0; i < m; ++i)
            if (mask[i]) th[i] = pr.theta[g2l[i]];
        return full_objective(p.objective, th);
    };

    // alternating descent with recentering major rounds; returns the best
    // feasible objective found, or nothing on failure
    auto descend = [&](const InstantiatedScenario& cur, std::vector<double>& th,
                       int& rounds_out) -> std::optional<double> {
        double best_obj = std::numeric_limits<double>::infinity();
        std::vector<double> best_theta = th;
        int rounds = 0;
        double round_tol = std::max(opts.alt_tol, 2.0 * loose.gap_tol);
        for (int major = 0; major < 8; ++major) {
            double major_start = best_obj;
            double prev_obj = std::numeric_limits<double>::infinity();
            for (; rounds < opts.max_alt_rounds; ++rounds) {
                bool ok = true;
                double obj = 0.0;
                for (int phase = 0; phase < 2 && ok; ++phase)
                    obj = descent_phase(cur, phase, loose, th, ok);
                if (!ok) return std::nullopt;
                if (obj < best_obj) {
                    best_obj = obj;
                    best_theta = th;
                }
                // each phase minimizes from a feasible point at the previous
                // objective; a rise beyond the phase gap means the centering
                // hit its floor, so this pass stops at the best iterate
                bool wobble =
                    std::isfinite(prev_obj) &&
                    obj > prev_obj + 10.0 * loose.gap_tol * (1.0 + std::fabs(prev_obj));
                if (wobble || prev_obj - obj <= round_tol * (1.0 + std::fabs(obj))) {
                    ++rounds;
                    break;
                }
                prev_obj = obj;
            }
            if (rounds >= opts.max_alt_rounds) break;
            if (best_obj > major_start - 0.005 * (1.0 + std::fabs(best_obj))) break;
            th = best_theta;
            if (!(restore_near(cur, th) > 0.0)) {
                th = best_theta;
                break;
            }
        }
        th = best_theta;
        bool ok = true;
        double polished = descent_phase(cur, 0, opts, th, ok);  // full-precision polish
        if (ok && polished < best_obj) {
            best_obj = polished;
        } else {
            th = best_theta;
        }
        rounds_out = rounds;
        return best_obj;
    };

    SolveResult best;
    best.status = SolveStatus::AllRestartsFailed;
    best.sigma = sigma;
    best.message = "no restart reached a feasible point";
    int restarts_used = 0;

    for (int restart = 0; restart < std::max(1, opts.restarts); ++restart) {
        ++restarts_used;
        std::vector<double> theta(static_cast<size_t>(m), 0.0);
        if (restart == 0) {
            if (opts.y_init)
                for (size_t yi = 0; yi < y_indices.size(); ++yi)
                    theta[y_indices[yi]] = (*opts.y_init)[yi];
        } else {
            Rng rng(derive_seed(opts.seed, "bmi-restart", static_cast<uint64_t>(restart)));
            for (int yi : y_indices) theta[yi] = rng.uniform(-1.0, 1.0);
        }

        bool failed = false;
        int rounds = 0;
        double obj = std::numeric_limits<double>::infinity();
        for (size_t stage = 0; stage < stages.size() && !failed; ++stage) {
            InstantiatedScenario cur = prefix(stages[stage]);
            if (opts.trace)
                std::fprintf(stderr, "[bmi] restart %d stage %zu (%zu samples)\n", restart,
                             stage, stages[stage]);
            if (stage > 0 && joint_margin(cur, theta) <= 0.0) {
                double restored = restore_near(cur, theta);
                if (opts.trace)
                    std::fprintf(stderr, "[bmi] restart %d stage %zu restored margin %.6e\n",
                                 restart, stage, restored);
            }
            if (!bootstrap(cur, theta, restart)) {
                failed = true;
                break;
            }
            int stage_rounds = 0;
            std::optional<double> got = descend(cur, theta, stage_rounds);
            rounds += stage_rounds;
            if (!got) {
                failed = true;
                break;
            }
            obj = *got;
        }
        if (failed) continue;
        {
            double final_margin = joint_margin(inst, theta);
            double scale = 0.0;
            for (const InstantiatedConstraint& ic : inst.stacked)
                scale = std::max(scale, ic.assemble(theta).norm_inf());
            if (final_margin <= -1e-9 * (1.0 + scale)) continue;
        }

        obj = full_objective(p.objective, theta);
        if (best.status != SolveStatus::Optimal || obj < best.objective) {
            best.status = SolveStatus::Optimal;
            best.theta = theta;
            best.objective = obj;
            best.alternation_rounds = rounds;
            best.message.clear();
            double worst = std::numeric_limits<double>::infinity();
            for (const InstantiatedConstraint& ic : inst.stacked) {
                Mat v = ic.assemble(theta);
                worst = std::min(worst, sym_min_eigenvalue(v));
            }
            best.worst_min_eigenvalue = worst;
        }
    }
    best.newton_steps = total_newton;
    best.restarts_used = restarts_used;
    return best;
}

SolveResult solve_scenario(const UncertainProblem& p, const ScenarioSet& scenarios,
                           const SolveOptions& opts) {
    if (p.kind() == ProblemKind::LMI)
        return solve_scenario_lmi(assemble(p, scenarios, opts), opts);
    return solve_scenario_bmi(p, scenarios, opts);
}

}  // namespace randlmi

#include "learning.hpp"

#include <cmath>
#include <numbers>

namespace randlmi {

namespace {
constexpr double kE = std::numbers::e;

long long ceil_to_count(double raw) {
    if (!(raw > 0.0)) return 1;
    if (raw > 9e15) throw ParameterError("sample bound overflows a 64-bit count");
    return std::max<long long>(1, static_cast<long long>(std::ceil(raw)));
}
}  // namespace

Levels::Levels(double eps, double del, double r) : epsilon(eps), delta(del), rho(r) {
    if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("epsilon must lie in (0,1)");
    if (!(del > 0.0 && del < 1.0)) throw ParameterError("delta must lie in (0,1)");
    if (!(r >= 0.0 && r < 1.0)) throw ParameterError("rho must lie in [0,1)");
}

double boolean_vc_bound(long long gamma, long long eta, int m_theta) {
    if (gamma < 1 || eta < 1 || m_theta < 1)
        throw ParameterError("boolean_vc_bound: arguments must be >= 1");
    return 2.0 * m_theta *
           std::log2(4.0 * kE * static_cast<double>(gamma) * static_cast<double>(eta));
}

double vc_bound_strict(int m_theta, int n) {
    if (m_theta < 1 || n < 1) throw ParameterError("vc_bound_strict: arguments must be >= 1");
    return boolean_vc_bound(n, n, m_theta);
}

double vc_bound_nonstrict(int m_theta, int n) {
    if (m_theta < 1 || n < 1) throw ParameterError("vc_bound_nonstrict: arguments must be >= 1");
    if (n > 1000) throw ParameterError("vc_bound_nonstrict: n limited to 1000");
    return 2.0 * m_theta * (std::log2(4.0 * kE * n) + static_cast<double>(n));
}

double two_sided_failure_bound(long long n, double epsilon, double d) {
    if (n < 1) throw ParameterError("two_sided_failure_bound: N must be >= 1");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw ParameterError("two_sided_failure_bound: epsilon must lie in (0,1)");
    if (!(d > 0.0)) throw ParameterError("two_sided_failure_bound: d must be positive");
    double nn = static_cast<double>(n);
    double log_q = std::log(4.0) + 2.0 * epsilon + d * (std::log(2.0 * kE * nn) - std::log(d)) -
                   nn * epsilon * epsilon;
    return std::exp(std::min(0.0, log_q));
}

namespace {
double vc_for(int m_theta, int n, Strictness s) {
    return s == Strictness::Strict ? vc_bound_strict(m_theta, n) : vc_bound_nonstrict(m_theta, n);
}
}  // namespace

BoundReport sample_bound_two_sided(const Levels& levels, int m_theta, int n,
                                   Strictness strictness) {
    double d = vc_for(m_theta, n, strictness);
    double eps = levels.epsilon;
    double raw = 1.2 / (eps * eps) *
                 (std::log(4.0) + 2.0 * eps - std::log(levels.delta) +
                  d * std::log(12.0 / (eps * eps)));
    BoundReport r;
    r.d = d;
    r.n = ceil_to_count(raw);
    r.formula = "two-sided";
    r.levels = levels;
    r.m_theta = m_theta;
    r.block_n = n;
    r.strictness = strictness;
    return r;
}

BoundReport sample_bound_one_sided(const Levels& levels, int m_theta, int n,
                                   Strictness strictness) {
    double d = vc_for(m_theta, n, strictness);
    double eps = levels.epsilon;
    double re = levels.rho + eps;
    double raw = 5.0 * re / (eps * eps) *
                 (std::log(4.0) - std::log(levels.delta) +
                  d * std::log(40.0 * re / (eps * eps)));
    BoundReport r;
    r.d = d;
    r.n = ceil_to_count(raw);
    r.formula = "one-sided";
    r.levels = levels;
    r.m_theta = m_theta;
    r.block_n = n;
    r.strictness = strictness;
    return r;
}

double p_series(long long kt, double alpha) {
    if (kt < 1) throw ParameterError("p_series: kt must be >= 1");
    if (!(alpha > 0.0)) throw ParameterError("p_series: alpha must be positive");
    double sum = 0.0;
    double comp = 0.0;  // Kahan compensation
    for (long long k = 1; k <= kt; ++k) {
        double term = std::pow(static_cast<double>(k), -alpha);
        double y = term - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

long long validation_bound(long long k, long long kt, double alpha, double a,
                           const Levels& levels) {
    if (k < 1 || k > kt) throw ParameterError("validation_bound: requires 1 <= k <= kt");
    if (!(alpha > 0.0)) throw ParameterError("validation_bound: alpha must be positive");
    double rho = levels.rho;
    double eps = levels.epsilon;
    double drift;
    if (std::isinf(a)) {
        if (rho != 0.0)
            throw ParameterError("validation_bound: a = infinity is admitted only with rho = 0");
        drift = 1.0 - eps;
    } else {
        if (!(a >= 1.0)) throw ParameterError("validation_bound: a must be >= 1 or infinity");
        drift = (rho + eps) * std::pow(a, rho - 1.0) + std::pow(a, rho) * (1.0 - (rho + eps));
    }
    double denom = -std::log(drift);  // ln(1/drift)
    if (!(denom > 0.0))
        throw ParameterError("validation_bound: parameters make the bound vacuous "
                             "(nonpositive denominator)");
    double raw = (alpha * std::log(static_cast<double>(k)) + std::log(p_series(kt, alpha)) -
                  std::log(levels.delta)) /
                 denom;
    return ceil_to_count(raw);
}

void default_validation_constants(double rho, double& a, double& alpha) {
    if (rho > 0.0) {
        a = 3.05;
        alpha = 0.9;
    } else {
        a = kAInfinity;
        alpha = 0.1;
    }
}

std::vector<long long> design_sample_schedule(long long n, long long kt) {
    if (n < 1) throw ParameterError("design_sample_schedule: N must be >= 1");
    if (kt < 2) throw ParameterError("design_sample_schedule: kt must be > 1");
    std::vector<long long> out;
    out.reserve(static_cast<size_t>(kt));
    for (long long k = 1; k <= kt; ++k) out.push_back((n * k + kt - 1) / kt);
    return out;
}

}  // namespace randlmi

#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace randlmi {

struct ParameterError : std::invalid_argument {
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// Accuracy / confidence / level triple. epsilon, delta in (0,1); rho in [0,1).
struct Levels {
    double epsilon;
    double delta;
    double rho = 0.0;

    Levels(double eps, double del, double rho = 0.0);
};

enum class Strictness { Strict, Nonstrict };

struct BoundReport {
    double d = 0.0;       // unrounded VC-dimension bound
    long long n = 0;      // ceiling of the raw sample bound, >= 1
    std::string formula;  // which bound produced n
    Levels levels{0.5, 0.5, 0.0};
    int m_theta = 0;
    int block_n = 0;
    Strictness strictness = Strictness::Strict;
};

// VC bound for families expressed with eta polynomial inequalities of degree
// at most gamma in m_theta design variables: 2 * m_theta * lg(4 e gamma eta).
double boolean_vc_bound(long long gamma, long long eta, int m_theta);

// Strict matrix inequalities: d <= 2 m lg(4 e n^2).
double vc_bound_strict(int m_theta, int n);

// Nonstrict matrix inequalities: d <= 2 m lg(4 e n 2^n), evaluated as
// 2 m (lg(4 e n) + n) so large n cannot overflow.
double vc_bound_nonstrict(int m_theta, int n);

// Upper bound on the probability that empirical and true violation differ by
// more than epsilon anywhere: 4 e^{2 eps} (2 e N / d)^d e^{-N eps^2},
// evaluated in log space and clamped to [0, 1].
double two_sided_failure_bound(long long n, double epsilon, double d);

// Sample counts driving the two failure probabilities below delta.
BoundReport sample_bound_two_sided(const Levels& levels, int m_theta, int n,
                                   Strictness strictness);
BoundReport sample_bound_one_sided(const Levels& levels, int m_theta, int n,
                                   Strictness strictness);

// Finite p-series sum_{k=1..kt} k^{-alpha}, direct summation.
double p_series(long long kt, double alpha);

constexpr double kAInfinity = std::numeric_limits<double>::infinity();

// Validation-sample bound for iteration k of the sequential scheme:
//   ceil( (alpha ln k + ln S_kt(alpha) + ln(1/delta)) / ln(1/drift) )
// with drift = (rho+eps) a^(rho-1) + a^rho (1-(rho+eps)). a = infinity is
// admitted only with rho = 0, where drift reduces to 1 - eps.
long long validation_bound(long long k, long long kt, double alpha, double a,
                           const Levels& levels);

// Suggested (a, alpha) pairs: (3.05, 0.9) for rho > 0, (inf, 0.1) for rho = 0.
void default_validation_constants(double rho, double& a, double& alpha);

// Design-sample schedule N_k = ceil(N k / kt), k = 1..kt.
std::vector<long long> design_sample_schedule(long long n, long long kt);

}  // namespace randlmi

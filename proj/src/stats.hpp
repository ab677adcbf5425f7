#pragma once

namespace randlmi {

struct BinomialInterval {
    double lower = 0.0;
    double upper = 1.0;
};

// Exact (Clopper-Pearson) two-sided binomial confidence interval for k
// successes out of n trials.
BinomialInterval binomial_interval(long long k, long long n, double confidence);

// Regularized incomplete beta function I_x(a, b), continued-fraction form.
double incomplete_beta(double a, double b, double x);

// CDF of Binomial(n, p) at k, computed through the beta identity.
double binomial_cdf(long long k, long long n, double p);

}  // namespace randlmi

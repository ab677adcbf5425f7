#include "stats.hpp"

#include <cmath>
#include <stdexcept>

namespace randlmi {

namespace {

// Lentz's continued fraction for the incomplete beta function.
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                   b * std::log(1.0 - x);
    double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double binomial_cdf(long long k, long long n, double p) {
    if (k < 0) return 0.0;
    if (k >= n) return 1.0;
    // P(X <= k) = I_{1-p}(n - k, k + 1)
    return incomplete_beta(static_cast<double>(n - k), static_cast<double>(k + 1), 1.0 - p);
}

BinomialInterval binomial_interval(long long k, long long n, double confidence) {
    if (n < 1 || k < 0 || k > n) throw std::invalid_argument("binomial_interval: bad k/n");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("binomial_interval: confidence must be in (0,1)");
    const double alpha = 1.0 - confidence;
    BinomialInterval out;
    // lower bound: largest p with P(X >= k) = alpha/2, i.e. Beta(k, n-k+1) quantile
    if (k == 0) {
        out.lower = 0.0;
    } else {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            double tail = 1.0 - binomial_cdf(k - 1, n, mid);  // P(X >= k)
            (tail < alpha / 2.0 ? lo : hi) = mid;
        }
        out.lower = 0.5 * (lo + hi);
    }
    // upper bound: smallest p with P(X <= k) = alpha/2
    if (k == n) {
        out.upper = 1.0;
    } else {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            double tail = binomial_cdf(k, n, mid);  // P(X <= k)
            (tail > alpha / 2.0 ? lo : hi) = mid;
        }
        out.upper = 0.5 * (lo + hi);
    }
    return out;
}

}  // namespace randlmi

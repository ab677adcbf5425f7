#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "learning.hpp"

using namespace randlmi;

TEST_CASE("boolean VC bound") {
    // 2 lg(4e) = 4 + 2 / ln 2
    CHECK(boolean_vc_bound(1, 1, 1) ==
          doctest::Approx(4.0 + 2.0 / std::log(2.0)).epsilon(1e-12));
    CHECK(boolean_vc_bound(1, 1, 1) == doctest::Approx(6.885390081777927).epsilon(1e-12));
    for (int m : {1, 2, 5, 13})
        for (int n : {1, 2, 7, 11})
            CHECK(boolean_vc_bound(n, n, m) == vc_bound_strict(m, n));
    // linear in the number of design variables
    CHECK(boolean_vc_bound(3, 4, 10) == doctest::Approx(2.0 * boolean_vc_bound(3, 4, 5)));
    CHECK_THROWS_AS(boolean_vc_bound(0, 1, 1), ParameterError);
}

TEST_CASE("strict VC bound values") {
    CHECK(vc_bound_strict(13, 11) == doctest::Approx(269.40).epsilon(1e-4));
    CHECK(vc_bound_strict(13, 11) == doctest::Approx(269.40051523225253).epsilon(1e-12));
    CHECK(vc_bound_strict(1, 1) == doctest::Approx(6.885390081777927).epsilon(1e-12));
    for (int n = 1; n < 40; ++n)
        CHECK(vc_bound_strict(5, n + 1) >= vc_bound_strict(5, n));
}

TEST_CASE("nonstrict VC bound values") {
    CHECK(vc_bound_nonstrict(13, 11) == doctest::Approx(465.455).epsilon(1e-4));
    for (int m : {1, 3, 9})
        CHECK(vc_bound_nonstrict(m, 1) ==
              doctest::Approx(boolean_vc_bound(1, 2, m)).epsilon(1e-14));
    for (int n = 2; n <= 60; ++n)
        CHECK(vc_bound_nonstrict(7, n) > vc_bound_strict(7, n));
    // the log2 split keeps huge n finite
    CHECK(std::isfinite(vc_bound_nonstrict(13, 1000)));
    CHECK_THROWS_AS(vc_bound_nonstrict(13, 1001), ParameterError);
}

TEST_CASE("two-sided failure bound") {
    // UCEM limit: the bound vanishes for large N
    CHECK(two_sided_failure_bound(10000000, 0.1, 10.0) < 1e-300);
    // small N clamps to one
    CHECK(two_sided_failure_bound(10, 0.1, 10.0) == 1.0);
    // the sample bound makes the failure bound land at or below delta
    for (double eps : {0.05, 0.1, 0.2, 0.4})
        for (double delta : {1e-2, 1e-4, 1e-8})
            for (double d : {5.0, 50.0, 269.4}) {
                double raw = 1.2 / (eps * eps) *
                             (std::log(4.0 * std::exp(2 * eps) / delta) +
                              d * std::log(12.0 / (eps * eps)));
                long long n = static_cast<long long>(std::ceil(raw));
                CHECK(two_sided_failure_bound(n, eps, d) <= delta * (1 + 1e-9));
            }
}

TEST_CASE("two-sided sample bound") {
    Levels l(0.2, 1e-2, 0.0);
    BoundReport r = sample_bound_two_sided(l, 13, 11, Strictness::Strict);
    CHECK(r.n == 46290);
    CHECK(r.d == doctest::Approx(269.4005).epsilon(1e-6));
    // monotone: shrinking delta or epsilon never shrinks N
    long long prev = 0;
    for (double delta : {1e-2, 1e-4, 1e-6, 1e-8}) {
        long long n = sample_bound_two_sided(Levels(0.1, delta, 0.0), 13, 11,
                                             Strictness::Strict)
                          .n;
        CHECK(n >= prev);
        prev = n;
    }
    prev = 0;
    for (double eps : {0.2, 0.1, 0.05, 0.01}) {
        long long n =
            sample_bound_two_sided(Levels(eps, 1e-2, 0.0), 13, 11, Strictness::Strict).n;
        CHECK(n >= prev);
        prev = n;
    }
}

TEST_CASE("one-sided sample bound reproduces the reference table to 3 significant figures") {
    struct Row {
        double eps, delta, reference;
    };
    const Row rows[] = {{0.2, 1e-2, 3.58e4},
                        {0.1, 1e-4, 8.12e4},
                        {0.05, 1e-6, 1.82e5},
                        {0.01, 1e-8, 1.13e6},
                        {0.005, 1e-10, 2.45e6}};
    for (const Row& row : rows) {
        BoundReport r =
            sample_bound_one_sided(Levels(row.eps, row.delta, 0.0), 13, 11, Strictness::Strict);
        double mag = std::pow(10.0, std::floor(std::log10(static_cast<double>(r.n))) - 2);
        double three_sig = std::round(static_cast<double>(r.n) / mag) * mag;
        CHECK(three_sig == doctest::Approx(row.reference).epsilon(1e-12));
    }
    // exact frozen counts for the first two rows
    CHECK(sample_bound_one_sided(Levels(0.2, 1e-2, 0.0), 13, 11, Strictness::Strict).n == 35835);
    CHECK(sample_bound_one_sided(Levels(0.1, 1e-4, 0.0), 13, 11, Strictness::Strict).n == 81236);
}

TEST_CASE("nonstrict bounds exceed strict ones at the same levels") {
    Levels l(0.2, 1e-2, 0.0);
    BoundReport s = sample_bound_one_sided(l, 13, 11, Strictness::Strict);
    BoundReport ns = sample_bound_one_sided(l, 13, 11, Strictness::Nonstrict);
    CHECK(ns.n > s.n);
    CHECK(ns.d / s.d == doctest::Approx(465.45529 / 269.40052).epsilon(1e-6));
}

TEST_CASE("dominance: one-sided below two-sided on the whole grid (rho = 0)") {
    for (double eps : {0.005, 0.01, 0.05, 0.1, 0.2})
        for (double delta : {1e-2, 1e-4, 1e-6, 1e-8, 1e-10})
            for (int m : {1, 13})
                for (int n : {1, 11, 50}) {
                    Levels l(eps, delta, 0.0);
                    CHECK(sample_bound_one_sided(l, m, n, Strictness::Strict).n <
                          sample_bound_two_sided(l, m, n, Strictness::Strict).n);
                }
}

TEST_CASE("growth orders: eps scaling stays within a factor-10 band") {
    // one-sided / ((1/eps) ln(1/eps)) and two-sided / ((1/eps^2) ln(1/eps^2))
    std::vector<double> ratio1, ratio2;
    for (double eps : {0.2, 0.1, 0.05, 0.01, 0.005}) {
        Levels l(eps, 1e-6, 0.0);
        double n1 = static_cast<double>(
            sample_bound_one_sided(l, 13, 11, Strictness::Strict).n);
        double n2 = static_cast<double>(
            sample_bound_two_sided(l, 13, 11, Strictness::Strict).n);
        ratio1.push_back(n1 / ((1.0 / eps) * std::log(1.0 / eps)));
        ratio2.push_back(n2 / ((1.0 / (eps * eps)) * std::log(1.0 / (eps * eps))));
    }
    auto band = [](const std::vector<double>& r) {
        double lo = r[0], hi = r[0];
        for (double v : r) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return hi / lo;
    };
    CHECK(band(ratio1) < 10.0);
    CHECK(band(ratio2) < 10.0);
}

TEST_CASE("no bound depends on the uncertainty dimension") {
    // the API simply has no parameter-count input; assert the obvious proxy:
    // identical inputs give identical outputs (guards against accidental
    // global state)
    Levels l(0.1, 1e-4, 0.0);
    CHECK(sample_bound_one_sided(l, 13, 11, Strictness::Strict).n ==
          sample_bound_one_sided(l, 13, 11, Strictness::Strict).n);
}

TEST_CASE("p-series") {
    CHECK(p_series(1, 0.7) == 1.0);
    CHECK(p_series(4, 1.0) == doctest::Approx(25.0 / 12.0).epsilon(1e-15));
    // direct summation against the integral (Euler-Maclaurin style) estimate
    double s = p_series(5000, 0.1);
    CHECK(s == doctest::Approx(2370.0586).epsilon(1e-6));
    double integral = (std::pow(5000.0, 0.9) - 1.0) / 0.9;
    CHECK(std::fabs(s - integral) < 2.0);
    CHECK_THROWS_AS(p_series(0, 0.1), ParameterError);
    CHECK_THROWS_AS(p_series(10, 0.0), ParameterError);
}

TEST_CASE("validation bound anchor values") {
    Levels l1(0.2, 1e-2, 0.0);
    CHECK(validation_bound(1, 5000, 0.1, kAInfinity, l1) == 56);
    Levels l2(0.1, 1e-4, 0.0);
    CHECK(validation_bound(1, 5000, 0.1, kAInfinity, l2) == 162);
    // increment structure: M_k - M_1 tracks alpha ln k over the denominator
    for (long long k : {2LL, 10LL, 100LL, 5000LL}) {
        long long mk = validation_bound(k, 5000, 0.1, kAInfinity, l1);
        double denom = std::log(1.0 / 0.8);
        double expect = (0.1 * std::log(static_cast<double>(k)) +
                         std::log(p_series(5000, 0.1)) + std::log(100.0)) /
                        denom;
        CHECK(mk == static_cast<long long>(std::ceil(expect)));
    }
}

TEST_CASE("validation bound is monotone in k and in 1/delta") {
    Levels l(0.2, 1e-2, 0.0);
    long long prev = 0;
    for (long long k = 1; k <= 20; ++k) {
        long long m = validation_bound(k, 5000, 0.1, kAInfinity, l);
        CHECK(m >= prev);
        prev = m;
    }
    prev = 0;
    for (double delta : {1e-1, 1e-2, 1e-4, 1e-8}) {
        long long m = validation_bound(1, 5000, 0.1, kAInfinity, Levels(0.2, delta, 0.0));
        CHECK(m >= prev);
        prev = m;
    }
}

TEST_CASE("validation bound with finite a and rho > 0") {
    Levels l(0.1, 1e-3, 0.05);
    long long m = validation_bound(1, 100, 0.9, 3.05, l);
    CHECK(m == 174);  // ceil of 173.578 (direct evaluation of the formula)
    // a = infinity is only valid at rho = 0
    CHECK_THROWS_AS(validation_bound(1, 100, 0.9, kAInfinity, l), ParameterError);
    // a = 1 with rho = 0 gives drift 1: vacuous bound
    CHECK_THROWS_AS(validation_bound(1, 100, 0.9, 1.0, Levels(0.1, 1e-3, 0.0)),
                    ParameterError);
}

TEST_CASE("default validation constants follow rho") {
    double a = 0, alpha = 0;
    default_validation_constants(0.0, a, alpha);
    CHECK(std::isinf(a));
    CHECK(alpha == 0.1);
    default_validation_constants(0.1, a, alpha);
    CHECK(a == 3.05);
    CHECK(alpha == 0.9);
}

TEST_CASE("design sample schedule") {
    CHECK(design_sample_schedule(100, 4) == std::vector<long long>{25, 50, 75, 100});
    CHECK(design_sample_schedule(10, 3) == std::vector<long long>{4, 7, 10});
    for (long long n : {7LL, 100LL, 35835LL})
        for (long long kt : {2LL, 5LL, 10LL}) {
            auto s = design_sample_schedule(n, kt);
            CHECK(s.back() == n);
            for (size_t i = 1; i < s.size(); ++i) CHECK(s[i] >= s[i - 1]);
        }
    CHECK_THROWS_AS(design_sample_schedule(10, 1), ParameterError);
}

TEST_CASE("levels validate their domains") {
    CHECK_THROWS_AS(Levels(0.0, 0.5, 0.0), ParameterError);
    CHECK_THROWS_AS(Levels(1.0, 0.5, 0.0), ParameterError);
    CHECK_THROWS_AS(Levels(0.5, 0.0, 0.0), ParameterError);
    CHECK_THROWS_AS(Levels(0.5, 0.5, 1.0), ParameterError);
    CHECK_NOTHROW(Levels(0.5, 0.5, 0.0));
    CHECK_NOTHROW(Levels(0.5, 0.5, 0.99));
}

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "problem.hpp"

namespace randlmi {

// splitmix64 output mix; the seed-derivation primitive.
uint64_t splitmix64(uint64_t& state);

// Deterministic child-stream seed from (master seed, purpose tag, index k).
// Documented so runs replay bit-exactly regardless of evaluation order.
uint64_t derive_seed(uint64_t master, std::string_view purpose, uint64_t k);

// xoshiro256** seeded via splitmix64. Uniform doubles use the top 53 bits,
// so streams are identical across platforms.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();
    double next_unit();  // [0, 1)
    double uniform(double lo, double hi);

private:
    uint64_t s_[4];
};

struct ScenarioSet {
    std::vector<double> samples;  // n_samples x n_params, row major
    size_t n_samples = 0;
    size_t n_params = 0;
    uint64_t seed = 0;            // master seed the set derives from
    std::string purpose;          // "design" | "validation" | "audit" | ...
    uint64_t iteration = 0;       // k in the derivation
    std::string distribution = "uniform-box";
    std::vector<std::string> param_names;

    std::span<const double> row(size_t i) const {
        return {samples.data() + i * n_params, n_params};
    }
};

// N i.i.d. samples, each coordinate uniform on [lower_i, upper_i]. The stream
// is seeded with derive_seed(seed, purpose, k).
ScenarioSet draw(const ParamTable& table, size_t n, uint64_t seed,
                 std::string_view purpose, uint64_t k = 0);

// Mean of indicator_g over the set; exact fraction with denominator n.
double empirical_violation(const UncertainProblem& p, std::span<const double> theta,
                           const ScenarioSet& s);

struct ViolationEstimate {
    double estimate = 0.0;
    long long violations = 0;
    long long samples = 0;
    double interval_lower = 0.0;  // exact (Clopper-Pearson) binomial interval
    double interval_upper = 1.0;
    double confidence = 0.0;
};

// Fresh multisample with purpose "audit" plus an exact binomial interval at
// the given two-sided confidence level.
ViolationEstimate violation_estimate(const UncertainProblem& p, std::span<const double> theta,
                                     size_t m, uint64_t seed, double confidence = 0.99,
                                     std::string_view purpose = "audit", uint64_t k = 0);

// CSV round trip: header row of parameter names, one row per sample.
std::string scenarios_to_csv(const ScenarioSet& s);
ScenarioSet scenarios_from_csv(const std::string& csv, const ParamTable& table);

}  // namespace randlmi

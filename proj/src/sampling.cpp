#include "sampling.hpp"

#include <cmath>
#include <sstream>

#include "stats.hpp"
#include "util.hpp"

namespace randlmi {

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

uint64_t derive_seed(uint64_t master, std::string_view purpose, uint64_t k) {
    uint64_t state = master ^ fnv1a64(purpose);
    uint64_t a = splitmix64(state);
    state ^= k * 0x9e3779b97f4a7c15ULL;
    uint64_t b = splitmix64(state);
    return a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
}

Rng::Rng(uint64_t seed) {
    uint64_t state = seed;
    for (auto& s : s_) s = splitmix64(state);
}

static inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

uint64_t Rng::next_u64() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

ScenarioSet draw(const ParamTable& table, size_t n, uint64_t seed,
                 std::string_view purpose, uint64_t k) {
    ScenarioSet s;
    s.n_samples = n;
    s.n_params = table.size();
    s.seed = seed;
    s.purpose = std::string(purpose);
    s.iteration = k;
    s.param_names = table.names();
    s.samples.resize(n * table.size());
    Rng rng(derive_seed(seed, purpose, k));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < table.size(); ++j) {
            const auto& e = table.at(j);
            s.samples[i * table.size() + j] = rng.uniform(e.lower, e.upper);
        }
    return s;
}

double empirical_violation(const UncertainProblem& p, std::span<const double> theta,
                           const ScenarioSet& s) {
    long long bad = 0;
    for (size_t i = 0; i < s.n_samples; ++i) bad += indicator_g(p, theta, s.row(i));
    return static_cast<double>(bad) / static_cast<double>(s.n_samples);
}

ViolationEstimate violation_estimate(const UncertainProblem& p, std::span<const double> theta,
                                     size_t m, uint64_t seed, double confidence,
                                     std::string_view purpose, uint64_t k) {
    ScenarioSet s = draw(p.params, m, seed, purpose, k);
    long long bad = 0;
    for (size_t i = 0; i < m; ++i) bad += indicator_g(p, theta, s.row(i));
    ViolationEstimate out;
    out.violations = bad;
    out.samples = static_cast<long long>(m);
    out.estimate = static_cast<double>(bad) / static_cast<double>(m);
    BinomialInterval ci = binomial_interval(bad, static_cast<long long>(m), confidence);
    out.interval_lower = ci.lower;
    out.interval_upper = ci.upper;
    out.confidence = confidence;
    return out;
}

std::string scenarios_to_csv(const ScenarioSet& s) {
    std::ostringstream out;
    for (size_t j = 0; j < s.param_names.size(); ++j) {
        if (j) out << ',';
        out << s.param_names[j];
    }
    out << '\n';
    for (size_t i = 0; i < s.n_samples; ++i) {
        for (size_t j = 0; j < s.n_params; ++j) {
            if (j) out << ',';
            out << dtos(s.samples[i * s.n_params + j]);
        }
        out << '\n';
    }
    return out.str();
}

ScenarioSet scenarios_from_csv(const std::string& csv, const ParamTable& table) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw ModelError("scenario CSV is empty");
    auto split = [](const std::string& l) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : l) {
            if (c == ',') {
                out.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur += c;
            }
        }
        out.push_back(cur);
        return out;
    };
    std::vector<std::string> header = split(line);
    if (header.size() != table.size())
        throw ModelError("scenario CSV header does not match parameter table size");
    for (size_t j = 0; j < header.size(); ++j)
        if (header[j] != table.at(j).name)
            throw ModelError("scenario CSV column '" + header[j] + "' does not match parameter '" +
                             table.at(j).name + "'");
    ScenarioSet s;
    s.n_params = table.size();
    s.param_names = table.names();
    s.purpose = "imported";
    size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells = split(line);
        if (cells.size() != table.size())
            throw ModelError("scenario CSV row " + std::to_string(row + 1) + ": wrong cell count");
        for (size_t j = 0; j < cells.size(); ++j) {
            char* end = nullptr;
            double v = std::strtod(cells[j].c_str(), &end);
            if (end == cells[j].c_str())
                throw ModelError("scenario CSV row " + std::to_string(row + 1) +
                                 ": bad number '" + cells[j] + "'");
            const auto& e = table.at(j);
            if (v < e.lower || v > e.upper)
                throw ModelError("scenario CSV row " + std::to_string(row + 1) + ": value " +
                                 dtos(v) + " outside box of parameter '" + e.name + "'");
            s.samples.push_back(v);
        }
        ++row;
    }
    if (row == 0) throw ModelError("scenario CSV has no sample rows");
    s.n_samples = row;
    return s;
}

}  // namespace randlmi

// Command-line front end. Everything goes through the public C API of the
// shared library; this translation unit only parses arguments and formats
// files.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "randlmi.h"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Exit codes mirror randlmi_status: 0 ok, 1 usage, 2 schema, 3 eval,
// 4 infeasible, 5 numerical failure, 6 internal.
int fail(int code, const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    return code;
}

std::string take_string(char* s) {
    std::string out = s ? s : "";
    randlmi_string_free(s);
    return out;
}

struct ProblemHandle {
    randlmi_problem* p = nullptr;
    ~ProblemHandle() { randlmi_problem_free(p); }
};

int load_problem(const std::string& path, ProblemHandle& h, std::string& err) {
    char* msg = nullptr;
    int rc = randlmi_problem_load_file(path.c_str(), &h.p, &msg);
    err = take_string(msg);
    return rc;
}

uint64_t fnv1a64(const std::string& data) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(ss.str()));
    return buf;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

// The manifest lands on disk before any computation so a run can be replayed
// from it alone.
void write_manifest(const fs::path& out_dir, const std::string& subcommand,
                    const ordered_json& config, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    ordered_json m;
    m["tool"] = "randlmi";
    m["version"] = randlmi_version();
    m["subcommand"] = subcommand;
    m["config"] = config;
    ordered_json ins = ordered_json::array();
    for (const std::string& p : inputs)
        ins.push_back({{"path", p}, {"fnv1a64", file_digest(p)}});
    m["inputs"] = std::move(ins);
    m["outputs"] = outputs;
    write_text(out_dir / "manifest.json", m.dump(2) + "\n");
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct Aggregate {
    double mean = 0.0, sd = 0.0, worst = 0.0;
};

Aggregate aggregate(const std::vector<double>& xs) {
    Aggregate a;
    if (xs.empty()) return a;
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
        a.worst = std::max(a.worst, x);
    }
    a.mean = sum / xs.size();
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - a.mean) * (x - a.mean);
        a.sd = std::sqrt(ss / (xs.size() - 1));
    }
    return a;
}

// ---- bounds -----------------------------------------------------------

struct BoundsArgs {
    std::vector<double> epsilons;
    std::vector<double> deltas;
    double rho = 0.0;
    int m_theta = 1;
    int n = 1;
    std::string strictness = "strict";
    std::string out_path;
};

int cmd_bounds(const BoundsArgs& a) {
    std::vector<std::string> strict_rows;
    if (a.strictness == "strict" || a.strictness == "both") strict_rows.push_back("strict");
    if (a.strictness == "nonstrict" || a.strictness == "both")
        strict_rows.push_back("nonstrict");
    if (strict_rows.empty())
        return fail(RANDLMI_ERR_USAGE, "--strictness must be strict, nonstrict or both");

    std::ostringstream csv;
    csv << "epsilon,delta,rho,m_theta,n,strictness,d,N_two_sided,N_one_sided\n";
    for (double eps : a.epsilons)
        for (double delta : a.deltas)
            for (const std::string& s : strict_rows) {
                int nonstrict = s == "nonstrict";
                double d = 0.0;
                long long n_two = 0, n_one = 0;
                char* err = nullptr;
                int rc = randlmi_sample_bound(eps, delta, a.rho, a.m_theta, a.n, nonstrict, 0,
                                              &d, &n_two, &err);
                if (rc != RANDLMI_OK) return fail(rc, take_string(err));
                rc = randlmi_sample_bound(eps, delta, a.rho, a.m_theta, a.n, nonstrict, 1, &d,
                                          &n_one, &err);
                if (rc != RANDLMI_OK) return fail(rc, take_string(err));
                csv << format_double(eps) << ',' << format_double(delta) << ','
                    << format_double(a.rho) << ',' << a.m_theta << ',' << a.n << ',' << s << ','
                    << format_double(d) << ',' << n_two << ',' << n_one << '\n';
            }
    if (a.out_path.empty()) {
        std::cout << csv.str();
    } else {
        write_text(a.out_path, csv.str());
        std::cout << "wrote " << a.out_path << "\n";
    }
    return 0;
}

// ---- solve ------------------------------------------------------------

struct SolveArgs {
    std::string problem;
    long long samples = 0;
    bool auto_samples = false;
    double epsilon = 0.1, delta = 0.01, rho = 0.0;
    uint64_t seed = 1;
    std::string out_dir;
    std::string scenarios_path;
    bool dump_scenarios = false;
    double sigma = -1.0;
    double box_radius = 1e6;
    int restarts = 5;
    std::vector<double> y_init;
};

int cmd_solve(const SolveArgs& a) {
    ProblemHandle ph;
    std::string err;
    int rc = load_problem(a.problem, ph, err);
    if (rc != RANDLMI_OK) return fail(rc, err);

    ordered_json opts;
    if (a.auto_samples) {
        opts["auto_samples"] = true;
        opts["epsilon"] = a.epsilon;
        opts["delta"] = a.delta;
        opts["rho"] = a.rho;
    } else if (a.samples > 0) {
        opts["samples"] = a.samples;
    }
    opts["seed"] = a.seed;
    if (a.sigma >= 0.0) opts["sigma"] = a.sigma;
    opts["box_radius"] = a.box_radius;
    opts["restarts"] = a.restarts;
    if (!a.y_init.empty()) opts["y_init"] = a.y_init;
    if (!a.scenarios_path.empty()) {
        std::ifstream in(a.scenarios_path, std::ios::binary);
        if (!in) return fail(RANDLMI_ERR_USAGE, "cannot read " + a.scenarios_path);
        std::ostringstream ss;
        ss << in.rdbuf();
        opts["scenarios_csv"] = ss.str();
    }

    if (!a.out_dir.empty()) {
        fs::create_directories(a.out_dir);
        write_manifest(a.out_dir, "solve", opts, {a.problem},
                       a.dump_scenarios ? std::vector<std::string>{"result.json", "scenarios.csv"}
                                        : std::vector<std::string>{"result.json"});
    }

    if (a.dump_scenarios && !a.out_dir.empty() && a.scenarios_path.empty()) {
        long long n = a.samples;
        if (a.auto_samples) {
            double d = 0;
            char* e2 = nullptr;
            // dumped set matches what the solve below will draw
            ordered_json info;
            char* info_raw = nullptr;
            randlmi_problem_info_json(ph.p, &info_raw);
            info = ordered_json::parse(take_string(info_raw));
            int nonstrict = info["strictness"] == "nonstrict";
            rc = randlmi_sample_bound(a.epsilon, a.delta, a.rho, info["m_theta"].get<int>(),
                                      info["n_sum"].get<int>(), nonstrict, 1, &d, &n, &e2);
            if (rc != RANDLMI_OK) return fail(rc, take_string(e2));
        }
        char* csv = nullptr;
        char* e3 = nullptr;
        rc = randlmi_scenarios_csv(ph.p, n, a.seed, "design", 0, &csv, &e3);
        if (rc != RANDLMI_OK) return fail(rc, take_string(e3));
        write_text(fs::path(a.out_dir) / "scenarios.csv", take_string(csv));
    }

    randlmi_result* result = nullptr;
    char* solve_err = nullptr;
    rc = randlmi_solve(ph.p, opts.dump().c_str(), &result, &solve_err);
    if (!result) return fail(rc, take_string(solve_err));
    char* result_json_raw = nullptr;
    randlmi_result_json(result, &result_json_raw);
    std::string result_json = take_string(result_json_raw);
    randlmi_result_free(result);
    take_string(solve_err);

    if (!a.out_dir.empty()) {
        write_text(fs::path(a.out_dir) / "result.json", result_json + "\n");
        std::cout << "wrote " << (fs::path(a.out_dir) / "result.json").string() << "\n";
    }
    std::cout << result_json << "\n";
    return rc == RANDLMI_OK ? 0 : rc;
}

// ---- sequential ---------------------------------------------------------

struct SequentialArgs {
    std::string problem;
    double epsilon = 0.2, delta = 0.01, rho = 0.0;
    long long kt = 10, bound_kt = 0;
    double alpha = -1.0, a = -1.0;
    uint64_t seed = 1;
    int repeats = 1;
    int threads = 1;
    std::string out_dir;
    int restarts = 5;
    double sigma = -1.0;
    double box_radius = 1e6;
    std::vector<double> y_init;
};

struct RunRow {
    int run = 0;
    uint64_t seed = 0;
    int status = -1;  // 0 certified, 1 infeasible, 2 loop cap
    std::string error;
    long long exit_iteration = 0;
    long long design_at_exit = 0;
    long long validation_at_exit = 0;
    long long design_total = 0;
    long long validation_total = 0;
    double objective = 0.0;
    std::string outcome_json;          // volatile form, for files
    std::string outcome_json_canonical;
    std::vector<std::string> jsonl;    // per-iteration lines
};

int cmd_sequential(const SequentialArgs& a) {
    ProblemHandle ph;
    std::string err;
    int rc = load_problem(a.problem, ph, err);
    if (rc != RANDLMI_OK) return fail(rc, err);

    ordered_json cfg;
    cfg["epsilon"] = a.epsilon;
    cfg["delta"] = a.delta;
    cfg["rho"] = a.rho;
    cfg["kt"] = a.kt;
    if (a.bound_kt > 0) cfg["bound_kt"] = a.bound_kt;
    if (a.alpha > 0) cfg["alpha"] = a.alpha;
    if (a.a > 0) cfg["a"] = a.a;
    ordered_json solver;
    solver["restarts"] = a.restarts;
    solver["box_radius"] = a.box_radius;
    if (a.sigma >= 0.0) solver["sigma"] = a.sigma;
    if (!a.y_init.empty()) solver["y_init"] = a.y_init;
    cfg["solver"] = solver;

    if (!a.out_dir.empty()) {
        fs::create_directories(a.out_dir);
        ordered_json mcfg = cfg;
        mcfg["seed"] = a.seed;
        mcfg["repeats"] = a.repeats;
        std::vector<std::string> outputs{"runs.csv", "summary.csv"};
        for (int r = 0; r < a.repeats; ++r) {
            char name[64];
            std::snprintf(name, sizeof name, "run_%03d.jsonl", r);
            outputs.push_back(name);
            std::snprintf(name, sizeof name, "run_%03d.outcome.json", r);
            outputs.push_back(name);
        }
        write_manifest(a.out_dir, "sequential", mcfg, {a.problem}, outputs);
    }

    std::vector<RunRow> rows(a.repeats);
    std::mutex next_mutex;
    int next_run = 0;
    auto worker = [&]() {
        for (;;) {
            int r;
            {
                std::lock_guard<std::mutex> lock(next_mutex);
                if (next_run >= a.repeats) return;
                r = next_run++;
            }
            RunRow& row = rows[r];
            row.run = r;
            row.seed = a.repeats == 1 ? a.seed
                                      : randlmi_derive_seed(a.seed, "repeat",
                                                            static_cast<uint64_t>(r));
            ordered_json rcfg = cfg;
            rcfg["seed"] = row.seed;
            randlmi_outcome* oc = nullptr;
            char* oerr = nullptr;
            int orc = randlmi_sequential_run(ph.p, rcfg.dump().c_str(), &oc, &oerr);
            std::string oerr_s = take_string(oerr);
            if (!oc) {
                row.error = oerr_s.empty() ? ("status " + std::to_string(orc)) : oerr_s;
                continue;
            }
            row.status = randlmi_outcome_status(oc);
            char* oj = nullptr;
            randlmi_outcome_json(oc, 1, &oj);
            row.outcome_json = take_string(oj);
            randlmi_outcome_json(oc, 0, &oj);
            row.outcome_json_canonical = take_string(oj);
            randlmi_outcome_free(oc);

            ordered_json parsed = ordered_json::parse(row.outcome_json);
            row.exit_iteration = parsed["exit_iteration"].get<long long>();
            row.objective = parsed["objective"].get<double>();
            row.design_total = parsed["total_design_samples"].get<long long>();
            row.validation_total = parsed["total_validation_samples"].get<long long>();
            for (const auto& it : parsed["iterations"]) {
                row.jsonl.push_back(it.dump());
                if (it["k"].get<long long>() == row.exit_iteration)
                    row.design_at_exit = it["n_design"].get<long long>();
                if (it["m_validation"].get<long long>() > 0)
                    row.validation_at_exit = it["m_validation"].get<long long>();
            }
        }
    };
    int n_threads = std::max(1, std::min(a.threads, a.repeats));
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    // per-run CSV
    std::ostringstream runs_csv;
    runs_csv << "run,seed,status,exit_iteration,design_at_exit,validation_at_exit,"
                "design_total,validation_total,objective\n";
    std::vector<double> design_x, valid_x, obj_x, iter_x;
    int certified = 0, infeasible = 0, kt_exits = 0, errors = 0;
    for (const RunRow& row : rows) {
        if (row.status < 0) {
            ++errors;
            runs_csv << row.run << ',' << row.seed << ",error,,,,,,\n";
            continue;
        }
        const char* status = row.status == 0 ? "certified"
                             : row.status == 1 ? "infeasible"
                                               : "kt-exit";
        if (row.status == 0) ++certified;
        if (row.status == 1) ++infeasible;
        if (row.status == 2) ++kt_exits;
        runs_csv << row.run << ',' << row.seed << ',' << status << ',' << row.exit_iteration
                 << ',' << row.design_at_exit << ',' << row.validation_at_exit << ','
                 << row.design_total << ',' << row.validation_total << ','
                 << format_double(row.objective) << '\n';
        if (row.status != 1) {
            design_x.push_back(static_cast<double>(row.design_at_exit));
            valid_x.push_back(static_cast<double>(row.validation_at_exit));
            obj_x.push_back(row.objective);
            iter_x.push_back(static_cast<double>(row.exit_iteration));
        }
    }
    Aggregate dg = aggregate(design_x), vl = aggregate(valid_x), ob = aggregate(obj_x),
              itg = aggregate(iter_x);
    std::ostringstream summary;
    summary << "runs,certified,kt_exits,infeasible,errors,"
               "design_mean,design_sd,design_worst,"
               "validation_mean,validation_sd,validation_worst,"
               "objective_mean,objective_sd,objective_worst,"
               "iteration_mean,iteration_sd,iteration_worst\n";
    summary << a.repeats << ',' << certified << ',' << kt_exits << ',' << infeasible << ','
            << errors << ',' << format_double(dg.mean) << ',' << format_double(dg.sd) << ','
            << format_double(dg.worst) << ',' << format_double(vl.mean) << ','
            << format_double(vl.sd) << ',' << format_double(vl.worst) << ','
            << format_double(ob.mean) << ',' << format_double(ob.sd) << ','
            << format_double(ob.worst) << ',' << format_double(itg.mean) << ','
            << format_double(itg.sd) << ',' << format_double(itg.worst) << '\n';

    if (!a.out_dir.empty()) {
        write_text(fs::path(a.out_dir) / "runs.csv", runs_csv.str());
        write_text(fs::path(a.out_dir) / "summary.csv", summary.str());
        for (const RunRow& row : rows) {
            char name[64];
            std::snprintf(name, sizeof name, "run_%03d.jsonl", row.run);
            std::string jsonl;
            for (const std::string& line : row.jsonl) jsonl += line + "\n";
            write_text(fs::path(a.out_dir) / name, jsonl);
            std::snprintf(name, sizeof name, "run_%03d.outcome.json", row.run);
            write_text(fs::path(a.out_dir) / name, row.outcome_json + "\n");
        }
    }
    std::cout << summary.str();
    for (const RunRow& row : rows)
        if (row.status < 0)
            std::cerr << "run " << row.run << " failed: " << row.error << "\n";
    if (errors > 0) return RANDLMI_ERR_NUMERIC;
    if (a.repeats == 1 && infeasible == 1) return RANDLMI_ERR_INFEASIBLE;
    return 0;
}

// ---- audit --------------------------------------------------------------

struct AuditArgs {
    std::string problem;
    std::string outcome_path;
    long long samples = 0;
    uint64_t seed = 1;
    double epsilon = 0.2, delta = 0.01, rho = 0.0;
    double confidence = 0.99;
    std::string out_path;
};

int cmd_audit(const AuditArgs& a) {
    if (a.samples < 1) return fail(RANDLMI_ERR_USAGE, "--samples must be >= 1");
    ProblemHandle ph;
    std::string err;
    int rc = load_problem(a.problem, ph, err);
    if (rc != RANDLMI_OK) return fail(rc, err);
    std::ifstream in(a.outcome_path, std::ios::binary);
    if (!in) return fail(RANDLMI_ERR_USAGE, "cannot read " + a.outcome_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    randlmi_outcome* oc = nullptr;
    char* oerr = nullptr;
    rc = randlmi_outcome_load_json(ss.str().c_str(), &oc, &oerr);
    if (rc != RANDLMI_OK) return fail(rc, take_string(oerr));
    char* report = nullptr;
    char* aerr = nullptr;
    rc = randlmi_audit(ph.p, oc, a.samples, a.seed, a.epsilon, a.delta, a.rho, a.confidence,
                       &report, &aerr);
    randlmi_outcome_free(oc);
    if (rc != RANDLMI_OK) return fail(rc, take_string(aerr));
    std::string report_s = take_string(report);
    if (!a.out_path.empty()) write_text(a.out_path, report_s + "\n");
    std::cout << report_s << "\n";
    return 0;
}

// ---- validate-file --------------------------------------------------------

int cmd_validate(const std::string& path) {
    ProblemHandle ph;
    std::string err;
    int rc = load_problem(path, ph, err);
    if (rc != RANDLMI_OK) return fail(rc, err);
    char* info = nullptr;
    randlmi_problem_info_json(ph.p, &info);
    std::cout << take_string(info) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"randomized solving of uncertain LMI/BMI programs"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read option defaults from a TOML/INI file");

    BoundsArgs ba;
    auto* bounds = app.add_subcommand("bounds", "sample-complexity bound table (CSV)");
    bounds->add_option("--epsilon", ba.epsilons, "accuracy grid")->required()->delimiter(',');
    bounds->add_option("--delta", ba.deltas, "confidence grid")->required()->delimiter(',');
    bounds->add_option("--rho", ba.rho, "level parameter (one-sided bound)");
    bounds->add_option("--m-theta", ba.m_theta, "number of packed design variables")->required();
    bounds->add_option("--n", ba.n, "matrix-inequality dimension")->required();
    bounds->add_option("--strictness", ba.strictness, "strict | nonstrict | both");
    bounds->add_option("-o,--out", ba.out_path, "output CSV path (default stdout)");

    SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "one-shot scenario solve");
    solve->add_option("--problem", sa.problem, "problem JSON file")->required();
    solve->add_option("--samples", sa.samples, "number of scenario samples");
    solve->add_flag("--auto", sa.auto_samples, "derive the sample count from the one-sided bound");
    solve->add_option("--epsilon", sa.epsilon, "accuracy for --auto");
    solve->add_option("--delta", sa.delta, "confidence for --auto");
    solve->add_option("--rho", sa.rho, "level for --auto");
    solve->add_option("--seed", sa.seed, "master seed");
    solve->add_option("--out-dir", sa.out_dir, "directory for manifest and result");
    solve->add_option("--scenarios", sa.scenarios_path, "use samples from this CSV");
    solve->add_flag("--dump-scenarios", sa.dump_scenarios, "write the drawn samples as CSV");
    solve->add_option("--sigma", sa.sigma, "strictness margin override");
    solve->add_option("--box-radius", sa.box_radius, "trust box on |theta_i|");
    solve->add_option("--restarts", sa.restarts, "bilinear alternation restarts");
    solve->add_option("--y-init", sa.y_init, "initial y-group values")->delimiter(',');

    SequentialArgs qa;
    auto* seq = app.add_subcommand("sequential", "sequential design/validation runs");
    seq->add_option("--problem", qa.problem, "problem JSON file")->required();
    seq->add_option("--epsilon", qa.epsilon, "accuracy")->required();
    seq->add_option("--delta", qa.delta, "confidence")->required();
    seq->add_option("--rho", qa.rho, "level parameter");
    seq->add_option("--kt", qa.kt, "iteration cap (> 1)");
    seq->add_option("--bound-kt", qa.bound_kt,
                    "termination parameter inside the schedules (>= kt; default kt)");
    seq->add_option("--alpha", qa.alpha, "validation-bound alpha (default by rho)");
    seq->add_option("--a", qa.a, "validation-bound a (default by rho)");
    seq->add_option("--seed", qa.seed, "master seed");
    seq->add_option("--repeats", qa.repeats, "independent runs");
    seq->add_option("--threads", qa.threads, "worker threads for --repeats");
    seq->add_option("--out-dir", qa.out_dir, "directory for logs and summaries");
    seq->add_option("--restarts", qa.restarts, "bilinear alternation restarts");
    seq->add_option("--sigma", qa.sigma, "strictness margin override");
    seq->add_option("--box-radius", qa.box_radius, "trust box on |theta_i|");
    seq->add_option("--y-init", qa.y_init, "initial y-group values")->delimiter(',');

    AuditArgs aa;
    auto* audit = app.add_subcommand("audit", "a-posteriori violation estimate for an outcome");
    audit->add_option("--problem", aa.problem, "problem JSON file")->required();
    audit->add_option("--outcome", aa.outcome_path, "outcome JSON from a sequential run")
        ->required();
    audit->add_option("--samples", aa.samples, "audit sample count")->required();
    audit->add_option("--seed", aa.seed, "master seed");
    audit->add_option("--epsilon", aa.epsilon, "accuracy (threshold rho + epsilon)");
    audit->add_option("--delta", aa.delta, "confidence echoed in the report");
    audit->add_option("--rho", aa.rho, "level parameter");
    audit->add_option("--confidence", aa.confidence, "binomial interval confidence");
    audit->add_option("-o,--out", aa.out_path, "write the report here too");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate-file", "validate a problem file");
    validate->add_option("--problem", validate_path, "problem JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : RANDLMI_ERR_USAGE;
    }

    try {
        if (bounds->parsed()) return cmd_bounds(ba);
        if (solve->parsed()) return cmd_solve(sa);
        if (seq->parsed()) return cmd_sequential(qa);
        if (audit->parsed()) return cmd_audit(aa);
        if (validate->parsed()) return cmd_validate(validate_path);
    } catch (const std::exception& e) {
        return fail(RANDLMI_ERR_INTERNAL, e.what());
    }
    return RANDLMI_ERR_USAGE;
}

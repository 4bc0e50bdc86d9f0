#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "plss/cg.hpp"
#include "plss/csr.hpp"
#include "plss/kaczmarz.hpp"
#include "plss/matrix_market.hpp"
#include "plss/random.hpp"
#include "plss/sketch_project.hpp"
#include "plss/solve_types.hpp"
#include "plss/solvers.hpp"

namespace plss {

enum class RhsMode { OnesSolution, SeededRandomSolution, FromFile };

struct MaxitRule {
    enum class Kind { Fixed, FractionOfN } kind = Kind::FractionOfN;
    std::size_t fixed = 0;
    double fraction = 1.1;

    static MaxitRule fixed_limit(std::size_t k) { return {Kind::Fixed, k, 0.0}; }
    static MaxitRule fraction_of_n(double c) { return {Kind::FractionOfN, 0, c}; }

    std::size_t resolve(std::size_t n) const {
        if (kind == Kind::Fixed) return std::max<std::size_t>(fixed, 1);
        return std::max<std::size_t>(
            static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))), 1);
    }
};

/// Solver selection with per-solver options, e.g. "randn:r=50".
struct SolverChoice {
    std::string name;
    std::map<std::string, std::string> options;

    std::string label() const {
        std::string out = name;
        for (const auto& [k, v] : options) out += ":" + k + "=" + v;
        return out;
    }
};

inline SolverChoice parse_solver_choice(const std::string& text) {
    SolverChoice choice;
    std::stringstream ss(text);
    std::string piece;
    bool first = true;
    while (std::getline(ss, piece, ':')) {
        if (first) {
            choice.name = piece;
            first = false;
            continue;
        }
        const auto eq = piece.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("solver option is not key=value: " + piece);
        choice.options[piece.substr(0, eq)] = piece.substr(eq + 1);
    }
    if (choice.name.empty()) throw std::invalid_argument("empty solver name");
    return choice;
}

struct BenchmarkSpec {
    std::vector<std::string> problems;  // matrix market file paths
    std::vector<SolverChoice> solvers;
    double tol = 1e-4;
    MaxitRule maxit_rule = MaxitRule::fraction_of_n(1.1);
    RhsMode rhs_mode = RhsMode::OnesSolution;
    std::string rhs_file;
    std::uint64_t seed = 0;
    std::size_t repetitions = 1;
};

struct BenchResult {
    std::string problem;
    std::string solver;
    SolveReport report;
    std::string error;  // nonempty for rows that could not run
};

/// Construct a consistent right-hand side b = A x_true (or load one).
/// Returns (b, x_true); x_true is empty for FromFile.
inline std::pair<std::vector<double>, std::vector<double>> build_rhs(
    const SparseMatrixCSR& a, RhsMode mode, std::uint64_t seed, const std::string& path = "") {
    std::vector<double> x_true;
    switch (mode) {
        case RhsMode::OnesSolution:
            x_true.assign(a.ncols(), 1.0);
            break;
        case RhsMode::SeededRandomSolution: {
            CounterRng rng(seed);
            x_true.resize(a.ncols());
            for (double& v : x_true) v = rng.next_normal();
            break;
        }
        case RhsMode::FromFile: {
            std::ifstream in(path);
            if (!in) throw std::runtime_error("cannot open rhs file: " + path);
            std::vector<double> b = read_matrix_market_vector(in);
            if (b.size() != a.nrows())
                throw std::runtime_error("rhs length " + std::to_string(b.size()) +
                                         " does not match " + std::to_string(a.nrows()) +
                                         " rows");
            return {std::move(b), {}};
        }
    }
    return {a.multiply(x_true), std::move(x_true)};
}

namespace detail {

inline std::size_t option_as_size(const SolverChoice& c, const std::string& key,
                                  std::size_t fallback) {
    const auto it = c.options.find(key);
    if (it == c.options.end()) return fallback;
    return static_cast<std::size_t>(std::stoull(it->second));
}

inline IndexSampling option_as_sampling(const SolverChoice& c) {
    const auto it = c.options.find("sampling");
    if (it == c.options.end()) return IndexSampling::NormSquared;
    if (it->second == "uniform") return IndexSampling::Uniform;
    if (it->second == "rownorm") return IndexSampling::NormSquared;
    throw std::invalid_argument("unknown sampling option: " + it->second);
}

inline SolveReport dispatch_solver(const SolverChoice& choice, const SparseMatrixCSR& a,
                                   const std::vector<double>& b, const SolverConfig& cfg) {
    const std::vector<double> x0(a.ncols(), 0.0);
    if (choice.name == "plss-i") return plss_identity(a, b, x0, cfg);
    if (choice.name == "plss-diag") return plss_diag(a, b, x0, cfg);
    if (choice.name == "plss-a") return plss_a(a, b, x0, cfg);
    if (choice.name == "plss-ainv") return plss_spd_inverse_weight(a, b, x0, cfg);
    if (choice.name == "plss-nested")
        return plss_nested(a, b, x0, cfg, option_as_size(choice, "inner", 0));
    if (choice.name == "kaczmarz")
        return randomized_kaczmarz(a, b, x0, cfg, option_as_sampling(choice));
    if (choice.name == "plss-kz")
        return plss_kaczmarz(a, b, x0, cfg, {}, option_as_sampling(choice));
    if (choice.name == "cg") return cg_reference(a, b, x0, cfg);
    if (choice.name == "randn") {
        SketchSpec spec;
        spec.variant = SketchVariant::RandomNormal;
        spec.rank = std::min<std::size_t>(option_as_size(choice, "r", 50), a.nrows());
        spec.seed = cfg.seed;
        return sketch_project_explicit(a, b, x0, cfg, spec);
    }
    throw std::invalid_argument("unknown solver: " + choice.name);
}

inline std::string problem_display_name(const std::string& path) {
    const auto slash = path.find_last_of("/\\");
    std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
    const auto dot = stem.find_last_of('.');
    if (dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
    return stem;
}

inline std::size_t bench_thread_count(std::size_t n_problems) {
    std::size_t threads = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("BENCH_THREADS")) {
        const long parsed = std::strtol(env, nullptr, 10);
        if (parsed > 0) threads = static_cast<std::size_t>(parsed);
    }
    if (threads == 0) threads = 1;
    return std::min(std::max<std::size_t>(threads, 1), std::max<std::size_t>(n_problems, 1));
}

}  // namespace detail

/// Run every solver on every problem. Problems are distributed over worker
/// threads (BENCH_THREADS overrides the count); the timing repetitions of a
/// single pair stay on one thread and the reported seconds is their median.
/// Solver and parse failures become rows, never aborting the sweep, and
/// results are deterministic for a fixed spec apart from timings.
inline std::vector<BenchResult> run_benchmark(const BenchmarkSpec& spec) {
    if (spec.problems.empty()) throw std::invalid_argument("no problems given");
    if (spec.solvers.empty()) throw std::invalid_argument("no solvers given");
    if (!(spec.tol > 0.0)) throw std::invalid_argument("tol must be positive");
    const std::size_t reps = std::max<std::size_t>(spec.repetitions, 1);

    std::vector<std::vector<BenchResult>> per_problem(spec.problems.size());

    auto solve_problem = [&](std::size_t pi) {
        const std::string& path = spec.problems[pi];
        const std::string display = detail::problem_display_name(path);
        auto& rows = per_problem[pi];

        SparseMatrixCSR a;
        std::vector<double> b;
        try {
            std::ifstream in(path);
            if (!in) throw std::runtime_error("cannot open " + path);
            a = read_matrix_market(in);
            b = build_rhs(a, spec.rhs_mode, spec.seed, spec.rhs_file).first;
        } catch (const std::exception& e) {
            BenchResult row;
            row.problem = display;
            row.solver = "-";
            row.error = e.what();
            row.report.status = SolveStatus::Error;
            rows.push_back(std::move(row));
            return;
        }

        SolverConfig cfg;
        cfg.tol = spec.tol;
        cfg.maxit = spec.maxit_rule.resolve(a.ncols());
        cfg.seed = spec.seed;

        for (const SolverChoice& choice : spec.solvers) {
            BenchResult row;
            row.problem = display;
            row.solver = choice.label();
            try {
                std::vector<double> seconds;
                for (std::size_t rep = 0; rep < reps; ++rep) {
                    SolveReport r = detail::dispatch_solver(choice, a, b, cfg);
                    seconds.push_back(r.seconds);
                    if (rep == 0) row.report = std::move(r);
                }
                std::sort(seconds.begin(), seconds.end());
                row.report.seconds = seconds[seconds.size() / 2];
            } catch (const std::exception& e) {
                row.error = e.what();
                row.report = SolveReport{};
                row.report.status = SolveStatus::Error;
                row.report.final_x.assign(a.ncols(), 0.0);
            }
            rows.push_back(std::move(row));
        }
    };

    const std::size_t n_threads = detail::bench_thread_count(spec.problems.size());
    if (n_threads <= 1) {
        for (std::size_t pi = 0; pi < spec.problems.size(); ++pi) solve_problem(pi);
    } else {
        std::vector<std::thread> workers;
        std::atomic<std::size_t> next{0};
        for (std::size_t w = 0; w < n_threads; ++w)
            workers.emplace_back([&] {
                for (std::size_t pi = next.fetch_add(1); pi < spec.problems.size();
                     pi = next.fetch_add(1))
                    solve_problem(pi);
            });
        for (auto& t : workers) t.join();
    }

    std::vector<BenchResult> out;
    for (auto& rows : per_problem)
        for (auto& row : rows) out.push_back(std::move(row));
    return out;
}

}  // namespace plss

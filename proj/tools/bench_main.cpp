// Benchmark harness: run solver sweeps over matrix market problems and turn
// the resulting CSV tables into performance profiles.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plss/plss.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<std::string> expand_problem_paths(const std::vector<std::string>& inputs) {
    std::vector<std::string> out;
    for (const std::string& path : inputs) {
        if (fs::is_directory(path)) {
            std::vector<std::string> found;
            for (const auto& entry : fs::directory_iterator(path)) {
                if (!entry.is_regular_file()) continue;
                if (entry.path().extension() == ".mtx") found.push_back(entry.path().string());
            }
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else {
            out.push_back(path);
        }
    }
    return out;
}

std::vector<std::string> split_csv_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string piece;
    while (std::getline(ss, piece, ',')) {
        if (!piece.empty()) out.push_back(piece);
    }
    return out;
}

int run_command(const std::string& problems_arg, const std::string& solvers_arg, double tol,
                double maxit_frac, std::size_t maxit_fixed, const std::string& rhs,
                std::uint64_t seed, std::size_t reps, const std::string& out_path) {
    plss::BenchmarkSpec spec;
    spec.problems = expand_problem_paths(split_csv_list(problems_arg));
    for (const std::string& s : split_csv_list(solvers_arg))
        spec.solvers.push_back(plss::parse_solver_choice(s));
    spec.tol = tol;
    spec.maxit_rule = maxit_fixed > 0 ? plss::MaxitRule::fixed_limit(maxit_fixed)
                                      : plss::MaxitRule::fraction_of_n(maxit_frac);
    if (rhs == "ones") {
        spec.rhs_mode = plss::RhsMode::OnesSolution;
    } else if (rhs == "randn") {
        spec.rhs_mode = plss::RhsMode::SeededRandomSolution;
    } else if (rhs.rfind("file:", 0) == 0) {
        spec.rhs_mode = plss::RhsMode::FromFile;
        spec.rhs_file = rhs.substr(5);
    } else {
        throw std::invalid_argument("unknown rhs mode: " + rhs);
    }
    spec.seed = seed;
    spec.repetitions = reps;

    const std::vector<plss::BenchResult> results = plss::run_benchmark(spec);

    std::vector<plss::ReportRow> rows;
    std::size_t failures = 0;
    for (const plss::BenchResult& r : results) {
        rows.emplace_back(r.problem, r.solver, r.report);
        if (r.report.status != plss::SolveStatus::Converged) ++failures;
        if (!r.error.empty())
            std::cerr << "note: " << r.problem << " / " << r.solver << ": " << r.error << "\n";
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open output file: " + out_path);
    plss::write_csv_report(std::move(rows), out);

    std::cout << "wrote " << results.size() << " rows (" << failures
              << " not converged) to " << out_path << "\n";
    return 0;
}

struct CsvTable {
    std::vector<std::string> problems;
    std::vector<std::string> solvers;
    std::vector<std::vector<double>> t;
    std::vector<std::vector<bool>> failures;
};

CsvTable load_results_csv(const std::string& path, const std::string& metric) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty results file");

    std::vector<std::string> header = split_csv_list(line);
    const auto column = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw std::runtime_error("missing column: " + name);
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t col_problem = column("problem");
    const std::size_t col_solver = column("solver");
    const std::size_t col_status = column("status");
    const std::size_t col_metric = column(metric);

    struct Cell {
        double value;
        bool failed;
    };
    std::map<std::string, std::map<std::string, Cell>> cells;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields = split_csv_list(line);
        if (fields.size() < header.size()) continue;
        if (fields[col_solver] == "-") continue;  // problem-level error row
        Cell cell;
        cell.failed = fields[col_status] != "converged";
        cell.value = std::strtod(fields[col_metric].c_str(), nullptr);
        cells[fields[col_problem]][fields[col_solver]] = cell;
    }
    if (cells.empty()) throw std::runtime_error("no solver rows in " + path);

    CsvTable table;
    std::map<std::string, std::size_t> solver_index;
    for (const auto& [problem, row] : cells)
        for (const auto& [solver, cell] : row)
            if (solver_index.emplace(solver, solver_index.size()).second)
                table.solvers.push_back(solver);
    std::sort(table.solvers.begin(), table.solvers.end());
    solver_index.clear();
    for (std::size_t s = 0; s < table.solvers.size(); ++s) solver_index[table.solvers[s]] = s;

    for (const auto& [problem, row] : cells) {
        table.problems.push_back(problem);
        std::vector<double> tp(table.solvers.size(), 0.0);
        std::vector<bool> fp(table.solvers.size(), true);
        for (const auto& [solver, cell] : row) {
            const std::size_t s = solver_index[solver];
            tp[s] = cell.value;
            fp[s] = cell.failed || !(cell.value > 0.0);
        }
        table.t.push_back(std::move(tp));
        table.failures.push_back(std::move(fp));
    }
    return table;
}

int profile_command(const std::string& in_path, const std::string& metric,
                    const std::string& variant_name, const std::string& svg_path) {
    const CsvTable table = load_results_csv(in_path, metric);
    plss::ProfileVariant variant = plss::ProfileVariant::MinOverAll;
    if (variant_name == "paper")
        variant = plss::ProfileVariant::PaperExcludeSelf;
    else if (variant_name != "dolan-more")
        throw std::invalid_argument("unknown profile variant: " + variant_name);

    const plss::ProfileData profile = plss::performance_profile(table.t, table.failures, variant);

    std::ofstream svg(svg_path);
    if (!svg) throw std::runtime_error("cannot open svg output: " + svg_path);
    plss::emit_profile_svg(profile, table.solvers, svg);

    fs::path csv_path(svg_path);
    csv_path.replace_extension(".csv");
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot open csv output: " + csv_path.string());
    plss::write_profile_csv(profile, table.solvers, csv);

    std::cout << "wrote " << svg_path << " and " << csv_path.string() << " ("
              << table.problems.size() << " problems, " << table.solvers.size()
              << " solvers)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sketch-and-project solver benchmark"};
    app.require_subcommand(1);

    std::string problems_arg, solvers_arg = "plss-i,plss-a,cg";
    std::string rhs = "ones", out_path = "results.csv";
    double tol = 1e-4, maxit_frac = 1.1;
    std::size_t maxit_fixed = 0, reps = 1;
    std::uint64_t seed = 0;

    CLI::App* run = app.add_subcommand("run", "run a solver sweep and write a CSV table");
    run->add_option("--problems", problems_arg,
                    "comma-separated matrix market files or directories")
        ->required();
    run->add_option("--solvers", solvers_arg,
                    "comma-separated solvers: plss-i, plss-diag, plss-a, plss-ainv, "
                    "plss-nested, kaczmarz, plss-kz, randn:r=N, cg");
    run->add_option("--tol", tol, "relative residual tolerance");
    run->add_option("--maxit-frac", maxit_frac, "iteration limit as a fraction of n");
    run->add_option("--maxit", maxit_fixed, "fixed iteration limit (overrides --maxit-frac)");
    run->add_option("--rhs", rhs, "ones | randn | file:PATH");
    run->add_option("--seed", seed, "seed for rhs construction and randomized solvers");
    run->add_option("--reps", reps, "timing repetitions per (problem, solver)");
    run->add_option("--out", out_path, "output CSV path");

    std::string in_path, metric = "seconds", variant = "dolan-more", svg_path = "profile.svg";
    CLI::App* profile = app.add_subcommand("profile", "performance profile from a results CSV");
    profile->add_option("--in", in_path, "results CSV from `bench run`")->required();
    profile->add_option("--metric", metric, "seconds | iterations | matvecs");
    profile->add_option("--variant", variant, "dolan-more | paper");
    profile->add_option("--svg", svg_path, "output SVG path (the raw curve CSV lands beside it)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return run_command(problems_arg, solvers_arg, tol, maxit_frac, maxit_fixed, rhs, seed,
                               reps, out_path);
        return profile_command(in_path, metric, variant, svg_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

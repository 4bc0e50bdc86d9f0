#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "plss/solve_types.hpp"

namespace plss {

namespace detail {

inline std::string format_float(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace detail

/// One benchmark outcome: (problem, solver, report). n is taken from the
/// solution length.
using ReportRow = std::tuple<std::string, std::string, SolveReport>;

/// CSV schema: problem,n,solver,status,iterations,matvecs,seconds,rel_residual
/// with rows ordered by problem then solver and LF line endings. The matvecs
/// column counts all operator applications (forward plus transpose).
inline void write_csv_report(std::vector<ReportRow> rows, std::ostream& out) {
    std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
        return std::get<1>(a) < std::get<1>(b);
    });
    out << "problem,n,solver,status,iterations,matvecs,seconds,rel_residual\n";
    for (const auto& [problem, solver, rep] : rows) {
        out << problem << "," << rep.final_x.size() << "," << solver << ","
            << to_string(rep.status) << "," << rep.iterations << ","
            << (rep.matvecs + rep.transpose_matvecs) << ","
            << detail::format_float(rep.seconds) << ","
            << detail::format_float(rep.final_relative_residual()) << "\n";
    }
    if (!out) throw std::runtime_error("csv report write failed");
}

}  // namespace plss

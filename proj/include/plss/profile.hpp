#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "plss/csv_report.hpp"

namespace plss {

enum class ProfileVariant {
    MinOverAll,        ///< standard Dolan-More ratio against the best of all solvers
    PaperExcludeSelf,  ///< ratio against the best of the other solvers
};

/// Performance-profile data: ratios pi[p][s] (+inf for failed runs) and one
/// nondecreasing step curve (tau, rho) per solver.
struct ProfileData {
    std::size_t n_problems = 0;
    std::size_t n_solvers = 0;
    std::vector<std::vector<double>> pi;
    std::vector<std::vector<std::pair<double, double>>> curves;
};

/// Build Dolan-More style profiles from the output matrix t[p][s]
/// (time or iterations) and a failure mask. Failed runs get pi = +inf and
/// never count toward rho; problems where every solver failed stay in the
/// denominator n_p.
inline ProfileData performance_profile(const std::vector<std::vector<double>>& t,
                                       const std::vector<std::vector<bool>>& failures,
                                       ProfileVariant variant = ProfileVariant::MinOverAll) {
    const std::size_t n_problems = t.size();
    if (n_problems == 0) throw std::invalid_argument("performance_profile: no problems");
    const std::size_t n_solvers = t.front().size();
    if (n_solvers == 0) throw std::invalid_argument("performance_profile: no solvers");
    if (failures.size() != n_problems)
        throw std::invalid_argument("performance_profile: failure mask shape mismatch");

    const double inf = std::numeric_limits<double>::infinity();
    ProfileData out;
    out.n_problems = n_problems;
    out.n_solvers = n_solvers;
    out.pi.assign(n_problems, std::vector<double>(n_solvers, inf));

    for (std::size_t p = 0; p < n_problems; ++p) {
        if (t[p].size() != n_solvers || failures[p].size() != n_solvers)
            throw std::invalid_argument("performance_profile: ragged input");
        for (std::size_t s = 0; s < n_solvers; ++s) {
            if (failures[p][s]) continue;
            if (!(t[p][s] > 0.0))
                throw std::invalid_argument("performance_profile: nonpositive output for a successful run");
            double best = inf;
            for (std::size_t i = 0; i < n_solvers; ++i) {
                if (failures[p][i]) continue;
                if (variant == ProfileVariant::PaperExcludeSelf && i == s) continue;
                best = std::min(best, t[p][i]);
            }
            // A solver that is the only successful one has no competitor
            // under the exclude-self variant; it counts as best.
            out.pi[p][s] = std::isinf(best) ? 1.0 : t[p][s] / best;
        }
    }

    std::set<double> taus{1.0};
    for (const auto& row : out.pi)
        for (double v : row)
            if (std::isfinite(v)) taus.insert(v);

    out.curves.assign(n_solvers, {});
    for (std::size_t s = 0; s < n_solvers; ++s) {
        for (double tau : taus) {
            std::size_t count = 0;
            for (std::size_t p = 0; p < n_problems; ++p)
                if (out.pi[p][s] <= tau) ++count;
            out.curves[s].emplace_back(tau, static_cast<double>(count) /
                                                static_cast<double>(n_problems));
        }
    }
    return out;
}

/// Raw (solver, tau, rho) rows for external plotting.
inline void write_profile_csv(const ProfileData& profile, const std::vector<std::string>& labels,
                              std::ostream& out) {
    if (labels.size() != profile.n_solvers)
        throw std::invalid_argument("profile labels do not match solver count");
    out << "solver,tau,rho\n";
    for (std::size_t s = 0; s < profile.n_solvers; ++s)
        for (const auto& [tau, rho] : profile.curves[s])
            out << labels[s] << "," << detail::format_float(tau) << ","
                << detail::format_float(rho) << "\n";
    if (!out) throw std::runtime_error("profile csv write failed");
}

/// Self-contained SVG with one step curve per solver on a log2 tau axis and
/// a legend from the labels.
inline void emit_profile_svg(const ProfileData& profile, const std::vector<std::string>& labels,
                             std::ostream& out) {
    if (profile.n_solvers == 0 || profile.curves.empty() ||
        profile.curves.front().empty())
        throw std::invalid_argument("nothing to plot");
    if (labels.size() != profile.n_solvers)
        throw std::invalid_argument("profile labels do not match solver count");

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    const std::size_t n_colors = sizeof(palette) / sizeof(palette[0]);

    double max_log_tau = 0.0;
    for (const auto& curve : profile.curves)
        for (const auto& [tau, rho] : curve) max_log_tau = std::max(max_log_tau, std::log2(tau));
    if (max_log_tau <= 0.0) max_log_tau = 1.0;

    const double width = 640.0, height = 480.0;
    const double left = 60.0, right = 20.0, top = 20.0, bottom = 50.0;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;
    auto x_of = [&](double tau) { return left + std::log2(tau) / max_log_tau * plot_w; };
    auto y_of = [&](double rho) { return top + (1.0 - rho) * plot_h; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "  <rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#333\"/>\n";

    for (int e = 0; e <= static_cast<int>(std::ceil(max_log_tau)); ++e) {
        const double tau = std::pow(2.0, e);
        const double x = x_of(std::min(tau, std::pow(2.0, max_log_tau)));
        out << "  <line x1=\"" << x << "\" y1=\"" << top + plot_h << "\" x2=\"" << x << "\" y2=\""
            << top + plot_h + 5 << "\" stroke=\"#333\"/>\n";
        out << "  <text x=\"" << x << "\" y=\"" << top + plot_h + 20
            << "\" font-size=\"12\" text-anchor=\"middle\">" << detail::format_float(tau)
            << "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
        const double rho = i / 4.0;
        out << "  <text x=\"" << left - 8 << "\" y=\"" << y_of(rho) + 4
            << "\" font-size=\"12\" text-anchor=\"end\">" << detail::format_float(rho)
            << "</text>\n";
    }
    out << "  <text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
        << "\" font-size=\"13\" text-anchor=\"middle\">performance ratio tau (log2 axis)"
        << "</text>\n";

    for (std::size_t s = 0; s < profile.n_solvers; ++s) {
        const auto& curve = profile.curves[s];
        out << "  <polyline fill=\"none\" stroke=\"" << palette[s % n_colors]
            << "\" stroke-width=\"2\" points=\"";
        double prev_rho = curve.front().second;
        for (std::size_t i = 0; i < curve.size(); ++i) {
            const auto& [tau, rho] = curve[i];
            if (i > 0) out << x_of(tau) << "," << y_of(prev_rho) << " ";
            out << x_of(tau) << "," << y_of(rho) << " ";
            prev_rho = rho;
        }
        out << x_of(std::pow(2.0, max_log_tau)) << "," << y_of(prev_rho);
        out << "\"/>\n";
    }

    for (std::size_t s = 0; s < profile.n_solvers; ++s) {
        const double ly = top + 16 + 18 * static_cast<double>(s);
        out << "  <line x1=\"" << left + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + 34
            << "\" y2=\"" << ly << "\" stroke=\"" << palette[s % n_colors]
            << "\" stroke-width=\"2\"/>\n";
        out << "  <text x=\"" << left + 40 << "\" y=\"" << ly + 4
            << "\" font-size=\"12\" class=\"legend\">" << labels[s] << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("profile svg write failed");
}

}  // namespace plss

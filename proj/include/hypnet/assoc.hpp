#pragma once

// Association studies: errors of solution nets against exact or connected
// solutions, fitted rates, and moderateness of solution-norm nets.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hypnet/csv.hpp"
#include "hypnet/epsnets.hpp"
#include "hypnet/evolve.hpp"
#include "hypnet/mollify.hpp"
#include "hypnet/problems.hpp"

namespace hypnet {

enum class ErrorNorm { L2, Sup, Weighted };

inline const char* to_string(ErrorNorm n) {
    switch (n) {
    case ErrorNorm::L2:
        return "L2";
    case ErrorNorm::Sup:
        return "sup";
    case ErrorNorm::Weighted:
        return "weighted";
    }
    return "?";
}

/// One epsilon-member: the Cauchy problem and a weight for the weighted norm.
struct StudyMember {
    CauchyProblem problem;
    ScalarField weight; ///< empty means weight 1
};

/// States of the compared component at the requested times.
using MemberSolver = std::function<std::vector<SpectralField>(const StudyMember&, const std::vector<double>& times)>;

struct StudySpec {
    std::string id = "study";
    TorusGrid grid;
    MollifierRate rate = MollifierRate::logarithmic();
    double T = 1.0;
    std::vector<double> times; ///< empty means {T/2, T}
    int component = 0;         ///< state component compared with the oracle
    std::function<StudyMember(double eps)> member;
    std::function<SpectralField(double t)> oracle; ///< scalar reference field
    MemberSolver solver;                           ///< empty means evolve::solve
    SolveOptions solve_options;
};

struct ConvergenceRow {
    double eps = 0.0;
    double omega = 0.0;
    double t = 0.0;
    double l2 = std::numeric_limits<double>::quiet_NaN();
    double sup = std::numeric_limits<double>::quiet_NaN();
    double weighted = std::numeric_limits<double>::quiet_NaN();
    std::string status = "ok";

    double get(ErrorNorm n) const { return n == ErrorNorm::L2 ? l2 : n == ErrorNorm::Sup ? sup : weighted; }
};

struct RateFit {
    ErrorNorm norm = ErrorNorm::L2;
    double rate_eps = 0.0;   ///< slope of log error against log eps
    double residual_eps = 0.0;
    double rate_omega = 0.0; ///< slope of log error against log(1/omega)
    double residual_omega = 0.0;
    bool valid = false;
};

struct ConvergenceReport {
    std::string id;
    int grid_points = 0;
    std::vector<double> eps;
    std::vector<ConvergenceRow> rows; ///< ordered by eps, then time
    std::vector<RateFit> rates;       ///< at the final comparison time
    bool monotone_tail = false;       ///< last 5 L2 errors at the final time strictly decreasing
    std::vector<std::string> failures;

    /// L2 errors at the final comparison time, one per eps (NaN when failed).
    std::vector<double> final_errors(ErrorNorm n = ErrorNorm::L2) const {
        std::vector<double> out;
        if (rows.empty())
            return out;
        double tmax = 0.0;
        for (const auto& r : rows)
            tmax = std::max(tmax, r.t);
        for (const auto& r : rows)
            if (r.t == tmax)
                out.push_back(r.get(n));
        return out;
    }
};

namespace detail {

inline std::vector<SpectralField> default_member_solver(const StudyMember& m, const std::vector<double>& times,
                                                        const SolveOptions& opt, int component) {
    const auto tr = solve(m.problem, opt);
    std::vector<SpectralField> out;
    for (double t : times) {
        std::size_t best = 0;
        for (std::size_t k = 0; k < tr.times.size(); ++k)
            if (std::abs(tr.times[k] - t) < std::abs(tr.times[best] - t))
                best = k;
        if (std::abs(tr.times[best] - t) > 1e-9 * std::max(1.0, t))
            throw ArgumentError("association_study: time " + csv::num(t) + " is not a stored step");
        out.push_back(tr.states[best].component(component));
    }
    return out;
}

inline bool strictly_decreasing_tail(const std::vector<double>& v, std::size_t tail) {
    if (v.size() < tail)
        return false;
    for (std::size_t k = v.size() - tail; k + 1 < v.size(); ++k)
        if (!(v[k + 1] < v[k]))
            return false;
    return true;
}

} // namespace detail

inline ConvergenceReport association_study(const StudySpec& spec, const EpsilonGrid& grid) {
    if (!spec.member || !spec.oracle)
        throw ArgumentError("association_study: member factory and oracle are required");
    std::vector<double> times = spec.times.empty() ? std::vector<double>{spec.T / 2, spec.T} : spec.times;
    std::sort(times.begin(), times.end());
    ConvergenceReport rep;
    rep.id = spec.id;
    rep.grid_points = spec.grid.points_per_axis();
    rep.eps = grid.values();

    std::vector<SpectralField> reference;
    for (double t : times)
        reference.push_back(spec.oracle(t));

    const double measure = spec.grid.volume();
    for (double eps : grid.values()) {
        const double omega = spec.rate(eps);
        try {
            const StudyMember m = spec.member(eps);
            const auto states = spec.solver ? spec.solver(m, times)
                                            : detail::default_member_solver(m, times, spec.solve_options,
                                                                            spec.component);
            for (std::size_t k = 0; k < times.size(); ++k) {
                const SpectralField diff = states[k] - reference[k];
                ConvergenceRow row{eps, omega, times[k]};
                row.l2 = l2_norm(diff);
                row.sup = sup_norm(diff);
                double w = 0.0;
                for (int i = 0; i < spec.grid.size(); ++i)
                    w += (m.weight ? m.weight(spec.grid.point(i)) : 1.0) * std::norm(diff.value(0, i));
                row.weighted = std::sqrt(w * spec.grid.cell_volume());
                if (row.l2 > row.sup * std::sqrt(measure) * (1.0 + 1e-12))
                    throw NumericalFault("association_study: L2 error exceeds sup bound");
                rep.rows.push_back(row);
            }
        } catch (const Error& e) {
            rep.failures.push_back("eps=" + csv::num(eps) + ": " + e.what());
            for (double t : times) {
                ConvergenceRow row{eps, omega, t};
                row.status = "failed";
                rep.rows.push_back(row);
            }
        }
    }

    for (ErrorNorm n : {ErrorNorm::L2, ErrorNorm::Sup, ErrorNorm::Weighted}) {
        const auto e = rep.final_errors(n);
        std::vector<double> le, lw, ly;
        for (std::size_t k = 0; k < e.size(); ++k)
            if (std::isfinite(e[k]) && e[k] > 0.0) {
                le.push_back(std::log(rep.eps[k]));
                lw.push_back(-std::log(spec.rate(rep.eps[k])));
                ly.push_back(std::log(e[k]));
            }
        RateFit f;
        f.norm = n;
        if (ly.size() >= 2) {
            const auto a = least_squares_line(le, ly);
            const auto b = least_squares_line(lw, ly);
            f.rate_eps = a.slope;
            f.residual_eps = a.residual;
            f.rate_omega = b.slope;
            f.residual_omega = b.residual;
            f.valid = true;
        }
        rep.rates.push_back(f);
    }
    rep.monotone_tail = detail::strictly_decreasing_tail(rep.final_errors(), 5);
    return rep;
}

struct ModeratenessProfile {
    std::vector<double> orders;
    std::vector<NetSample> nets;
    std::vector<AsymptoticClass> classes;
    bool uniform = true; ///< fitted growth exponent independent of the order (G-infinity regular)
};

/// Classifies eps -> |u_eps(T)|_l for each l; `final_state` returns u_eps(T).
/// Decay is recognised up to `decay_orders` powers of eps (0 disables it).
inline ModeratenessProfile moderateness_profile(const std::function<SpectralField(double eps)>& final_state,
                                                const EpsilonGrid& grid, const std::vector<double>& orders,
                                                double uniform_tolerance = 0.25, const ClassifierOptions& copt = {},
                                                int decay_orders = 0) {
    ModeratenessProfile p;
    p.orders = orders;
    std::vector<std::vector<double>> values(orders.size());
    for (double eps : grid.values()) {
        const SpectralField u = final_state(eps);
        for (std::size_t k = 0; k < orders.size(); ++k)
            values[k].push_back(sobolev_norm(orders[k], u));
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = 0; k < orders.size(); ++k) {
        p.nets.emplace_back(grid, values[k]);
        p.classes.push_back(classify_net(p.nets.back(), decay_orders, copt));
        const double growth = -p.classes.back().fitted_exponent;
        lo = std::min(lo, growth);
        hi = std::max(hi, growth);
    }
    p.uniform = orders.empty() || hi - lo <= uniform_tolerance;
    return p;
}

/// Convenience overload solving each member to its horizon.
inline ModeratenessProfile moderateness_profile(const std::function<CauchyProblem(double eps)>& member,
                                                const EpsilonGrid& grid, const std::vector<double>& orders,
                                                const SolveOptions& opt = {}, double uniform_tolerance = 0.25) {
    return moderateness_profile([&](double eps) { return solve(member(eps), opt).final_state(); }, grid, orders,
                                uniform_tolerance);
}

namespace detail {

inline std::ofstream open_report_file(const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f)
        throw Error("emit_report: cannot write " + p.string());
    return f;
}

} // namespace detail

/// Base name <id>_N<N>_eps<max>-<min>.
inline std::string report_basename(const ConvergenceReport& cr) {
    std::string name = cr.id + "_N" + std::to_string(cr.grid_points);
    if (!cr.eps.empty())
        name += "_eps" + csv::short_num(cr.eps.front(), 4) + "-" + csv::short_num(cr.eps.back(), 4);
    return name;
}

/// Writes <base>_errors.csv, <base>_long.csv and <base>_summary.txt into dir.
inline std::vector<std::filesystem::path> emit_report(const ConvergenceReport& cr, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw Error("emit_report: cannot create " + dir.string() + ": " + ec.message());
    const std::string base = report_basename(cr);
    const auto errors = dir / (base + "_errors.csv");
    const auto longf = dir / (base + "_long.csv");
    const auto summary = dir / (base + "_summary.txt");
    {
        auto f = detail::open_report_file(errors);
        f << "eps,omega,t,L2,sup,weighted,status\n";
        for (const auto& r : cr.rows)
            f << csv::num(r.eps) << ',' << csv::num(r.omega) << ',' << csv::num(r.t) << ',' << csv::num(r.l2) << ','
              << csv::num(r.sup) << ',' << csv::num(r.weighted) << ',' << r.status << '\n';
    }
    {
        auto f = detail::open_report_file(longf);
        f << "eps,omega,t,norm,error\n";
        for (const auto& r : cr.rows)
            for (ErrorNorm n : {ErrorNorm::L2, ErrorNorm::Sup, ErrorNorm::Weighted})
                f << csv::num(r.eps) << ',' << csv::num(r.omega) << ',' << csv::num(r.t) << ',' << to_string(n) << ','
                  << csv::num(r.get(n)) << '\n';
    }
    {
        auto f = detail::open_report_file(summary);
        f << "study " << cr.id << "\n";
        f << "grid points per axis " << cr.grid_points << "\n";
        f << "epsilon values " << cr.eps.size() << "\n";
        f << "monotone tail (last 5, L2) " << (cr.monotone_tail ? "yes" : "no") << "\n";
        f << "empirical rates at the final time (slope of log error)\n";
        for (const auto& r : cr.rates) {
            f << "  " << to_string(r.norm) << ": ";
            if (!r.valid) {
                f << "not enough data\n";
                continue;
            }
            f << "vs eps " << csv::short_num(r.rate_eps, 6) << " (residual " << csv::short_num(r.residual_eps, 3)
              << "), vs 1/omega " << csv::short_num(r.rate_omega, 6) << " (residual "
              << csv::short_num(r.residual_omega, 3) << ")\n";
        }
        for (const auto& m : cr.failures)
            f << "failure " << m << "\n";
    }
    return {errors, longf, summary};
}

} // namespace hypnet

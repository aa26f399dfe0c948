#pragma once

// Method-of-lines solver for d_t u = K(t,x,D) u + f with u(0) = g, energy
// functionals E_l(t) = Re(S <D>^l u, <D>^l u) and the Gronwall bound check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <utility>
#include <vector>

#include "hypnet/csv.hpp"
#include "hypnet/epsnets.hpp"
#include "hypnet/symbolgrid.hpp"
#include "hypnet/symmetriser.hpp"

namespace hypnet {

using SourceFn = std::function<SpectralField(double t)>;

struct CauchyProblem {
    SymbolMatrix K;
    SourceFn f; ///< empty means zero source
    SpectralField g;
    double T = 1.0;
    double eps = 1.0;

    void validate() const {
        if (K.size() != g.components())
            throw ArgumentError("CauchyProblem: K has size " + std::to_string(K.size()) + " but data has " +
                                std::to_string(g.components()) + " components");
        if (K.dim() != g.grid().dim())
            throw ArgumentError("CauchyProblem: symbol and grid dimensions differ");
        if (!(T > 0.0) || !std::isfinite(T))
            throw ArgumentError("CauchyProblem: horizon must be positive");
    }
};

struct SolveOptions {
    double dt = 0.0;          ///< 0 selects the automatic step
    double kappa = 0.5;       ///< safety factor of the automatic step
    int store_every = 1;      ///< keep every k-th step (the final state is always kept)
    double blowup_factor = 1e12;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<SpectralField> states;
    double step_size = 0.0;
    int steps = 0;
    int order = 4;

    const SpectralField& final_state() const { return states.back(); }
};

/// sup over sampled (t, x) and a frequency stencil of |K|_2 / <xi>.
inline double operator_estimate(const SymbolMatrix& K, const TorusGrid& g, double T) {
    const double top = g.points_per_axis() / 2.0;
    std::vector<double> freqs{1.0, top / 4.0, top};
    std::vector<Coord> xis;
    for (double a : freqs)
        for (double s : {-1.0, 1.0}) {
            if (g.dim() == 1) {
                xis.push_back({s * a, 0.0});
            } else {
                for (double b : freqs)
                    for (double s2 : {-1.0, 1.0})
                        xis.push_back({s * a, s2 * b});
            }
        }
    const int nt = K.time_independent() ? 1 : 9;
    double sup = 0.0;
    for (int it = 0; it < nt; ++it) {
        const double t = nt == 1 ? 0.0 : T * it / (nt - 1);
        for (int j = 0; j < g.size(); ++j) {
            const Coord x = g.point(j);
            for (const auto& xi : xis)
                sup = std::max(sup, matrix_norm2(K.evaluator()(t, x, xi)) / bracket(xi, g.dim()));
        }
    }
    return sup;
}

/// Automatic step kappa / (sup |K|/<xi> * <xi_max>).
inline double auto_step(const SymbolMatrix& K, const TorusGrid& g, double T, double kappa = 0.5) {
    const double est = operator_estimate(K, g, T);
    if (!(est > 0.0))
        return T;
    return kappa / (est * std::sqrt(1.0 + g.max_frequency() * g.max_frequency()));
}

/// Classical four-stage Runge-Kutta on the physical values.
inline Trajectory solve(const CauchyProblem& p, const SolveOptions& opt = {}) {
    p.validate();
    const TorusGrid& g = p.g.grid();
    const int m = p.K.size();
    const GridOperator op(p.K, g);
    double dt = opt.dt > 0.0 ? opt.dt : auto_step(p.K, g, p.T, opt.kappa);
    int steps = std::max(1, int(std::ceil(p.T / dt - 1e-9)));
    if (opt.dt <= 0.0 && steps % 2 == 1)
        ++steps; // automatic steps are even so T/2 is a step boundary
    dt = p.T / steps;
    const int keep = std::max(1, opt.store_every);

    using Vec = Eigen::VectorXcd;
    auto to_vec = [](const std::vector<cplx>& v) { return Eigen::Map<const Vec>(v.data(), Eigen::Index(v.size())); };
    auto rhs = [&](double t, const Vec& u) {
        std::vector<cplx> in(u.data(), u.data() + u.size());
        Vec out = to_vec(op.apply(t, in));
        if (p.f)
            out += to_vec(p.f(t).physical());
        return out;
    };

    Trajectory tr;
    tr.step_size = dt;
    tr.steps = steps;
    tr.times.push_back(0.0);
    tr.states.push_back(p.g);
    Vec u = to_vec(p.g.physical());
    const double n0 = u.norm();
    const double limit = opt.blowup_factor * std::max(n0, std::numeric_limits<double>::min());
    for (int s = 0; s < steps; ++s) {
        const double t = s * dt;
        const Vec k1 = rhs(t, u);
        const Vec k2 = rhs(t + 0.5 * dt, u + 0.5 * dt * k1);
        const Vec k3 = rhs(t + 0.5 * dt, u + 0.5 * dt * k2);
        const Vec k4 = rhs(t + dt, u + dt * k3);
        u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double nrm = u.norm();
        const double tn = (s + 1) * dt;
        if (!std::isfinite(nrm))
            throw NumericalFault("solve: non-finite state at t = " + csv::num(tn));
        if (n0 > 0.0 && nrm > limit)
            throw BlowUpError("solve: state norm exceeded " + csv::num(opt.blowup_factor) + " times the initial norm",
                              tn);
        if ((s + 1) % keep == 0 || s + 1 == steps) {
            tr.times.push_back(s + 1 == steps ? p.T : tn);
            tr.states.push_back(SpectralField::from_physical(g, m, std::vector<cplx>(u.data(), u.data() + u.size())));
        }
    }
    return tr;
}

struct EnergyLedger {
    double l = 0.0;
    std::vector<double> times;
    std::vector<double> E;
    double C_hat = 0.0;        ///< max over stored steps of the log-rate of E_l
    double c = 1.0;            ///< lower bound constant of S
    double source_bound = 0.0; ///< sup_t E_l-weighted source size, 0 when homogeneous
    double horizon = 0.0;

    /// d_l = E_l(0) + C sup |f|_l^2 T with C = max(C_hat, 1).
    double d() const { return E.front() + std::max(C_hat, 1.0) * source_bound * horizon; }
};

namespace detail {

inline EnergyLedger finish_ledger(EnergyLedger el) {
    el.C_hat = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < el.E.size(); ++k) {
        if (el.E[k] > 0.0 && el.E[k + 1] > 0.0) {
            const double h = el.times[k + 1] - el.times[k];
            el.C_hat = std::max(el.C_hat, (std::log(el.E[k + 1]) - std::log(el.E[k])) / h);
        }
    }
    if (!std::isfinite(el.C_hat))
        el.C_hat = 0.0;
    return el;
}

} // namespace detail

/// E_l(t) = Re(S <D>^l u, <D>^l u) for a symmetriser S = R0 + c1 <xi>^{-1}.
inline EnergyLedger energy_track(const Trajectory& tr, const SymmetriserPair& S, double l) {
    const SymmetriserOperator op(S, tr.states.front().grid());
    EnergyLedger el;
    el.l = l;
    el.c = S.c;
    el.times = tr.times;
    el.horizon = tr.times.back();
    for (std::size_t k = 0; k < tr.states.size(); ++k)
        el.E.push_back(op.energy(multiplier_apply(l, tr.states[k]), tr.times[k]));
    return detail::finish_ledger(std::move(el));
}

/// Same with an arbitrary symbol S (time independent) and its lower bound c.
inline EnergyLedger energy_track(const Trajectory& tr, const SymbolMatrix& S, double c, double l) {
    const GridOperator op(S, tr.states.front().grid());
    EnergyLedger el;
    el.l = l;
    el.c = c;
    el.times = tr.times;
    el.horizon = tr.times.back();
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
        const auto v = multiplier_apply(l, tr.states[k]);
        el.E.push_back(inner(op.apply(tr.times[k], v), v).real());
    }
    return detail::finish_ledger(std::move(el));
}

/// Records sup_t |f(t)|_l^2 over the trajectory times for the forced bound.
inline void attach_source(EnergyLedger& el, const SourceFn& f) {
    el.source_bound = 0.0;
    if (!f)
        return;
    for (double t : el.times)
        el.source_bound = std::max(el.source_bound, std::pow(sobolev_norm(el.l, f(t)), 2));
}

struct GronwallResult {
    bool holds = true;
    double slack = 0.0;       ///< min over t of (bound - value) / bound
    double witness_time = 0.0; ///< time of the minimum slack
};

/// |u(t)|_l^2 <= c^{-1} d_l exp(C t), C = C_hat (homogeneous) or
/// max(C_hat, 0) + 1 when a source is attached.
inline GronwallResult gronwall_check(const EnergyLedger& el, const Trajectory& tr) {
    if (el.E.size() != tr.states.size())
        throw ArgumentError("gronwall_check: ledger and trajectory differ in length");
    const double rate = el.source_bound > 0.0 ? std::max(el.C_hat, 0.0) + 1.0 : el.C_hat;
    GronwallResult r;
    r.slack = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
        const double value = std::pow(sobolev_norm(el.l, tr.states[k]), 2);
        const double bound = el.d() / el.c * std::exp(rate * tr.times[k]);
        const double slack = bound > 0.0 ? (bound - value) / bound : (value <= 0.0 ? 0.0 : -1.0);
        if (slack < r.slack) {
            r.slack = slack;
            r.witness_time = tr.times[k];
        }
    }
    r.holds = r.slack >= -1e-9;
    return r;
}

using ProblemFactory = std::function<CauchyProblem(double eps)>;

struct NegligibilityProbe {
    NetSample differences;
    bool exactly_zero = false;
    AsymptoticClass classification;
};

/// Solves with g and g + eps^q h for each eps and classifies |u_1(T) - u_0(T)|.
inline NegligibilityProbe negligible_difference_probe(const ProblemFactory& make, const EpsilonGrid& grid, double q,
                                                      const SpectralField& h, const SolveOptions& opt = {},
                                                      const ClassifierOptions& copt = {}) {
    NegligibilityProbe out;
    std::vector<double> diffs;
    bool all_zero = true;
    for (double eps : grid.values()) {
        CauchyProblem p0 = make(eps);
        CauchyProblem p1 = p0;
        p1.g = p0.g + h * cplx(std::pow(eps, q));
        const auto u0 = solve(p0, opt).final_state();
        const auto u1 = solve(p1, opt).final_state();
        const double d = l2_norm(u1 - u0);
        all_zero = all_zero && d == 0.0;
        diffs.push_back(d);
    }
    out.differences = NetSample(grid, std::move(diffs));
    out.exactly_zero = all_zero;
    if (!all_zero)
        out.classification = classify_net(out.differences, int(std::floor(q + 1e-9)), copt);
    return out;
}

/// Columns t, E_l, bound with bound = d_l exp(C t) on E_l.
inline void write_energy_csv(std::ostream& out, const EnergyLedger& el) {
    const double rate = el.source_bound > 0.0 ? std::max(el.C_hat, 0.0) + 1.0 : el.C_hat;
    out << "t,E_l,bound\n";
    for (std::size_t k = 0; k < el.E.size(); ++k)
        out << csv::num(el.times[k]) << ',' << csv::num(el.E[k]) << ','
            << csv::num(el.d() * std::exp(rate * el.times[k])) << '\n';
}

/// Snapshot at stored index k.
inline void write_snapshot_csv(std::ostream& out, const Trajectory& tr, std::size_t k) {
    out << "# t=" << csv::num(tr.times.at(k)) << '\n';
    write_field_csv(out, tr.states.at(k));
}

} // namespace hypnet

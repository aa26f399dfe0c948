#pragma once

// Concrete problems: n-dimensional acoustics, its wave-equation form, the 1D
// wave equation a w_tt = (b w_x)_x with coefficients jumping in space or in
// time, closed-form connected solutions and interface diagnostics.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hypnet/errors.hpp"
#include "hypnet/evolve.hpp"
#include "hypnet/mollify.hpp"
#include "hypnet/reduction.hpp"
#include "hypnet/symbolgrid.hpp"
#include "hypnet/torus.hpp"

namespace hypnet {

using ScalarField = std::function<double(const Coord&)>;
using TimeFunction = std::function<double(double)>;
using Fn1 = std::function<double(double)>;

// ---------------------------------------------------------------------------
// Coefficient helpers

/// c_eps on a torus grid, evaluable anywhere (nodal values at the grid points).
inline ScalarField regularized_field(const PiecewiseCoefficient& c, const MollifierFamily& f, const TorusGrid& g,
                                     double eps) {
    auto rc = std::make_shared<RegularizedCoefficient>(c, f, NodeAxis::torus(g), eps);
    return [rc](const Coord& x) { return (*rc)(x); };
}

/// c_eps(t) for a coefficient jumping in time, regularised on [t0, t1].
inline TimeFunction regularized_time_function(const PiecewiseCoefficient& c, const MollifierFamily& f, double t0,
                                              double t1, double eps) {
    const double omega = f.omega(eps);
    const int points = int(std::ceil((t1 - t0) * 8.0 * omega)) + 2;
    auto rc = std::make_shared<RegularizedCoefficient>(c, f, NodeAxis::interval(t0, t1, points), eps);
    return [rc](double t) { return rc->at_time(t); };
}

/// Nearest-node lookup of grid samples (exact at the grid points).
inline ScalarField grid_lookup(const TorusGrid& g, std::vector<double> values) {
    auto v = std::make_shared<std::vector<double>>(std::move(values));
    return [g, v](const Coord& x) {
        const int n = g.points_per_axis();
        auto index = [&](double s) {
            long i = std::lround((s + pi) / g.spacing());
            i %= n;
            if (i < 0)
                i += n;
            return int(i);
        };
        int idx = index(x[0]);
        if (g.dim() == 2)
            idx = idx * n + index(x[1]);
        return (*v)[std::size_t(idx)];
    };
}

// ---------------------------------------------------------------------------
// Acoustics

struct AcousticsProblem {
    int n = 1;
    PiecewiseCoefficient rho0;
    PiecewiseCoefficient c0;
    ScalarField p0;
    std::array<ScalarField, 2> v0;
    double T = 1.0;

    void validate() const {
        if (n != 1 && n != 2)
            throw ArgumentError("AcousticsProblem: n must be 1 or 2");
        for (const auto* c : {&rho0, &c0}) {
            if (c->dim() != n)
                throw ArgumentError("AcousticsProblem: coefficient dimension must equal n");
            if (!(c->lower() > 0.0))
                throw DomainError("AcousticsProblem: coefficients must be bounded below by a positive constant");
        }
    }
};

/// rho0 and c0 either exact or regularised at eps.
struct AcousticsCoefficients {
    ScalarField rho;
    ScalarField c;
    double omega = 0.0; ///< 0 for exact coefficients
};

inline AcousticsCoefficients acoustics_coefficients(const AcousticsProblem& pr, const TorusGrid& g,
                                                    std::optional<std::pair<MollifierFamily, double>> reg = {}) {
    pr.validate();
    if (!reg) {
        auto rho = pr.rho0;
        auto c = pr.c0;
        return {[rho](const Coord& x) { return rho(x); }, [c](const Coord& x) { return c(x); }, 0.0};
    }
    return {regularized_field(pr.rho0, reg->first, g, reg->second),
            regularized_field(pr.c0, reg->first, g, reg->second), reg->first.omega(reg->second)};
}

/// Symbol for u = (p, v_1..v_n): first row -i rho c^2 xi_k, first column -i xi_k / rho.
inline SymbolMatrix acoustics_symbol(int n, const AcousticsCoefficients& co) {
    if (n != 1 && n != 2)
        throw ArgumentError("acoustics_symbol: n must be 1 or 2");
    const int m = n + 1;
    auto rho = co.rho;
    auto c = co.c;
    std::vector<SeparableTerm> terms;
    for (int k = 0; k < n; ++k) {
        terms.push_back({[=](double, const Coord& x) {
                             CMatrix e = CMatrix::Zero(m, m);
                             const double cc = c(x);
                             e(0, k + 1) = rho(x) * cc * cc;
                             return e;
                         },
                         [k](const Coord& xi) { return cplx(0.0, -xi[std::size_t(k)]); }});
        terms.push_back({[=](double, const Coord& x) {
                             CMatrix e = CMatrix::Zero(m, m);
                             e(k + 1, 0) = 1.0 / rho(x);
                             return e;
                         },
                         [k](const Coord& xi) { return cplx(0.0, -xi[std::size_t(k)]); }});
    }
    auto K = SymbolMatrix::separable(m, 1.0, n, std::move(terms), true);
    K.set_zero_nyquist(true).set_name("acoustics");
    return K;
}

inline SymbolMatrix acoustics_symbol(const AcousticsProblem& pr, const TorusGrid& g,
                                     std::optional<std::pair<MollifierFamily, double>> reg = {}) {
    return acoustics_symbol(pr.n, acoustics_coefficients(pr, g, std::move(reg)));
}

/// Initial state (p0, v0) sampled on the grid.
inline SpectralField acoustics_state(const AcousticsProblem& pr, const TorusGrid& g) {
    const int m = pr.n + 1;
    return SpectralField::sample(g, m, [&](const Coord& x) {
        CVector z(m);
        z(0) = pr.p0(x);
        for (int k = 0; k < pr.n; ++k)
            z(k + 1) = pr.v0[std::size_t(k)](x);
        return z;
    });
}

/// (|p|^2 / (c^2 rho) + rho |v|^2) integrated, square root taken.
inline double weighted_norm(const SpectralField& state, const ScalarField& rho, const ScalarField& c) {
    const auto& g = state.grid();
    double s = 0.0;
    for (int i = 0; i < g.size(); ++i) {
        const Coord x = g.point(i);
        const double r = rho(x);
        const double cc = c(x);
        s += std::norm(state.value(0, i)) / (cc * cc * r);
        for (int k = 1; k < state.components(); ++k)
            s += r * std::norm(state.value(k, i));
    }
    return std::sqrt(s * g.cell_volume());
}

// ---------------------------------------------------------------------------
// Wave-equation form of acoustics

struct WaveForm {
    HigherOrderOperator op;
    std::vector<SpectralField> data; ///< (p0, d_t p(0))
};

/// d_t^2 p = c^2 Lap p + c^2 rho grad(1/rho) . grad p with d_t p(0) = -c^2 rho div v0.
inline WaveForm wave_form(const AcousticsProblem& pr, const AcousticsCoefficients& co, const TorusGrid& g) {
    pr.validate();
    const int n = pr.n;
    std::vector<double> c2(g.size()), rho(g.size()), inv_rho(g.size());
    for (int i = 0; i < g.size(); ++i) {
        const Coord x = g.point(i);
        c2[i] = co.c(x) * co.c(x);
        rho[i] = co.rho(x);
        inv_rho[i] = 1.0 / rho[i];
    }
    std::vector<std::vector<DifferentialTerm>> terms(2);
    const auto c2f = grid_lookup(g, c2);
    for (int k = 0; k < n; ++k) {
        std::array<int, 2> alpha{0, 0};
        alpha[std::size_t(k)] = 2;
        terms[1].push_back({[c2f](double, const Coord& x) { return c2f(x); }, alpha, "c^2"});
    }
    for (int k = 0; k < n; ++k) {
        const auto d = spectral_derivative(g, inv_rho, k, 1);
        std::vector<double> coef(g.size());
        for (int i = 0; i < g.size(); ++i)
            coef[i] = c2[i] * rho[i] * d[i];
        const auto f = grid_lookup(g, coef);
        std::array<int, 2> alpha{0, 0};
        alpha[std::size_t(k)] = 1;
        terms[1].push_back({[f](double, const Coord& x) { return f(x); }, alpha, "c^2 rho d(1/rho)"});
    }
    HigherOrderOperator op(2, n, std::move(terms), true);

    const auto state = acoustics_state(pr, g);
    std::vector<cplx> pt(g.size(), cplx{});
    for (int k = 0; k < n; ++k) {
        const auto dv = psido_apply(multiplier_symbol(n, 1, 1.0, [k](const Coord& xi) {
                                        return cplx(0.0, xi[std::size_t(k)]);
                                    }).set_zero_nyquist(true),
                                    0.0, state.component(k + 1));
        for (int i = 0; i < g.size(); ++i)
            pt[i] -= c2[i] * rho[i] * dv.value(0, i);
    }
    return WaveForm{std::move(op),
                    {state.component(0), SpectralField::from_physical(g, 1, std::move(pt))}};
}

// ---------------------------------------------------------------------------
// Direct solver for a higher-order scalar equation

/// First-order system in (w, d_t w, ..., d_t^{m-1} w) without symbol reduction.
inline SymbolMatrix direct_system(const HigherOrderOperator& op) {
    const int m = op.order();
    std::vector<SeparableTerm> terms;
    terms.push_back({[m](double, const Coord&) {
                         CMatrix e = CMatrix::Zero(m, m);
                         for (int r = 0; r + 1 < m; ++r)
                             e(r, r + 1) = 1.0;
                         return e;
                     },
                     [](const Coord&) { return cplx(1.0); }});
    for (int k = 1; k <= m; ++k)
        for (const auto& t : op.A(k)) {
            auto coef = t.coefficient;
            const int col = m - k;
            terms.push_back({[coef, m, col](double tt, const Coord& x) {
                                 CMatrix e = CMatrix::Zero(m, m);
                                 e(m - 1, col) = coef(tt, x);
                                 return e;
                             },
                             [t](const Coord& xi) { return t.multiplier(xi); }});
        }
    auto K = SymbolMatrix::separable(m, double(m), op.dim(), std::move(terms), op.time_independent());
    K.set_zero_nyquist(true).set_name("direct");
    return K;
}

/// Integrates the higher-order equation directly with step dt; returns w(T).
inline SpectralField solve_direct(const HigherOrderOperator& op, const std::vector<SpectralField>& data, double T,
                                  double dt) {
    const int m = op.order();
    if (int(data.size()) != m)
        throw ArgumentError("solve_direct: need m data fields");
    const TorusGrid g = data[0].grid();
    std::vector<cplx> v;
    for (const auto& d : data)
        v.insert(v.end(), d.physical().begin(), d.physical().end());
    CauchyProblem p{direct_system(op), {}, SpectralField::from_physical(g, m, std::move(v)), T, 1.0};
    SolveOptions opt;
    opt.dt = dt;
    opt.store_every = 1 << 30;
    return solve(p, opt).final_state().component(0);
}

// ---------------------------------------------------------------------------
// 1D wave equation a w_tt = (b w_x)_x

/// Flux form u = (w, w_t, b w_x) for coefficients depending on x only.
inline SymbolMatrix wave_system_space(const ScalarField& a, const ScalarField& b) {
    std::vector<SeparableTerm> terms;
    terms.push_back({[](double, const Coord&) {
                         CMatrix e = CMatrix::Zero(3, 3);
                         e(0, 1) = 1.0;
                         return e;
                     },
                     [](const Coord&) { return cplx(1.0); }});
    terms.push_back({[a](double, const Coord& x) {
                         CMatrix e = CMatrix::Zero(3, 3);
                         e(1, 2) = 1.0 / a(x);
                         return e;
                     },
                     [](const Coord& xi) { return cplx(0.0, xi[0]); }});
    terms.push_back({[b](double, const Coord& x) {
                         CMatrix e = CMatrix::Zero(3, 3);
                         e(2, 1) = b(x);
                         return e;
                     },
                     [](const Coord& xi) { return cplx(0.0, xi[0]); }});
    auto K = SymbolMatrix::separable(3, 1.0, 1, std::move(terms), true);
    K.set_zero_nyquist(true).set_name("wave-space");
    return K;
}

/// u = (w, w_t, w_x) for coefficients depending on t only.
inline SymbolMatrix wave_system_time(const TimeFunction& a, const TimeFunction& b) {
    std::vector<SeparableTerm> terms;
    terms.push_back({[](double, const Coord&) {
                         CMatrix e = CMatrix::Zero(3, 3);
                         e(0, 1) = 1.0;
                         return e;
                     },
                     [](const Coord&) { return cplx(1.0); }});
    terms.push_back({[a, b](double t, const Coord&) {
                         CMatrix e = CMatrix::Zero(3, 3);
                         e(1, 2) = b(t) / a(t);
                         return e;
                     },
                     [](const Coord& xi) { return cplx(0.0, xi[0]); }});
    terms.push_back({[](double, const Coord&) {
                         CMatrix e = CMatrix::Zero(3, 3);
                         e(2, 1) = 1.0;
                         return e;
                     },
                     [](const Coord& xi) { return cplx(0.0, xi[0]); }});
    auto K = SymbolMatrix::separable(3, 1.0, 1, std::move(terms), false);
    K.set_zero_nyquist(true).set_name("wave-time");
    return K;
}

/// d_x u with the Nyquist coefficient dropped.
inline SpectralField spectral_dx(const SpectralField& u) {
    std::vector<cplx> c = u.coefficients();
    const auto& g = u.grid();
    for (int comp = 0; comp < u.components(); ++comp)
        for (int k = 0; k < g.size(); ++k) {
            auto& z = c[std::size_t(comp) * g.size() + k];
            z = g.is_nyquist(k) ? cplx{} : z * cplx(0.0, g.frequency(k)[0]);
        }
    return SpectralField::from_coefficients(g, u.components(), std::move(c));
}

/// (w0, w1, b d_x w0) for the flux form.
inline SpectralField wave_state_space(const SpectralField& w0, const SpectralField& w1, const ScalarField& b) {
    const auto& g = w0.grid();
    const auto dx = spectral_dx(w0);
    std::vector<cplx> v(3 * std::size_t(g.size()));
    for (int i = 0; i < g.size(); ++i) {
        v[i] = w0.value(0, i);
        v[std::size_t(g.size()) + i] = w1.value(0, i);
        v[2 * std::size_t(g.size()) + i] = b(g.point(i)) * dx.value(0, i);
    }
    return SpectralField::from_physical(g, 3, std::move(v));
}

/// (w0, w1, d_x w0) for the time-jump form.
inline SpectralField wave_state_time(const SpectralField& w0, const SpectralField& w1) {
    const auto& g = w0.grid();
    const auto dx = spectral_dx(w0);
    std::vector<cplx> v(w0.physical());
    v.insert(v.end(), w1.physical().begin(), w1.physical().end());
    v.insert(v.end(), dx.physical().begin(), dx.physical().end());
    return SpectralField::from_physical(g, 3, std::move(v));
}

/// (1/2) integral over [lo, hi) of a |w_t|^2 + |b w_x|^2 / b for a flux-form state.
inline double wave_energy(const SpectralField& u, const ScalarField& a, const ScalarField& b,
                          double lo = -pi, double hi = pi) {
    const auto& g = u.grid();
    double s = 0.0;
    for (int i = 0; i < g.size(); ++i) {
        const Coord x = g.point(i);
        if (x[0] < lo || x[0] >= hi)
            continue;
        s += a(x) * std::norm(u.value(1, i)) + std::norm(u.value(2, i)) / b(x);
    }
    return 0.5 * s * g.cell_volume();
}

// ---------------------------------------------------------------------------
// Connected solution for a jump in space

struct SpaceJumpData {
    double a_minus = 1.0, b_minus = 1.0, a_plus = 1.0, b_plus = 1.0;
    Fn1 w0;          ///< C^1 initial displacement
    Fn1 dw0;         ///< its derivative
    Fn1 w1;          ///< continuous initial velocity
    double support_lo = -pi / 2; ///< data vanish outside [support_lo, support_hi]
    double support_hi = -pi / 4;

    double c_minus() const { return std::sqrt(b_minus / a_minus); }
    double c_plus() const { return std::sqrt(b_plus / a_plus); }
    double Z_minus() const { return std::sqrt(a_minus * b_minus); }
    double Z_plus() const { return std::sqrt(a_plus * b_plus); }
};

struct WaveComponent {
    std::string label;
    double amplitude = 1.0;
    double speed = 0.0;
    int direction = 1; ///< +1 right-moving, -1 left-moving
};

enum class TransmissionKind { SpaceJump, TimeJump };

struct TransmissionSolution {
    TransmissionKind kind = TransmissionKind::SpaceJump;
    std::vector<WaveComponent> components;
    double reflection = 0.0;   ///< amplitude of the wave reflected back into the incident side
    double transmission = 1.0; ///< amplitude of the transmitted wave
    SpectralField w;           ///< solution on the grid
};

/// Exact solution by characteristic tracing with interface splitting at x = 0.
///
/// On each side w = R(x - c t) + L(x + c t). Outgoing profiles at the
/// interface follow from continuity of w and b w_x, a 2x2 linear system in
/// the outgoing rates solved once for unit incoming rates.
class SpaceJumpOracle {
public:
    explicit SpaceJumpOracle(SpaceJumpData d) : d_(std::move(d)) {
        if (!(d_.a_minus > 0 && d_.b_minus > 0 && d_.a_plus > 0 && d_.b_plus > 0))
            throw DomainError("SpaceJumpOracle: coefficients must be positive");
        if (!d_.w0 || !d_.dw0 || !d_.w1)
            throw ArgumentError("SpaceJumpOracle: w0, dw0 and w1 are required");
        if (!(d_.support_lo < d_.support_hi))
            throw ArgumentError("SpaceJumpOracle: empty data support");
        Eigen::Matrix2d M;
        M << 1.0, -1.0, d_.Z_minus(), d_.Z_plus();
        const Eigen::PartialPivLU<Eigen::Matrix2d> lu(M);
        // Incoming from the left (p' = 1) and from the right (q' = 1).
        const Eigen::Vector2d from_left = lu.solve(Eigen::Vector2d(-1.0, d_.Z_minus()));
        const Eigen::Vector2d from_right = lu.solve(Eigen::Vector2d(1.0, d_.Z_plus()));
        r_left_ = from_left(0);
        t_left_ = from_left(1);
        t_right_ = from_right(0);
        r_right_ = from_right(1);
        residual_ = std::max((M * from_left - Eigen::Vector2d(-1.0, d_.Z_minus())).cwiseAbs().maxCoeff(),
                             (M * from_right - Eigen::Vector2d(1.0, d_.Z_plus())).cwiseAbs().maxCoeff());
    }

    const SpaceJumpData& data() const noexcept { return d_; }
    double reflection_left() const noexcept { return r_left_; }
    double transmission_left() const noexcept { return t_left_; }
    double reflection_right() const noexcept { return r_right_; }
    double transmission_right() const noexcept { return t_right_; }
    double system_residual() const noexcept { return residual_; }

    /// |Z_- - (Z_- r^2 + Z_+ tau^2)| / Z_- for a wave incident from the left.
    double energy_partition_defect() const {
        const double zm = d_.Z_minus(), zp = d_.Z_plus();
        return std::abs(zm - (zm * r_left_ * r_left_ + zp * t_left_ * t_left_)) / zm;
    }

    /// Throws HorizonError when a characteristic reaches the seam before t.
    void check_horizon(double t) const {
        // Waves cross the interface no earlier than the nearest support point can reach it.
        const double left = d_.support_lo < 0 ? d_.support_lo - d_.c_minus() * t
                                              : -d_.c_minus() * std::max(0.0, t - d_.support_lo / d_.c_plus());
        const double right = d_.support_hi > 0 ? d_.support_hi + d_.c_plus() * t
                                               : d_.c_plus() * std::max(0.0, t + d_.support_hi / d_.c_minus());
        if (!(left > -pi && right < pi))
            throw HorizonError("SpaceJumpOracle: characteristics reach the period seam before t = " + csv::num(t));
    }

    double value(double x, double t) const {
        const double cm = d_.c_minus(), cp = d_.c_plus();
        if (x < 0.0)
            return Rm(x - cm * t) + Lm(x + cm * t);
        if (x > 0.0)
            return Rp(x - cp * t) + Lp(x + cp * t);
        return 0.5 * (value(-0.0 - 1e-300, t) + value(1e-300, t));
    }

    double dx(double x, double t) const {
        const double cm = d_.c_minus(), cp = d_.c_plus();
        if (x < 0.0)
            return dRm(x - cm * t) + dLm(x + cm * t);
        return dRp(x - cp * t) + dLp(x + cp * t);
    }

    double dt(double x, double t) const {
        const double cm = d_.c_minus(), cp = d_.c_plus();
        if (x < 0.0)
            return -cm * dRm(x - cm * t) + cm * dLm(x + cm * t);
        return -cp * dRp(x - cp * t) + cp * dLp(x + cp * t);
    }

    double b(double x) const { return x < 0.0 ? d_.b_minus : d_.b_plus; }
    double flux(double x, double t) const { return b(x) * dx(x, t); }

    /// One-sided limits at x = 0 of w and b w_x.
    std::array<double, 4> interface_limits(double t) const {
        const double cm = d_.c_minus(), cp = d_.c_plus();
        return {Rm(-cm * t) + Lm(cm * t), Rp(-cp * t) + Lp(cp * t),
                d_.b_minus * (dRm(-cm * t) + dLm(cm * t)), d_.b_plus * (dRp(-cp * t) + dLp(cp * t))};
    }

private:
    // W1(s) = integral_0^s w1, Gauss-Legendre panels split at the support ends.
    double W1(double s) const {
        if (s == 0.0)
            return 0.0;
        const double lo = std::min(0.0, s), hi = std::max(0.0, s);
        std::vector<double> cuts{lo};
        for (double c : {d_.support_lo, d_.support_hi})
            if (c > lo && c < hi)
                cuts.push_back(c);
        cuts.push_back(hi);
        static const double xg[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                     0.9061798459386640};
        static const double wg[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                                     0.2369268850561891};
        double sum = 0.0;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double a = cuts[k], b = cuts[k + 1];
            const int panels = std::max(1, int(std::ceil((b - a) * 256.0)));
            const double h = (b - a) / panels;
            for (int p = 0; p < panels; ++p) {
                const double mid = a + (p + 0.5) * h;
                for (int q = 0; q < 5; ++q)
                    sum += 0.5 * h * wg[q] * d_.w1(mid + 0.5 * h * xg[q]);
            }
        }
        return s > 0 ? sum : -sum;
    }

    // Initial profiles on each side.
    double R0(double s, double c) const { return 0.5 * (d_.w0(s) - W1(s) / c); }
    double L0(double s, double c) const { return 0.5 * (d_.w0(s) + W1(s) / c); }
    double dR0(double s, double c) const { return 0.5 * (d_.dw0(s) - d_.w1(s) / c); }
    double dL0(double s, double c) const { return 0.5 * (d_.dw0(s) + d_.w1(s) / c); }

    // Incoming at the interface: p(t) = R_-(-c_- t), q(t) = L_+(c_+ t).
    double p(double t) const { return R0(-d_.c_minus() * t, d_.c_minus()); }
    double q(double t) const { return L0(d_.c_plus() * t, d_.c_plus()); }
    double dp(double t) const { return -d_.c_minus() * dR0(-d_.c_minus() * t, d_.c_minus()); }
    double dq(double t) const { return d_.c_plus() * dL0(d_.c_plus() * t, d_.c_plus()); }

    double alpha(double t) const {
        return L0(0.0, d_.c_minus()) + r_left_ * (p(t) - p(0.0)) + t_right_ * (q(t) - q(0.0));
    }
    double beta(double t) const {
        return R0(0.0, d_.c_plus()) + t_left_ * (p(t) - p(0.0)) + r_right_ * (q(t) - q(0.0));
    }

    double Rm(double s) const { return R0(s, d_.c_minus()); }
    double Lm(double s) const { return s <= 0.0 ? L0(s, d_.c_minus()) : alpha(s / d_.c_minus()); }
    double Rp(double s) const { return s >= 0.0 ? R0(s, d_.c_plus()) : beta(-s / d_.c_plus()); }
    double Lp(double s) const { return L0(s, d_.c_plus()); }

    double dRm(double s) const { return dR0(s, d_.c_minus()); }
    double dLm(double s) const {
        if (s <= 0.0)
            return dL0(s, d_.c_minus());
        const double t = s / d_.c_minus();
        return (r_left_ * dp(t) + t_right_ * dq(t)) / d_.c_minus();
    }
    double dRp(double s) const {
        if (s >= 0.0)
            return dR0(s, d_.c_plus());
        const double t = -s / d_.c_plus();
        return -(t_left_ * dp(t) + r_right_ * dq(t)) / d_.c_plus();
    }
    double dLp(double s) const { return dL0(s, d_.c_plus()); }

    SpaceJumpData d_;
    double r_left_ = 0.0, t_left_ = 1.0, r_right_ = 0.0, t_right_ = 1.0;
    double residual_ = 0.0;
};

/// Connected solution on the grid at time t.
inline TransmissionSolution connected_solution_space(const SpaceJumpData& d, const TorusGrid& g, double t) {
    if (g.dim() != 1)
        throw ArgumentError("connected_solution_space: 1D grid required");
    const SpaceJumpOracle o(d);
    o.check_horizon(t);
    TransmissionSolution s;
    s.kind = TransmissionKind::SpaceJump;
    s.reflection = o.reflection_left();
    s.transmission = o.transmission_left();
    s.components = {{"incident", 1.0, d.c_minus(), 1},
                    {"reflected", o.reflection_left(), d.c_minus(), -1},
                    {"transmitted", o.transmission_left(), d.c_plus(), 1}};
    s.w = SpectralField::sample_scalar(g, [&](const Coord& x) { return cplx(o.value(x[0], t)); });
    return s;
}

// ---------------------------------------------------------------------------
// Connected solution for a jump in time

struct TimeJumpData {
    double a_minus = 1.0, b_minus = 1.0, a_plus = 1.0, b_plus = 4.0;
    double jump_time = 1.0;

    double c_minus() const { return std::sqrt(b_minus / a_minus); }
    double c_plus() const { return std::sqrt(b_plus / a_plus); }
};

/// Amplitudes (A, B) of e^{-i w s} and e^{+i w s} matching value W and time
/// derivative Wt at s = 0, from the 2x2 matching system.
inline std::array<cplx, 2> time_jump_amplitudes(cplx W, cplx Wt, double omega) {
    if (!(omega > 0.0))
        throw DomainError("time_jump_amplitudes: frequency must be positive");
    Eigen::Matrix2cd M;
    M << 1.0, 1.0, cplx(0.0, -omega), cplx(0.0, omega);
    const Eigen::Vector2cd ab = M.partialPivLu().solve(Eigen::Vector2cd(W, Wt));
    return {ab(0), ab(1)};
}

namespace detail {

// Per-mode evolution over time s at angular frequency w from (W, Wt).
inline std::array<cplx, 2> evolve_mode(cplx W, cplx Wt, double w, double s) {
    if (w == 0.0)
        return {W + s * Wt, Wt};
    const auto ab = time_jump_amplitudes(W, Wt, w);
    const cplx em = std::exp(cplx(0.0, -w * s)), ep = std::exp(cplx(0.0, w * s));
    return {ab[0] * em + ab[1] * ep, cplx(0.0, -w) * ab[0] * em + cplx(0.0, w) * ab[1] * ep};
}

} // namespace detail

/// Mode-by-mode exact solution with w and w_t continuous at the jump time.
inline TransmissionSolution connected_solution_time(const TimeJumpData& d, const SpectralField& w0,
                                                    const SpectralField& w1, double t) {
    if (w0.components() != 1 || w1.components() != 1 || !(w0.grid() == w1.grid()))
        throw ArgumentError("connected_solution_time: scalar data on one grid required");
    if (!(d.a_minus > 0 && d.b_minus > 0 && d.a_plus > 0 && d.b_plus > 0))
        throw DomainError("connected_solution_time: coefficients must be positive");
    const auto& g = w0.grid();
    std::vector<cplx> c(g.size());
    for (int k = 0; k < g.size(); ++k) {
        const double xi = std::abs(g.frequency(k)[0]);
        const double s1 = std::min(t, d.jump_time);
        auto st = detail::evolve_mode(w0.coefficient(0, k), w1.coefficient(0, k), d.c_minus() * xi, s1);
        if (t > d.jump_time)
            st = detail::evolve_mode(st[0], st[1], d.c_plus() * xi, t - d.jump_time);
        c[k] = st[0];
    }
    TransmissionSolution s;
    s.kind = TransmissionKind::TimeJump;
    const double ratio = d.c_minus() / d.c_plus();
    s.transmission = 0.5 * (1.0 + ratio);
    s.reflection = 0.5 * (1.0 - ratio);
    s.components = {{"forward", s.transmission, d.c_plus(), 1}, {"backward", s.reflection, d.c_plus(), -1}};
    s.w = SpectralField::from_coefficients(g, 1, std::move(c));
    return s;
}

// ---------------------------------------------------------------------------
// Interface diagnostics

struct InterfaceJumps {
    double jump_w = 0.0;
    double jump_flux = 0.0;
    std::array<double, 4> limits{}; ///< w(0-), w(0+), flux(0-), flux(0+)
};

namespace detail {

// Quadratic through three points, evaluated at 0.
inline double extrapolate_to_zero(const std::array<double, 3>& x, const std::array<double, 3>& y) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
        double l = 1.0;
        for (int j = 0; j < 3; ++j)
            if (j != i)
                l *= (0.0 - x[j]) / (x[i] - x[j]);
        s += y[i] * l;
    }
    return s;
}

} // namespace detail

/// One-sided extrapolation to x = 0 of w and b w_x from the three points
/// d, 2d, 3d on each side, d = offset >= 2/omega (default 2/omega).
inline InterfaceJumps transmission_diagnostics(const Fn1& w, const Fn1& flux, double omega, double offset = 0.0) {
    const double zone = 2.0 / omega;
    if (offset == 0.0)
        offset = zone;
    if (offset < zone)
        throw ResolutionError("transmission_diagnostics: stencil reaches into the mollification zone |x| <= " +
                                  csv::num(zone),
                              0);
    if (3.0 * offset >= pi / 2)
        throw ResolutionError("transmission_diagnostics: stencil does not fit beside the interface", 0);
    std::array<double, 3> xl{}, xr{};
    for (int k = 0; k < 3; ++k) {
        xr[std::size_t(k)] = (k + 1) * offset;
        xl[std::size_t(k)] = -xr[std::size_t(k)];
    }
    auto side = [&](const Fn1& f, const std::array<double, 3>& xs) {
        std::array<double, 3> y{};
        for (int k = 0; k < 3; ++k)
            y[std::size_t(k)] = f(xs[std::size_t(k)]);
        return detail::extrapolate_to_zero(xs, y);
    };
    InterfaceJumps j;
    j.limits = {side(w, xl), side(w, xr), side(flux, xl), side(flux, xr)};
    j.jump_w = std::abs(j.limits[1] - j.limits[0]);
    j.jump_flux = std::abs(j.limits[3] - j.limits[2]);
    return j;
}

/// Grid version for a flux-form state (w, w_t, b w_x): the stencil uses grid
/// nodes j, 2j, 3j steps away from x = 0, with j the first node beyond 2/omega.
inline InterfaceJumps transmission_diagnostics(const SpectralField& state, double omega) {
    const auto& g = state.grid();
    if (g.dim() != 1 || state.components() != 3)
        throw ArgumentError("transmission_diagnostics: 1D flux-form state required");
    const double h = g.spacing();
    const int first = int(std::floor(2.0 / omega / h)) + 1;
    if (3.0 * first * h >= pi / 2)
        throw ResolutionError("transmission_diagnostics: mollification zone too wide for a one-sided stencil", 0);
    const int center = g.points_per_axis() / 2; // x = 0
    std::array<double, 3> xl{}, xr{}, wl{}, wr{}, fl{}, fr{};
    for (int k = 0; k < 3; ++k) {
        const int ir = center + (k + 1) * first, il = center - (k + 1) * first;
        xr[std::size_t(k)] = g.axis_point(ir);
        xl[std::size_t(k)] = g.axis_point(il);
        wr[std::size_t(k)] = state.value(0, ir).real();
        wl[std::size_t(k)] = state.value(0, il).real();
        fr[std::size_t(k)] = state.value(2, ir).real();
        fl[std::size_t(k)] = state.value(2, il).real();
    }
    InterfaceJumps j;
    j.limits = {detail::extrapolate_to_zero(xl, wl), detail::extrapolate_to_zero(xr, wr),
                detail::extrapolate_to_zero(xl, fl), detail::extrapolate_to_zero(xr, fr)};
    j.jump_w = std::abs(j.limits[1] - j.limits[0]);
    j.jump_flux = std::abs(j.limits[3] - j.limits[2]);
    return j;
}

// ---------------------------------------------------------------------------
// epsilon-members of the jump problems

struct WaveMember {
    CauchyProblem problem;
    ScalarField a;
    ScalarField b;
    double omega = 0.0;
};

/// Mollified space-jump problem at eps on grid g with horizon T.
inline WaveMember space_jump_member(const SpaceJumpData& d, const TorusGrid& g, const MollifierFamily& f, double eps,
                                    double T) {
    const auto ac = PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, d.a_minus, d.a_plus);
    const auto bc = PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, d.b_minus, d.b_plus);
    WaveMember m;
    m.a = regularized_field(ac, f, g, eps);
    m.b = regularized_field(bc, f, g, eps);
    m.omega = f.omega(eps);
    const auto w0 = SpectralField::sample_scalar(g, [&](const Coord& x) { return cplx(d.w0(x[0])); });
    const auto w1 = SpectralField::sample_scalar(g, [&](const Coord& x) { return cplx(d.w1(x[0])); });
    m.problem = CauchyProblem{wave_system_space(m.a, m.b), {}, wave_state_space(w0, w1, m.b), T, eps};
    return m;
}

/// Mollified time-jump problem at eps; coefficients regularised on [-1, T + 1].
inline WaveMember time_jump_member(const TimeJumpData& d, const SpectralField& w0, const SpectralField& w1,
                                   const MollifierFamily& f, double eps, double T) {
    const auto ac = PiecewiseCoefficient::step(1, JumpVariable::Time, d.jump_time, d.a_minus, d.a_plus);
    const auto bc = PiecewiseCoefficient::step(1, JumpVariable::Time, d.jump_time, d.b_minus, d.b_plus);
    const auto at = regularized_time_function(ac, f, -1.0, T + 1.0, eps);
    const auto bt = regularized_time_function(bc, f, -1.0, T + 1.0, eps);
    WaveMember m;
    m.a = [at](const Coord& p) { return at(p[0]); };
    m.b = [bt](const Coord& p) { return bt(p[0]); };
    m.omega = f.omega(eps);
    m.problem = CauchyProblem{wave_system_time(at, bt), {}, wave_state_time(w0, w1), T, eps};
    return m;
}

/// C^1 pulse cos^2 on (lo, hi), zero outside.
struct Pulse {
    double lo = -pi / 2;
    double hi = -pi / 4;
    double value(double x) const {
        if (x <= lo || x >= hi)
            return 0.0;
        const double c = std::cos(pi * ((x - lo) / (hi - lo) - 0.5));
        return c * c;
    }
    double derivative(double x) const {
        if (x <= lo || x >= hi)
            return 0.0;
        const double s = pi * ((x - lo) / (hi - lo) - 0.5);
        return -std::sin(2.0 * s) * pi / (hi - lo);
    }
};

/// Right-moving pulse data w1 = -c_- w0' for a space-jump problem.
inline SpaceJumpData right_moving_pulse(double a_minus, double b_minus, double a_plus, double b_plus, Pulse p) {
    SpaceJumpData d;
    d.a_minus = a_minus;
    d.b_minus = b_minus;
    d.a_plus = a_plus;
    d.b_plus = b_plus;
    const double c = d.c_minus();
    d.w0 = [p](double x) { return p.value(x); };
    d.dw0 = [p](double x) { return p.derivative(x); };
    d.w1 = [p, c](double x) { return -c * p.derivative(x); };
    d.support_lo = p.lo;
    d.support_hi = p.hi;
    return d;
}

} // namespace hypnet

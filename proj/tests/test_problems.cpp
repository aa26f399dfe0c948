#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "hypnet/problems.hpp"

namespace {

using namespace hypnet;

AcousticsProblem constant_acoustics(int n, double rho, double c) {
    AcousticsProblem pr;
    pr.n = n;
    pr.rho0 = PiecewiseCoefficient::constant(n, rho);
    pr.c0 = PiecewiseCoefficient::constant(n, c);
    pr.p0 = [](const Coord& x) { return std::exp(std::cos(x[0]) - 1.0); };
    pr.v0 = {[](const Coord& x) { return std::sin(x[0]); }, [](const Coord&) { return 0.0; }};
    return pr;
}

// Compactly supported C-infinity bump centred at m with radius r.
struct Bump {
    double m = -1.0, r = 0.8;
    double value(double x) const {
        const double s = (x - m) / r;
        return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
    }
    double derivative(double x) const {
        const double s = (x - m) / r;
        if (std::abs(s) >= 1.0)
            return 0.0;
        const double q = 1.0 - s * s;
        return value(x) * (-2.0 * s / (q * q)) / r;
    }
};

SpaceJumpData bump_data(double am, double bm, double ap, double bp, double left_part) {
    SpaceJumpData d;
    d.a_minus = am;
    d.b_minus = bm;
    d.a_plus = ap;
    d.b_plus = bp;
    const Bump p;
    const double c = d.c_minus();
    d.w0 = [p](double x) { return p.value(x); };
    d.dw0 = [p](double x) { return p.derivative(x); };
    d.w1 = [p, c, left_part](double x) { return -c * p.derivative(x) + left_part * p.value(x); };
    d.support_lo = p.m - p.r;
    d.support_hi = p.m + p.r;
    return d;
}

// Fourth-order central second difference.
template <class F>
double d2(F f, double h) {
    return (-f(2 * h) + 16 * f(h) - 30 * f(0.0) + 16 * f(-h) - f(-2 * h)) / (12 * h * h);
}

TEST(Acoustics, OneDimensionalConstantSymbol) {
    const TorusGrid g(1, 16);
    const auto K = acoustics_symbol(constant_acoustics(1, 1.0, 1.0), g);
    for (double xi : {-3.0, 1.0, 5.0}) {
        const CMatrix k = K(0.0, {0.2, 0}, {xi, 0});
        EXPECT_EQ(k(0, 0), cplx(0.0));
        EXPECT_EQ(k(1, 1), cplx(0.0));
        EXPECT_NEAR(std::abs(k(0, 1) - cplx(0.0, -xi)), 0.0, 1e-15);
        EXPECT_NEAR(std::abs(k(1, 0) - cplx(0.0, -xi)), 0.0, 1e-15);
        Eigen::ComplexEigenSolver<CMatrix> es(k);
        std::vector<double> im{es.eigenvalues()(0).imag(), es.eigenvalues()(1).imag()};
        std::sort(im.begin(), im.end());
        EXPECT_NEAR(im[0], -std::abs(xi), 1e-12);
        EXPECT_NEAR(im[1], std::abs(xi), 1e-12);
    }
    EXPECT_DOUBLE_EQ(K.declared_order(), 1.0);
}

TEST(Acoustics, TwoDimensionalHasSimpleZeroEigenvalue) {
    const TorusGrid g(2, 8);
    const double rho = 1.3, c = 1.7;
    const auto K = acoustics_symbol(constant_acoustics(2, rho, c), g);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Coord xi{u(rng), u(rng)};
        const double r = std::hypot(xi[0], xi[1]);
        Eigen::ComplexEigenSolver<CMatrix> es(K(0.0, {0.0, 0.0}, xi));
        std::vector<double> im;
        for (int j = 0; j < 3; ++j) {
            EXPECT_NEAR(es.eigenvalues()(j).real(), 0.0, 1e-10 * r);
            im.push_back(es.eigenvalues()(j).imag());
        }
        std::sort(im.begin(), im.end());
        EXPECT_NEAR(im[0], -c * r, 1e-10 * r);
        EXPECT_NEAR(im[1], 0.0, 1e-10 * r);
        EXPECT_NEAR(im[2], c * r, 1e-10 * r);
        EXPECT_GE(im[2] - im[1], c * r * (1 - 1e-10));
    }
}

TEST(Acoustics, Validation) {
    auto pr = constant_acoustics(1, 1.0, 1.0);
    pr.n = 3;
    EXPECT_THROW(pr.validate(), ArgumentError);
    EXPECT_THROW(PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, 0.0, 1.0), ArgumentError);
    pr = constant_acoustics(1, 1.0, 1.0);
    pr.c0 = PiecewiseCoefficient::constant(2, 1.0);
    EXPECT_THROW(pr.validate(), ArgumentError);
}

TEST(WeightedNorm, UnitCoefficientsGiveL2) {
    const TorusGrid g(1, 32);
    std::mt19937_64 rng(8);
    const auto u = random_field(g, 2, 1.0, rng);
    const ScalarField one = [](const Coord&) { return 1.0; };
    EXPECT_NEAR(weighted_norm(u, one, one), l2_norm(u), 1e-12 * l2_norm(u));
}

TEST(WeightedNorm, EquivalenceBounds) {
    const TorusGrid g(1, 64);
    const double r1 = 0.5, r2 = 2.0, c1 = 1.0, c2 = 3.0;
    const ScalarField rho = [](const Coord& x) { return 1.25 + 0.75 * std::sin(x[0]); };
    const ScalarField c = [](const Coord& x) { return 2.0 + std::cos(3 * x[0]); };
    const double lo = std::min(1.0 / (c2 * c2 * r2), r1), hi = std::max(1.0 / (c1 * c1 * r1), r2);
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const auto u = random_field(g, 2, 0.5, rng);
        const double w = weighted_norm(u, rho, c), n = l2_norm(u);
        EXPECT_GE(w * w, lo * n * n * (1 - 1e-12));
        EXPECT_LE(w * w, hi * n * n * (1 + 1e-12));
    }
}

TEST(WeightedNorm, ContractionAlongMollifiedEvolution) {
    const TorusGrid g(1, 256);
    AcousticsProblem pr;
    pr.rho0 = PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, 1.0, 3.0);
    pr.c0 = PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, 2.0, 1.0);
    const MollifierFamily fam{MollifierRate::logarithmic(), 1};
    std::mt19937_64 rng(12);
    for (double eps : {0.25, 0.0625, 0.015625}) {
        const auto co = acoustics_coefficients(pr, g, std::make_pair(fam, eps));
        const auto K = acoustics_symbol(1, co);
        for (int trial = 0; trial < 3; ++trial) {
            const auto u0 = random_field(g, 2, 2.0, rng);
            const auto tr = solve(CauchyProblem{K, {}, u0, 1.0, eps});
            const double n0 = weighted_norm(u0, co.rho, co.c);
            for (std::size_t i = 0; i < tr.states.size(); ++i)
                ASSERT_LE(weighted_norm(tr.states[i], co.rho, co.c), n0 * (1.0 + 1e-6 * tr.times[i]))
                    << "eps=" << eps << " t=" << tr.times[i];
        }
    }
}

TEST(WaveForm, ConstantCoefficientsHaveNoFirstOrderTerm) {
    const TorusGrid g(1, 32);
    auto pr = constant_acoustics(1, 1.4, 0.8);
    const auto wf = wave_form(pr, acoustics_coefficients(pr, g), g);
    for (const auto& term : wf.op.A(2)) {
        const double v = term.coefficient(0.0, {0.3, 0.0});
        if (term.order() == 2) {
            EXPECT_NEAR(v, 0.64, 1e-14);
        } else {
            EXPECT_NEAR(v, 0.0, 1e-12);
        }
    }
    EXPECT_TRUE(wf.op.A(1).empty());
}

TEST(WaveForm, DensityStepFirstOrderTermScalesWithOmega) {
    const TorusGrid g(1, 1024);
    AcousticsProblem pr;
    pr.rho0 = PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, 1.0, 2.0);
    pr.c0 = PiecewiseCoefficient::constant(1, 1.0);
    pr.p0 = [](const Coord&) { return 0.0; };
    pr.v0[0] = pr.p0;
    const MollifierFamily fam{MollifierRate::power(0.5), 1};
    std::vector<double> ratio;
    for (double eps : {0.01, 0.0025}) {
        const auto co = acoustics_coefficients(pr, g, std::make_pair(fam, eps));
        const auto wf = wave_form(pr, co, g);
        double sup = 0.0;
        for (const auto& term : wf.op.A(2))
            if (term.order() == 1)
                for (int i = 0; i < g.size(); ++i)
                    sup = std::max(sup, std::abs(term.coefficient(0.0, g.point(i))));
        ratio.push_back(sup / co.omega);
    }
    EXPECT_GT(ratio[0], 0.05);
    EXPECT_NEAR(ratio[1] / ratio[0], 1.0, 0.1);
}

TEST(WaveForm, AgreesWithFirstOrderSystem) {
    const TorusGrid g(1, 256);
    AcousticsProblem pr;
    pr.rho0 = PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, 1.0, 1.5);
    pr.c0 = PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, 1.0, 2.0);
    pr.p0 = [](const Coord& x) { return std::exp(-4.0 * (x[0] + 1.5) * (x[0] + 1.5)); };
    pr.v0[0] = [](const Coord& x) { return 0.5 * std::exp(-4.0 * (x[0] - 1.0) * (x[0] - 1.0)); };
    const MollifierFamily fam{MollifierRate::logarithmic(), 1};
    const auto co = acoustics_coefficients(pr, g, std::make_pair(fam, 0.1));
    const double T = 0.5, dt = 1e-3;
    SolveOptions opt;
    opt.dt = dt;
    const auto sys = solve(CauchyProblem{acoustics_symbol(1, co), {}, acoustics_state(pr, g), T, 0.1}, opt);
    const auto wf = wave_form(pr, co, g);
    const auto p = solve_direct(wf.op, wf.data, T, dt);
    double err = 0.0;
    for (int i = 0; i < g.size(); ++i)
        err = std::max(err, std::abs(p.value(0, i) - sys.final_state().value(0, i)));
    EXPECT_LE(err, 1e-6);
}

TEST(WaveSystem, MollifiedEnergyConserved) {
    const TorusGrid g(1, 256);
    const MollifierFamily fam{MollifierRate::logarithmic(), 1};
    const auto d = right_moving_pulse(1.0, 1.0, 1.0, 4.0, Pulse{});
    const auto m = space_jump_member(d, g, fam, 0.01, 1.0);
    const auto tr = solve(m.problem);
    const double e0 = wave_energy(tr.states.front(), m.a, m.b);
    for (std::size_t i = 0; i < tr.states.size(); ++i)
        EXPECT_LE(std::abs(wave_energy(tr.states[i], m.a, m.b) - e0), 1e-6 * e0 * std::max(tr.times[i], 1e-3));
}

TEST(SpaceJumpOracle, UniformMediumIsDAlembert) {
    const TorusGrid g(1, 128);
    const auto d = right_moving_pulse(1.0, 1.0, 1.0, 1.0, Pulse{});
    const auto s = connected_solution_space(d, g, 0.5);
    EXPECT_NEAR(s.reflection, 0.0, 1e-15);
    EXPECT_NEAR(s.transmission, 1.0, 1e-15);
    const Pulse p;
    for (int i = 0; i < g.size(); ++i)
        EXPECT_NEAR(s.w.value(0, i).real(), p.value(g.point(i)[0] - 0.5), 1e-12);
}

TEST(SpaceJumpOracle, ImpedanceMatchedJumpDoesNotReflect) {
    const SpaceJumpOracle o(right_moving_pulse(2.0, 0.5, 0.5, 2.0, Pulse{}));
    EXPECT_LT(std::abs(o.reflection_left()), 1e-12);
    EXPECT_NEAR(o.transmission_left(), 1.0, 1e-12);
    EXPECT_NEAR(o.data().c_plus() / o.data().c_minus(), 4.0, 1e-15);
}

TEST(SpaceJumpOracle, ContinuitySystemAndEnergyPartition) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.2, 5.0);
    for (int trial = 0; trial < 30; ++trial) {
        const SpaceJumpOracle o(right_moving_pulse(u(rng), u(rng), u(rng), u(rng), Pulse{}));
        const double zm = o.data().Z_minus(), zp = o.data().Z_plus();
        EXPECT_LT(o.system_residual(), 1e-12);
        EXPECT_LT(o.energy_partition_defect(), 1e-10);
        EXPECT_NEAR(o.reflection_left(), (zm - zp) / (zm + zp), 1e-12);
        EXPECT_NEAR(o.transmission_left(), 1.0 + o.reflection_left(), 1e-12);
        EXPECT_NEAR(o.reflection_right(), -o.reflection_left(), 1e-12);
    }
}

TEST(SpaceJumpOracle, SolvesWaveEquationOnEachSide) {
    const SpaceJumpOracle o(bump_data(1.0, 1.0, 0.5, 2.0, 0.3));
    const double h = 5e-4;
    double worst = 0.0;
    for (double t : {0.5, 0.8, 1.0}) {
        for (double x = -2.9; x < 2.9; x += 0.01) {
            if (std::abs(x) < 3 * h)
                continue;
            const double a = x < 0 ? 1.0 : 0.5, b = x < 0 ? 1.0 : 2.0;
            const double wtt = d2([&](double s) { return o.value(x, t + s); }, h);
            const double wxx = d2([&](double s) { return o.value(x + s, t); }, h);
            worst = std::max(worst, std::abs(a * wtt - b * wxx));
        }
        const auto lim = o.interface_limits(t);
        EXPECT_LT(std::abs(lim[0] - lim[1]), 1e-12) << t;
        EXPECT_LT(std::abs(lim[2] - lim[3]), 1e-12) << t;
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(SpaceJumpOracle, HorizonIsEnforced) {
    const auto d = right_moving_pulse(1.0, 1.0, 1.0, 4.0, Pulse{});
    EXPECT_NO_THROW(connected_solution_space(d, TorusGrid(1, 64), 1.0));
    EXPECT_THROW(connected_solution_space(d, TorusGrid(1, 64), 2.0), HorizonError);
}

TEST(TransmissionDiagnostics, FluxNotDerivativeIsContinuous) {
    const SpaceJumpOracle o(bump_data(1.0, 1.0, 0.5, 2.0, 0.0));
    const double t = 0.6, offset = 2e-4;
    const auto j = transmission_diagnostics([&](double x) { return o.value(x, t); },
                                            [&](double x) { return o.flux(x, t); }, 2.0 / offset, offset);
    EXPECT_LT(j.jump_w, 1e-8);
    EXPECT_LT(j.jump_flux, 1e-8);
    const auto raw = transmission_diagnostics([&](double x) { return o.value(x, t); },
                                              [&](double x) { return o.dx(x, t); }, 2.0 / offset, offset);
    EXPECT_GT(raw.jump_flux, 1e-3);
}

TEST(TransmissionDiagnostics, StencilMustAvoidMollificationZone) {
    const Fn1 f = [](double) { return 0.0; };
    EXPECT_THROW(transmission_diagnostics(f, f, 10.0, 0.1), ResolutionError);
    EXPECT_THROW(transmission_diagnostics(f, f, 2.0, 1.0), ResolutionError);
    const TorusGrid g(1, 64);
    EXPECT_THROW(transmission_diagnostics(SpectralField::zeros(g, 3), 1.0), ResolutionError);
    EXPECT_THROW(transmission_diagnostics(SpectralField::zeros(g, 2), 50.0), ArgumentError);
}

TEST(TransmissionDiagnostics, GridStateOfExactFluxForm) {
    const TorusGrid g(1, 1024);
    const SpaceJumpOracle o(bump_data(1.0, 1.0, 0.5, 2.0, 0.0));
    const double t = 0.8;
    const auto u = SpectralField::sample(g, 3, [&](const Coord& x) {
        CVector z(3);
        z << o.value(x[0], t), o.dt(x[0], t), o.flux(x[0], t);
        return z;
    });
    const auto j = transmission_diagnostics(u, 200.0);
    EXPECT_LT(j.jump_w, 1e-5);
    EXPECT_LT(j.jump_flux, 1e-4);
}

TEST(TimeJump, ForwardModeSplitsThreeQuartersOneQuarter) {
    const double k = 2.0, c1 = 1.0, c2 = 2.0;
    const cplx W = 1.0, Wt = cplx(0.0, -c1 * k);
    const auto ab = time_jump_amplitudes(W, Wt, c2 * k);
    EXPECT_NEAR(std::abs(ab[0] - 0.75), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(ab[1] - 0.25), 0.0, 1e-15);
    EXPECT_THROW(time_jump_amplitudes(W, Wt, 0.0), DomainError);
}

TEST(TimeJump, MatchingResidual) {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 50; ++trial) {
        const cplx W(nd(rng), nd(rng)), Wt(nd(rng), nd(rng));
        const double w = 0.5 + std::abs(nd(rng)) * 10.0;
        const auto ab = time_jump_amplitudes(W, Wt, w);
        EXPECT_NEAR(std::abs(ab[0] + ab[1] - W), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(cplx(0.0, -w) * ab[0] + cplx(0.0, w) * ab[1] - Wt), 0.0, 1e-12 * w);
    }
}

TEST(TimeJump, NoChangeWhenSpeedIsContinuous) {
    const TorusGrid g(1, 32);
    const auto w0 = SpectralField::sample_scalar(g, [](const Coord& x) { return cplx(std::exp(std::cos(x[0]) - 1)); });
    const auto w1 = SpectralField::sample_scalar(g, [](const Coord& x) { return cplx(std::sin(2 * x[0])); });
    TimeJumpData same;
    same.a_plus = 2.0;
    same.b_plus = 2.0;
    TimeJumpData none = same;
    none.jump_time = 100.0;
    const auto s = connected_solution_time(same, w0, w1, 1.7);
    EXPECT_NEAR(s.reflection, 0.0, 1e-15);
    EXPECT_LE(sup_norm(s.w - connected_solution_time(none, w0, w1, 1.7).w), 1e-12);
}

TEST(TimeJump, StandingWaveIsContinuousAcrossJump) {
    const TorusGrid g(1, 32);
    const auto w0 = SpectralField::sample_scalar(g, [](const Coord& x) { return cplx(std::cos(2 * x[0])); });
    const auto w1 = SpectralField::zeros(g, 1);
    const TimeJumpData d;
    const double delta = 1e-9;
    const auto before = connected_solution_time(d, w0, w1, 1.0 - delta).w;
    const auto after = connected_solution_time(d, w0, w1, 1.0 + delta).w;
    EXPECT_LE(sup_norm(after - before), 1e-8);
    const auto s = connected_solution_time(d, w0, w1, 1.5);
    EXPECT_NEAR(s.transmission, 0.75, 1e-15);
    EXPECT_NEAR(s.reflection, 0.25, 1e-15);
}

} // namespace

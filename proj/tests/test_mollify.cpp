#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "hypnet/epsnets.hpp"
#include "hypnet/mollify.hpp"

namespace {

using namespace hypnet;

const MollifierFamily kLog1{MollifierRate::logarithmic(), 1};

// Composite Simpson rule for the unnormalised bump exp(-1/(1-s^2)) on (-1, 1).
double bump_mass_oracle() {
    const int n = 20000;
    const double h = 2.0 / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = -1.0 + i * h;
        const double v = std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
        s += v * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    return s * h / 3.0;
}

double eps_for_omega(double omega) { return std::exp(1.0 - omega); }

TEST(MollifierRate, Values) {
    EXPECT_DOUBLE_EQ(MollifierRate::logarithmic()(1.0), 1.0);
    EXPECT_NEAR(MollifierRate::logarithmic()(std::exp(-3.0)), 4.0, 1e-14);
    EXPECT_DOUBLE_EQ(MollifierRate::power(1.0)(0.125), 8.0);
    EXPECT_NEAR(MollifierRate::power(0.5)(0.25), 2.0, 1e-14);
    EXPECT_THROW(MollifierRate::logarithmic()(0.0), ArgumentError);
    EXPECT_THROW(MollifierRate::logarithmic()(1.5), ArgumentError);
    EXPECT_THROW(MollifierRate::power(0.0), ArgumentError);
}

TEST(MollifierFamily, UnitMassCompactSupportAndPeak) {
    EXPECT_NEAR(MollifierFamily::max_profile(), std::exp(-1.0) / bump_mass_oracle(), 1e-10);
    for (double eps : {0.5, 0.01, 1e-4}) {
        const double w = kLog1.omega(eps);
        const int n = 40000;
        const double h = 2.0 / (w * n);
        double mass = 0.0;
        for (int i = 0; i <= n; ++i)
            mass += kLog1.phi(eps, {-1.0 / w + i * h, 0.0}) * (i == 0 || i == n ? 0.5 : 1.0);
        EXPECT_NEAR(mass * h, 1.0, 1e-8);
        EXPECT_EQ(kLog1.phi(eps, {1.0 / w, 0.0}), 0.0);
        EXPECT_EQ(kLog1.phi(eps, {-1.0 / w - 1e-9, 0.0}), 0.0);
        EXPECT_GE(kLog1.phi(eps, {0.3 / w, 0.0}), 0.0);
    }
}

TEST(MollifierFamily, DerivativeSupGrowsLikeOmegaSquared) {
    // sup |phi_eps'| / omega^2 is independent of eps in one dimension.
    std::vector<double> ratios;
    for (double eps : {0.25, 1e-2, 1e-4, 1e-6}) {
        const double w = kLog1.omega(eps);
        double sup = 0.0;
        for (int i = 0; i <= 4000; ++i) {
            const double s = -1.0 + i * 2.0 / 4000;
            sup = std::max(sup, std::abs(w * w * bump_profile_derivative(s)));
        }
        ratios.push_back(sup / (w * w));
    }
    for (double r : ratios)
        EXPECT_NEAR(r, ratios.front(), 1e-12);
}

TEST(SampleMollifier, ResolvedKernelHasUnitMassAndSymmetry) {
    const double eps = eps_for_omega(4.0);
    const auto k = sample_mollifier(kLog1, eps, 1.0 / 64);
    EXPECT_NEAR(k.omega, 4.0, 1e-12);
    EXPECT_EQ(k.support_points(), 33);
    EXPECT_NEAR(k.mass(), 1.0, 1e-15);
    double first_moment = 0.0, peak = 0.0;
    for (int i = -k.radius; i <= k.radius; ++i) {
        EXPECT_GE(k.at(i), 0.0);
        EXPECT_EQ(k.at(i), k.at(-i));
        first_moment += i * k.spacing * k.at(i);
        peak = std::max(peak, k.at(i));
    }
    EXPECT_EQ(k.at(0), peak);
    EXPECT_NEAR(first_moment, 0.0, 1e-15);
}

TEST(SampleMollifier, UnderResolvedKernelReportsGridSize) {
    const double eps = eps_for_omega(4.0);
    try {
        sample_mollifier(kLog1, eps, 0.1);
        FAIL() << "expected ResolutionError";
    } catch (const ResolutionError& e) {
        EXPECT_EQ(e.required_points(), 128);
    }
    EXPECT_THROW(sample_mollifier(kLog1, eps, 0.0), ArgumentError);
}

TEST(PiecewiseCoefficient, MidpointAtJumpAndBounds) {
    const auto c = PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, 1.0, 3.0);
    EXPECT_EQ(c({0.0, 0.0}), 2.0);
    EXPECT_EQ(c({-0.5, 0.0}), 1.0);
    EXPECT_EQ(c({0.5, 0.0}), 3.0);
    EXPECT_EQ(c.lower(), 1.0);
    EXPECT_EQ(c.upper(), 3.0);
    // The periodic ends disagree, so the seam counts as a jump.
    ASSERT_EQ(c.jumps().size(), 2u);
    EXPECT_NEAR(c.distance_to_jump(3.0), pi - 3.0, 1e-15);

    EXPECT_THROW(PiecewiseCoefficient(1, JumpVariable::Space, {0.0},
                                      {[](const Coord&) { return 1.0; }, [](const Coord&) { return 5.0; }}, 0.5, 2.0),
                 ArgumentError);
    EXPECT_THROW(PiecewiseCoefficient::step(1, JumpVariable::Space, 4.0, 1.0, 2.0), ArgumentError);
    EXPECT_THROW(PiecewiseCoefficient::piecewise_constant(1, JumpVariable::Space, {0.0}, {1.0, -1.0}), ArgumentError);
}

TEST(RegularizeCoefficient, StepIsMidpointAtJumpAndExactAway) {
    const TorusGrid g(1, 512);
    const auto c = PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, 1.0, 3.0);
    for (double eps : {0.25, 1e-2, std::ldexp(1.0, -13)}) {
        const auto v = regularize_coefficient(c, kLog1, g, eps);
        const double w = kLog1.omega(eps);
        EXPECT_NEAR(v[256], 2.0, 1e-14); // node 256 is x = 0
        for (int i = 0; i < g.size(); ++i) {
            const double x = g.point(i)[0];
            if (c.distance_to_jump(x) > 1.0 / w) {
                EXPECT_NEAR(v[std::size_t(i)], c({x, 0.0}), 1e-14) << "x=" << x;
            }
        }
    }
}

TEST(RegularizeCoefficient, DerivativeSupMatchesJumpTimesPeak) {
    const TorusGrid g(1, 1024);
    const auto c = PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, 1.0, 3.0);
    const double peak = std::exp(-1.0) / bump_mass_oracle();
    for (double eps : {0.25, 0.05}) {
        const auto v = regularize_coefficient(c, kLog1, g, eps);
        const auto d = spectral_derivative(g, v, 0, 1);
        double sup = 0.0;
        for (double x : d)
            sup = std::max(sup, std::abs(x));
        const double expect = 2.0 * kLog1.omega(eps) * peak;
        EXPECT_NEAR(sup / expect, 1.0, 2e-3) << "eps=" << eps;
    }
}

TEST(RegularizeCoefficient, BoundsLocalityAndL1ConvergenceOnRandomCoefficients) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uv(0.5, 4.0), ub(-2.8, 2.8);
    const TorusGrid g(1, 512);
    const auto eg = default_epsilon_grid();
    for (int trial = 0; trial < 12; ++trial) {
        const int pieces = 2 + int(rng() % 3);
        std::vector<double> breaks, values;
        for (int k = 0; k + 1 < pieces; ++k)
            breaks.push_back(ub(rng));
        std::sort(breaks.begin(), breaks.end());
        for (int k = 0; k < pieces; ++k)
            values.push_back(uv(rng));
        const auto c = PiecewiseCoefficient::piecewise_constant(1, JumpVariable::Space, breaks, values);
        const double eps = eg[std::size_t(rng() % eg.size())];
        const auto v = regularize_coefficient(c, kLog1, g, eps);
        const double w = kLog1.omega(eps);
        double l1 = 0.0;
        for (int i = 0; i < g.size(); ++i) {
            const double x = g.point(i)[0];
            const double exact = c({x, 0.0});
            EXPECT_GE(v[std::size_t(i)], c.lower() - 1e-12);
            EXPECT_LE(v[std::size_t(i)], c.upper() + 1e-12);
            if (c.distance_to_jump(x) > 1.0 / w) {
                EXPECT_NEAR(v[std::size_t(i)], exact, 1e-13);
            }
            l1 += std::abs(v[std::size_t(i)] - exact) * g.spacing();
        }
        EXPECT_LE(l1, (c.upper() - c.lower()) * 2.0 / w * double(c.jumps().size())) << "trial " << trial;
    }
}

TEST(RegularizeCoefficient, TwoDimensionalTensorKernelPreservesBounds) {
    const TorusGrid g(2, 64);
    const auto c = PiecewiseCoefficient::step(2, JumpVariable::Space, 0.5, 2.0, 0.5);
    const auto v = regularize_coefficient(c, kLog1, g, 0.25);
    for (int i = 0; i < g.size(); ++i) {
        EXPECT_GE(v[std::size_t(i)], 0.5 - 1e-12);
        EXPECT_LE(v[std::size_t(i)], 2.0 + 1e-12);
    }
    // Constant along x_2.
    for (int i0 = 0; i0 < 64; ++i0)
        for (int i1 = 1; i1 < 64; ++i1)
            EXPECT_NEAR(v[std::size_t(i0 * 64 + i1)], v[std::size_t(i0 * 64)], 1e-14);
}

TEST(RegularizeCoefficient, TimeJumpOnInterval) {
    const auto c = PiecewiseCoefficient::step(1, JumpVariable::Time, 1.0, 1.0, 4.0);
    const double eps = 0.01;
    const auto axis = NodeAxis::interval(-1.0, 3.0, 401);
    const auto v = regularize_coefficient(c, kLog1, axis, eps);
    const double w = kLog1.omega(eps);
    for (int i = 0; i < axis.count; ++i) {
        const double t = axis.node(i);
        if (std::abs(t - 1.0) > 1.0 / w && t > -1.0 + 1.0 / w && t < 3.0 - 1.0 / w) {
            EXPECT_NEAR(v[std::size_t(i)], c.at_time(t), 1e-14);
        }
        EXPECT_GE(v[std::size_t(i)], 1.0 - 1e-12);
        EXPECT_LE(v[std::size_t(i)], 4.0 + 1e-12);
    }
    EXPECT_NEAR(v[200], 2.5, 1e-13);
    EXPECT_THROW(regularize_coefficient(PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, 1.0, 2.0), kLog1,
                                        axis, eps),
                 ArgumentError);
}

TEST(RegularizedCoefficient, OffGridValuesAreSmoothAndBounded) {
    const TorusGrid g(1, 256);
    const auto c = PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, 1.0, 3.0);
    const RegularizedCoefficient rc(c, kLog1, NodeAxis::torus(g), 0.1);
    for (int i = 0; i < g.size(); ++i)
        EXPECT_EQ(rc(g.point(i)), rc.nodal_values()[std::size_t(i)]);
    double prev = rc({-0.6, 0.0});
    for (int k = 1; k <= 1200; ++k) {
        const double x = -0.6 + k * 1e-3;
        const double v = rc({x, 0.0});
        EXPECT_GE(v, 1.0 - 1e-12);
        EXPECT_LE(v, 3.0 + 1e-12);
        EXPECT_GE(v, prev - 1e-12); // monotone across an increasing step
        prev = v;
    }
}

TEST(DerivativeGrowthReport, OrdersClassifyAsLogSlowScale) {
    const TorusGrid g(1, 1024);
    const auto c = PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, 1.0, 2.0);
    const auto eg = default_epsilon_grid();
    const auto nets = derivative_growth_report(c, kLog1, g, eg, 2);
    ASSERT_EQ(nets.size(), 3u);
    const auto c0 = classify_net(nets[0], 0);
    const auto c1 = classify_net(nets[1], 0);
    const auto c2 = classify_net(nets[2], 0);
    EXPECT_EQ(c0.kind, NetKind::LogSlowScale);
    EXPECT_NEAR(c0.log_power, 0.0, 0.05);
    EXPECT_EQ(c1.kind, NetKind::LogSlowScale);
    EXPECT_NEAR(c1.log_power, 1.0, 0.2);
    EXPECT_EQ(c2.kind, NetKind::LogSlowScale);
    EXPECT_NEAR(c2.log_power, 2.0, 0.2);
}

TEST(DerivativeGrowthReport, UnresolvedEpsilonPropagates) {
    const TorusGrid g(1, 64);
    const auto c = PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, 1.0, 2.0);
    EXPECT_THROW(derivative_growth_report(c, MollifierFamily{MollifierRate::power(1.0), 1}, g,
                                          default_epsilon_grid(), 1),
                 ResolutionError);
}

TEST(CoefficientCsv, Header) {
    const TorusGrid g(1, 16);
    std::ostringstream o;
    write_coefficient_csv(o, g, std::vector<double>(16, 1.5));
    EXPECT_EQ(o.str().substr(0, 8), "x,value\n");
    EXPECT_NE(o.str().find("-3.1415926535897931,1.5\n"), std::string::npos);
}

} // namespace

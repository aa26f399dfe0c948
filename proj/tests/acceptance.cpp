// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hypnet/hypnet.hpp"
#include "hypnet/roundtrip.hpp"

namespace {

using namespace hypnet;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty())
            detail += "; ";
        detail += what + (ok ? "" : " [violated]");
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string sci(double v) { return fmt("%.3e", v); }

double eps_k(int k) { return std::ldexp(1.0, -k); }

EpsilonGrid eps_range(int k0, int k1) { return make_geometric_grid(eps_k(k0), 0.5, k1 - k0 + 1); }

bool strictly_decreasing_tail(const std::vector<double>& v, std::size_t n) {
    if (v.size() < n)
        return false;
    for (std::size_t k = v.size() - n; k + 1 < v.size(); ++k)
        if (!(v[k + 1] < v[k]))
            return false;
    return true;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (double x : v)
        s += (s.empty() ? "" : " ") + fmt("%.3g", x);
    return s;
}

// Acoustics in 1D with unit density and a sound-speed step 1 -> 2 at x = 0.
AcousticsProblem step_acoustics() {
    AcousticsProblem pr;
    pr.n = 1;
    pr.rho0 = PiecewiseCoefficient::constant(1, 1.0);
    pr.c0 = PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, 1.0, 2.0);
    pr.p0 = [](const Coord&) { return 0.0; };
    pr.v0 = {[](const Coord&) { return 0.0; }, [](const Coord&) { return 0.0; }};
    return pr;
}

SymbolMatrix step_acoustics_symbol(const TorusGrid& g, MollifierRate rate, double eps) {
    return acoustics_symbol(1, acoustics_coefficients(step_acoustics(), g, std::make_pair(MollifierFamily{rate, 1}, eps)));
}

// i|xi| V(x) diag(-1, 0, 1) V(x)^-1 with a random, well-conditioned V.
SymbolMatrix random_hyperbolic(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    CMatrix v0 = CMatrix::Identity(3, 3) * 2.0, v1 = CMatrix::Zero(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            v0(i, j) += cplx(nd(rng), nd(rng)) * 0.3;
            v1(i, j) = cplx(nd(rng), nd(rng)) * 0.2;
        }
    return SymbolMatrix(3, 1.0, 1, [v0, v1](double, const Coord& x, const Coord& xi) {
        const CMatrix v = v0 + v1 * std::sin(x[0]);
        const Eigen::Vector3cd d(-1.0, 0.0, 1.0);
        return CMatrix(cplx(0.0, std::abs(xi[0])) * v * d.asDiagonal() * v.inverse());
    });
}

struct CertifiedFamily {
    std::string name;
    SymbolMatrix K;
};

std::vector<CertifiedFamily> certification_families() {
    std::vector<CertifiedFamily> out;
    const TorusGrid g(1, 256);
    for (int k : {2, 7, 13})
        out.push_back({"acoustics eps=2^-" + std::to_string(k), step_acoustics_symbol(g, MollifierRate::logarithmic(), eps_k(k))});
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
        out.push_back({"random3x3 seed=" + std::to_string(seed), random_hyperbolic(seed)});
    return out;
}

struct Certification {
    double worst_eig_margin = 1e300; // min over families of (min eig R0 - 1/m^2)
    double cancel = 0.0;
    double partition = 0.0, orthogonality = 0.0, reconstruction = 0.0;
    std::size_t samples = 0;
};

Certification certify_all() {
    Certification c;
    const auto samples = grid_sample_set(1, 64, 32);
    for (const auto& f : certification_families()) {
        const EigenSystem es = eigen_decompose(f.K, 0.0, samples);
        const ProjectorSet ps = projectors_product_formula(f.K, es);
        const SymbolMatrix R0 = build_R(ps);
        const int m = f.K.size();
        c.worst_eig_margin = std::min(c.worst_eig_margin, min_eigenvalue(R0, 0.0, samples).value - 1.0 / (m * m));
        c.cancel = std::max(c.cancel, cancellation_check(R0, f.K, 0.0, samples));
        const auto res = check_projector_algebra(ps, es);
        c.partition = std::max(c.partition, res.partition);
        c.orthogonality = std::max(c.orthogonality, res.orthogonality);
        c.reconstruction = std::max(c.reconstruction, res.reconstruction);
        c.samples += samples.size();
    }
    return c;
}

Outcome criteria_1_to_3(Outcome& o2, Outcome& o3) {
    const auto c = certify_all();
    Outcome o1;
    o1.require(c.worst_eig_margin >= -1e-9, "min(lambda_min(R0) - 1/m^2) = " + sci(c.worst_eig_margin) + " over " +
                                                std::to_string(c.samples) + " samples, 23 families");
    o2.require(c.cancel <= 1e-8, "max |R0K1 + (R0K1)^*| = " + sci(c.cancel));
    o3.require(c.partition <= 1e-9, "partition " + sci(c.partition));
    o3.require(c.orthogonality <= 1e-9, "orthogonality " + sci(c.orthogonality));
    o3.require(c.reconstruction <= 1e-9, "reconstruction " + sci(c.reconstruction));
    return o1;
}

GardingReport garding_at(const TorusGrid& g, MollifierRate rate, double eps, int probes) {
    BuildOptions bo;
    bo.trials = probes;
    bo.seed = 7;
    const SymmetriserPair pair = build_S(ProjectorSet(step_acoustics_symbol(g, rate, eps)), g, bo);
    return garding_probe(pair, g, probes, bo.seed, bo.garding);
}

// Smallest power of two >= 256 whose spacing resolves the mollifier width 1/(4 omega).
int resolving_points(double omega) {
    int n = 256;
    while (!(2.0 * pi / n < 1.0 / (4.0 * omega)))
        n *= 2;
    return n;
}

Outcome criterion_4() {
    Outcome o;
    const int probes = 64;
    const auto log_grid = default_epsilon_grid();
    std::vector<GardingReport> log_reports;
    double worst = 1e300;
    int fewest = 1 << 30;
    for (double eps : log_grid) {
        log_reports.push_back(garding_at(TorusGrid(1, 256), MollifierRate::logarithmic(), eps, probes));
        worst = std::min(worst, log_reports.back().min_margin);
        fewest = std::min(fewest, log_reports.back().trials);
    }
    const auto log_class = scale_classify_constants(log_reports, log_grid);

    const auto pow_grid = eps_range(2, 5);
    const auto rate = MollifierRate::power(1.0);
    std::vector<GardingReport> pow_reports;
    for (double eps : pow_grid) {
        pow_reports.push_back(garding_at(TorusGrid(1, resolving_points(rate(eps))), rate, eps, probes));
        worst = std::min(worst, pow_reports.back().min_margin);
        fewest = std::min(fewest, pow_reports.back().trials);
    }
    const auto pow_class = scale_classify_constants(pow_reports, pow_grid);

    std::vector<double> c1_log, c1_pow;
    for (const auto& r : log_reports)
        c1_log.push_back(r.c1);
    for (const auto& r : pow_reports)
        c1_pow.push_back(r.c1);
    o.require(worst >= -1e-9, "min margin " + sci(worst));
    o.require(fewest >= 64, "probes per eps >= " + std::to_string(fewest));
    o.require(log_class.kind == NetKind::LogSlowScale, "log rate c1 net: " + log_class.describe() + " (c1 " +
                                                           fmt("%.4g", c1_log.front()) + " -> " +
                                                           fmt("%.4g", c1_log.back()) + ")");
    o.require(pow_class.kind == NetKind::PowerGrowth, "power rate c1 net: " + pow_class.describe() + " (c1 " +
                                                          join(c1_pow) + ")");
    return o;
}

Outcome criterion_5() {
    Outcome o;
    const auto scalar = [](double order, std::function<cplx(double, double)> f) {
        return SymbolMatrix(1, order, 1, [f](double, const Coord& x, const Coord& xi) {
            CMatrix m(1, 1);
            m(0, 0) = f(x[0], xi[0]);
            return m;
        });
    };
    const TorusGrid g(1, 64);
    const auto fa = friedrichs_part_1d(scalar(0.0, [](double x, double) { return cplx(2.0 + std::cos(x)); }), g);
    const CMatrix& M = fa.matrix();
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> nd;
    const auto draw = [&] {
        CVector c(g.size());
        for (int k = 0; k < g.size(); ++k)
            c(k) = cplx(nd(rng), nd(rng));
        return c;
    };
    double worst_form = 1e300, worst_sa = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const CVector u = draw(), v = draw();
        const double nu2 = 2.0 * pi * u.squaredNorm(), nv2 = 2.0 * pi * v.squaredNorm();
        worst_form = std::min(worst_form, (2.0 * pi * u.dot(M * u)).real() / nu2);
        const cplx a = 2.0 * pi * v.dot(M * u), b = 2.0 * pi * (M * v).dot(u);
        worst_sa = std::max(worst_sa, std::abs(a - b) / std::sqrt(nu2 * nv2));
    }
    o.require(worst_form >= -1e-6, "min Re(Pu,u)/|u|^2 = " + sci(worst_form) + " over 100 probes");
    o.require(worst_sa <= 1e-9, "self-adjointness defect " + sci(worst_sa));

    const auto fd = friedrichs_part_1d(scalar(1.0, [](double, double xi) { return cplx(std::sqrt(1.0 + xi * xi)); }), g);
    double off = 0.0;
    for (int k = 0; k < g.size(); ++k)
        for (int l = 0; l < g.size(); ++l)
            if (k != l)
                off = std::max(off, std::abs(fd.matrix()(k, l)));
    o.require(off <= 1e-10, "x-independent off-diagonal " + sci(off));
    return o;
}

Outcome criterion_6() {
    Outcome o;
    const TorusGrid g(1, 128);
    const auto cf = regularized_field(PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, 1.0, 2.0),
                                      MollifierFamily{MollifierRate::logarithmic(), 1}, g, 0.05);
    const auto wave = [](std::function<double(double)> c) {
        std::vector<std::vector<DifferentialTerm>> terms(2);
        terms[1].push_back({[c](double, const Coord& x) { return c(x[0]) * c(x[0]); }, {2, 0}, "c^2"});
        return HigherOrderOperator(2, 1, std::move(terms), true);
    };
    const auto g1 = SpectralField::sample_scalar(g, [](const Coord& x) { return cplx(std::exp(-4.0 * (x[0] + 1) * (x[0] + 1))); });
    const auto g2 = SpectralField::sample_scalar(g, [](const Coord& x) { return cplx(std::sin(x[0])); });
    const double disc = roundtrip_solve_check(wave([cf](double x) { return cf({x, 0.0}); }), {g1, g2}, 1.0).discrepancy;
    o.require(disc <= 1e-6, "roundtrip discrepancy " + sci(disc));

    // Third order with x-dependent, separated speeds s_j(x): the symbol factors as
    // prod_j (tau - s_j xi), so the exact roots are known in closed form.
    const auto s1 = [](double x) { return -1.5 + 0.3 * std::sin(x); };
    const auto s2 = [](double x) { return 0.2 * std::cos(x); };
    const auto s3 = [](double x) { return 1.5 + 0.3 * std::cos(2 * x); };
    std::vector<std::vector<DifferentialTerm>> terms(3);
    terms[0].push_back({[=](double, const Coord& x) { return s1(x[0]) + s2(x[0]) + s3(x[0]); }, {1, 0}, "e1"});
    terms[1].push_back({[=](double, const Coord& x) {
                            const double a = s1(x[0]), b = s2(x[0]), c = s3(x[0]);
                            return -(a * b + a * c + b * c);
                        },
                        {2, 0}, "-e2"});
    terms[2].push_back({[=](double, const Coord& x) { return s1(x[0]) * s2(x[0]) * s3(x[0]); }, {3, 0}, "e3"});
    const HigherOrderOperator cubic(3, 1, std::move(terms), true);
    const auto samples = random_sample_set(1, 1000, 20.0, 99);
    const auto es = characteristic_roots(reduce(cubic), 0.0, samples);
    double vs_poly = 0.0, vs_exact = 0.0;
    for (const auto& r : es.records) {
        const auto roots = polynomial_roots(cubic, 0.0, r.point.x, r.point.xi);
        const double x = r.point.x[0], xi = r.point.xi[0];
        std::vector<double> exact{s1(x) * xi, s2(x) * xi, s3(x) * xi};
        std::sort(exact.begin(), exact.end());
        for (std::size_t j = 0; j < 3; ++j) {
            vs_poly = std::max(vs_poly, std::abs(roots[j] - cplx(r.lambdas[j])));
            vs_exact = std::max(vs_exact, std::abs(exact[j] - r.lambdas[j]));
        }
    }
    o.require(es.records.size() == 1000 && vs_poly <= 1e-8,
              "companion vs polynomial roots " + sci(vs_poly) + " on " + std::to_string(es.records.size()) + " samples");
    o.require(vs_exact <= 1e-8, "companion vs factored roots " + sci(vs_exact));

    const auto w2 = characteristic_roots(reduce(wave([](double) { return 2.0; })), 0.0, {{{0.0, 0.0}, {3.0, 0.0}}});
    const double dev = std::max(std::abs(w2.records[0].lambdas[0] + 6.0), std::abs(w2.records[0].lambdas[1] - 6.0));
    o.require(dev <= 1e-10, "wave roots at (c=2, xi=3) off +-6 by " + sci(dev));
    return o;
}

SpaceJumpData jump_pulse() { return right_moving_pulse(1.0, 1.0, 1.0, 4.0, Pulse{-pi / 2, -pi / 4}); }

Outcome criterion_7() {
    Outcome o;
    const TorusGrid g(1, 256);
    const auto d = jump_pulse();
    double worst = 0.0;
    const auto grid = eps_range(2, 12);
    for (double eps : grid) {
        const auto m = space_jump_member(d, g, MollifierFamily{MollifierRate::logarithmic(), 1}, eps, 1.0);
        const auto tr = solve(m.problem);
        const double e0 = wave_energy(tr.states.front(), m.a, m.b);
        for (std::size_t i = 1; i < tr.states.size(); ++i)
            worst = std::max(worst, std::abs(wave_energy(tr.states[i], m.a, m.b) - e0) / (e0 * tr.times[i]));
    }
    o.require(worst <= 1e-6, "max relative drift per unit time " + sci(worst) + " over " + std::to_string(grid.size()) + " eps");
    return o;
}

Outcome criterion_8() {
    Outcome o;
    const TorusGrid g(1, 512);
    const auto d = jump_pulse();
    const auto exact = connected_solution_space(d, g, 1.0).w;
    const auto grid = eps_range(2, 12);
    std::vector<double> err, flux;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto m = space_jump_member(d, g, MollifierFamily{MollifierRate::logarithmic(), 1}, grid[k], 1.0);
        const auto tr = solve(m.problem);
        err.push_back(l2_norm(tr.final_state().component(0) - exact));
        if (k + 5 >= grid.size())
            flux.push_back(transmission_diagnostics(tr.final_state(), m.omega).jump_flux);
    }
    o.require(strictly_decreasing_tail(err, 5), "L2 errors " + join(err));
    const double ratio = err.back() / err.front();
    o.require(ratio <= 0.25, "final/first " + fmt("%.4f", ratio));
    bool mono = true;
    for (std::size_t k = 0; k + 1 < flux.size(); ++k)
        mono = mono && flux[k + 1] <= flux[k];
    o.require(mono, "tail flux jumps " + join(flux));
    return o;
}

Outcome criterion_9() {
    Outcome o;
    const auto d = right_moving_pulse(2.0, 0.5, 0.5, 2.0, Pulse{-1.4, -0.2});
    const SpaceJumpOracle oracle(d);
    o.require(std::abs(oracle.reflection_left()) < 1e-12, "oracle r = " + sci(oracle.reflection_left()));
    const TorusGrid g(1, 512);
    const double T = 1.95, split = -d.c_minus() * T / 2.0;
    std::vector<double> ratio;
    for (double eps : eps_range(2, 12)) {
        const auto m = space_jump_member(d, g, MollifierFamily{MollifierRate::logarithmic(), 1}, eps, T);
        const auto tr = solve(m.problem);
        const double incident = wave_energy(tr.states.front(), m.a, m.b);
        ratio.push_back(wave_energy(tr.final_state(), m.a, m.b, -pi, split) / incident);
    }
    o.require(strictly_decreasing_tail(ratio, 5), "reflected/incident " + join(ratio));
    o.require(ratio.back() <= 0.10, "final " + sci(ratio.back()));
    return o;
}

Outcome criterion_10() {
    Outcome o;
    const TorusGrid g(1, 64);
    TimeJumpData td;
    td.a_minus = td.a_plus = td.b_minus = 1.0;
    td.b_plus = 4.0;
    td.jump_time = 1.0;
    const int k = 2;
    const auto w0 = SpectralField::mode(g, {double(k), 0.0}, CVector::Constant(1, 1.0));
    const auto w1 = w0 * cplx(0.0, -td.c_minus() * k);
    const double T = 2.0;
    const auto exact = connected_solution_time(td, w0, w1, T).w;
    std::vector<double> err;
    for (double eps : eps_range(2, 12)) {
        const auto m = time_jump_member(td, w0, w1, MollifierFamily{MollifierRate::logarithmic(), 1}, eps, T);
        err.push_back(l2_norm(solve(m.problem).final_state().component(0) - exact));
    }
    o.require(strictly_decreasing_tail(err, 5), "L2 errors " + join(err));
    // Continuity of w and w_t for a unit forward wave: A + B = 1, A - B = c_-/c_+.
    const auto amp = time_jump_amplitudes(1.0, cplx(0.0, -td.c_minus() * k), td.c_plus() * k);
    const double q = td.c_minus() / td.c_plus();
    const double dev = std::max(std::abs(amp[0] - cplx((1 + q) / 2)), std::abs(amp[1] - cplx((1 - q) / 2)));
    o.require(dev <= 1e-10 && std::abs(amp[0] - 0.75) <= 1e-10 && std::abs(amp[1] - 0.25) <= 1e-10,
              "amplitudes (" + fmt("%.12f", amp[0].real()) + ", " + fmt("%.12f", amp[1].real()) + ")");
    return o;
}

Outcome criterion_11() {
    Outcome o;
    const TorusGrid g(1, 256);
    AcousticsProblem pr;
    pr.n = 1;
    pr.rho0 = PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, 1.0, 3.0);
    pr.c0 = PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, 2.0, 1.0);
    pr.p0 = [](const Coord&) { return 0.0; };
    pr.v0 = {[](const Coord&) { return 0.0; }, [](const Coord&) { return 0.0; }};
    const MollifierFamily fam{MollifierRate::logarithmic(), 1};
    std::mt19937_64 rng(11);
    double worst = -1e300;
    int runs = 0;
    const auto grid = default_epsilon_grid();
    for (double eps : grid) {
        const auto co = acoustics_coefficients(pr, g, std::make_pair(fam, eps));
        const auto K = acoustics_symbol(1, co);
        for (int trial = 0; trial < 10; ++trial) {
            const auto u0 = random_field(g, 2, 2.0, rng);
            const auto tr = solve(CauchyProblem{K, {}, u0, 1.0, eps});
            const double n0 = weighted_norm(u0, co.rho, co.c);
            for (std::size_t i = 0; i < tr.states.size(); ++i)
                worst = std::max(worst, weighted_norm(tr.states[i], co.rho, co.c) / (n0 * (1.0 + 1e-6 * tr.times[i])) - 1.0);
            ++runs;
        }
    }
    o.require(worst <= 0.0, "max (norm(t) / (norm(0)(1 + 1e-6 t)) - 1) = " + sci(worst) + " over " +
                                std::to_string(runs) + " runs");
    return o;
}

Outcome criterion_12() {
    Outcome o;
    const auto g = default_epsilon_grid();
    const auto net = [&g](const std::function<double(double)>& f) {
        std::vector<double> v;
        for (double e : g)
            v.push_back(f(e));
        return NetSample(g, v);
    };
    const auto grow = classify_net(net([](double e) { return std::pow(e, -3.0); }), 4);
    const auto decay = classify_net(net([](double e) { return std::pow(e, 4.0); }), 4);
    const auto logsq = classify_net(net([](double e) { return std::pow(1.0 + std::log(1.0 / e), 2.0); }), 4);
    const auto flat = classify_net(net([](double) { return 3.0; }), 4);
    o.require(g.size() == 12, std::to_string(g.size()) + "-point grid");
    o.require(grow.kind == NetKind::PowerGrowth && grow.order == 3, "eps^-3: " + grow.describe());
    o.require(decay.kind == NetKind::PowerDecay && decay.order >= 4, "eps^4: " + decay.describe());
    o.require(logsq.kind == NetKind::LogSlowScale && std::abs(logsq.log_power - 2.0) <= 0.2, "log^2: " + logsq.describe());
    o.require(flat.kind == NetKind::LogSlowScale && std::abs(flat.log_power) <= 0.2, "constant: " + flat.describe());
    return o;
}

Outcome criterion_13() {
    Outcome o;
    const TorusGrid g(1, 256);
    const MollifierFamily fam{MollifierRate::logarithmic(), 1};
    const auto make = [g, fam](double eps) {
        const auto a = regularized_field(PiecewiseCoefficient::constant(1, 1.0), fam, g, eps);
        const auto b = regularized_field(PiecewiseCoefficient::step(1, JumpVariable::Space, 0.0, 1.0, 4.0), fam, g, eps);
        const auto w0 = SpectralField::sample_scalar(g, [](const Coord& x) { return cplx(std::exp(-8.0 * (x[0] + 1.5) * (x[0] + 1.5))); });
        return CauchyProblem{wave_system_space(a, b), {}, wave_state_space(w0, SpectralField::zeros(g, 1), b), 0.5, eps};
    };
    auto h = SpectralField::sample(g, 3, [](const Coord& x) {
        CVector z(3);
        z << std::sin(x[0]), std::cos(2 * x[0]), 0.5;
        return z;
    });
    h = h * cplx(1.0 / l2_norm(h));
    const auto p = negligible_difference_probe(make, eps_range(2, 7), 4.0, h);
    const double e = p.classification.fitted_exponent;
    o.require(e >= 3.5 && e <= 4.5, "difference exponent " + fmt("%.4f", e) + " (" + p.classification.describe() + ")");
    return o;
}

} // namespace

int main() {
    int failed = 0;
    const auto report = [&failed](int id, const char* name, double seconds, const Outcome& o) {
        std::printf("criterion %2d %-34s %s (%.1f s): %s\n", id, name, o.pass ? "PASS" : "FAIL", seconds, o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    };
    const auto timed = [](const std::function<Outcome()>& f, double& seconds) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o.require(false, std::string("error: ") + e.what());
        }
        seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return o;
    };

    double s = 0.0;
    Outcome o2, o3;
    const Outcome o1 = timed([&] { return criteria_1_to_3(o2, o3); }, s);
    report(1, "symmetriser positivity", s, o1);
    report(2, "skew cancellation", s, o2);
    report(3, "projector algebra", s, o3);

    struct Entry {
        int id;
        const char* name;
        Outcome (*run)();
    };
    const Entry entries[] = {
        {4, "garding probe", criterion_4},
        {5, "friedrichs demonstrator", criterion_5},
        {6, "reduction equivalence", criterion_6},
        {7, "energy conservation", criterion_7},
        {8, "association, space jump", criterion_8},
        {9, "association, impedance matched", criterion_9},
        {10, "association, time jump", criterion_10},
        {11, "weighted-norm contraction", criterion_11},
        {12, "asymptotic classifier", criterion_12},
        {13, "negligibility probe", criterion_13},
    };
    for (const auto& e : entries) {
        const Outcome o = timed(e.run, s);
        report(e.id, e.name, s, o);
    }
    std::printf("%d of 13 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}

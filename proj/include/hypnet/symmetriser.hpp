#pragma once

// Eigen-decomposition of strictly hyperbolic principal symbols, spectral
// projectors, the symmetriser R = sum P_j^* P_j and its positive correction S.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hypnet/garding.hpp"
#include "hypnet/symbolgrid.hpp"

namespace hypnet {

struct SamplePoint {
    Coord x{0.0, 0.0};
    Coord xi{0.0, 0.0};
};

/// nx^dim grid points times all integer frequencies with 1 <= |xi| and
/// max_a |xi_a| <= max_frequency. In 1D with nx = 64 and max_frequency = 32
/// this is a 64 x 64 sample.
inline std::vector<SamplePoint> grid_sample_set(int dim, int nx, int max_frequency) {
    if (nx < 1 || max_frequency < 1)
        throw ArgumentError("grid_sample_set: need nx >= 1 and max_frequency >= 1");
    std::vector<Coord> xs, xis;
    const double h = 2.0 * pi / nx;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < (dim == 2 ? nx : 1); ++j)
            xs.push_back({-pi + i * h, dim == 2 ? -pi + j * h : 0.0});
    for (int a = -max_frequency; a <= max_frequency; ++a)
        for (int b = (dim == 2 ? -max_frequency : 0); b <= (dim == 2 ? max_frequency : 0); ++b)
            if (a * a + b * b >= 1)
                xis.push_back({double(a), double(b)});
    std::vector<SamplePoint> out;
    for (const auto& x : xs)
        for (const auto& xi : xis)
            out.push_back({x, xi});
    return out;
}

/// Uniform random x and random xi with 1 <= |xi| <= max_frequency.
inline std::vector<SamplePoint> random_sample_set(int dim, int count, double max_frequency, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-pi, pi), ur(1.0, max_frequency), ua(0.0, 2.0 * pi), us(0.0, 1.0);
    std::vector<SamplePoint> out;
    for (int k = 0; k < count; ++k) {
        SamplePoint p;
        p.x = {ux(rng), dim == 2 ? ux(rng) : 0.0};
        const double r = ur(rng);
        if (dim == 1) {
            p.xi = {us(rng) < 0.5 ? -r : r, 0.0};
        } else {
            const double a = ua(rng);
            p.xi = {r * std::cos(a), r * std::sin(a)};
        }
        out.push_back(p);
    }
    return out;
}

struct HyperbolicityOptions {
    double imag_tolerance = 1e-8; ///< |Im lambda| allowed, relative to <xi>
    double gap_floor = 1e-8;      ///< smallest admissible gap / <xi>
};

inline Witness make_witness(double t, const Coord& x, const Coord& xi) {
    Witness w;
    w.t = t;
    w.x[0] = x[0];
    w.x[1] = x[1];
    w.xi[0] = xi[0];
    w.xi[1] = xi[1];
    return w;
}

inline std::string describe_point(double t, const Coord& x, const Coord& xi) {
    return "t=" + csv::short_num(t) + " x=(" + csv::short_num(x[0]) + "," + csv::short_num(x[1]) + ") xi=(" +
           csv::short_num(xi[0]) + "," + csv::short_num(xi[1]) + ")";
}

/// Real parts of eigenvalues / i, sorted ascending; throws if any is not real.
inline std::vector<double> characteristic_speeds(const CMatrix& k1, double t, const Coord& x, const Coord& xi, int dim,
                                                 const HyperbolicityOptions& opt = {}) {
    Eigen::ComplexEigenSolver<CMatrix> es(k1, false);
    if (es.info() != Eigen::Success)
        throw NumericalFault("eigen-solver failed at " + describe_point(t, x, xi));
    const double b = bracket(xi, dim);
    std::vector<double> lam;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const cplx l = es.eigenvalues()(i) / cplx(0.0, 1.0);
        if (std::abs(l.imag()) > opt.imag_tolerance * b)
            throw HyperbolicityError("eigenvalue " + csv::short_num(es.eigenvalues()(i).real()) + "+" +
                                         csv::short_num(es.eigenvalues()(i).imag()) + "i is not purely imaginary at " +
                                         describe_point(t, x, xi),
                                     make_witness(t, x, xi));
        lam.push_back(l.real());
    }
    std::sort(lam.begin(), lam.end());
    return lam;
}

inline double relative_gap(const std::vector<double>& lam, const Coord& xi, int dim) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < lam.size(); ++j)
        g = std::min(g, lam[j + 1] - lam[j]);
    return g / bracket(xi, dim);
}

struct EigenRecord {
    SamplePoint point;
    std::vector<double> lambdas;
    double gap = 0.0; ///< min_j (lambda_{j+1} - lambda_j) / <xi>
};

struct EigenSystem {
    double t = 0.0;
    int size = 0;
    int dim = 1;
    double gap = 0.0; ///< minimum over all samples
    std::vector<EigenRecord> records;
};

inline EigenSystem eigen_decompose(const SymbolMatrix& k1, double t, const std::vector<SamplePoint>& samples,
                                   const HyperbolicityOptions& opt = {}) {
    if (std::abs(k1.declared_order() - 1.0) > 1e-12)
        throw ArgumentError("eigen_decompose: principal symbol must have order 1");
    if (samples.empty())
        throw ArgumentError("eigen_decompose: empty sample set");
    EigenSystem es;
    es.t = t;
    es.size = k1.size();
    es.dim = k1.dim();
    es.gap = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
        if (norm_of(s.xi, k1.dim()) < 1.0 - 1e-12)
            throw ArgumentError("eigen_decompose: samples must satisfy |xi| >= 1");
        EigenRecord r;
        r.point = s;
        r.lambdas = characteristic_speeds(k1(t, s.x, s.xi), t, s.x, s.xi, k1.dim(), opt);
        r.gap = relative_gap(r.lambdas, s.xi, k1.dim());
        if (!(r.gap > opt.gap_floor))
            throw HyperbolicityError("strict hyperbolicity fails: relative gap " + csv::short_num(r.gap) + " at " +
                                         describe_point(t, s.x, s.xi),
                                     make_witness(t, s.x, s.xi));
        es.gap = std::min(es.gap, r.gap);
        es.records.push_back(std::move(r));
    }
    return es;
}

/// Smooth radial cutoff: 0 for r <= 1/2, 1 for r >= 1.
inline double frequency_cutoff(double r) {
    if (r <= 0.5)
        return 0.0;
    if (r >= 1.0)
        return 1.0;
    const double s = 2.0 * (r - 0.5);
    const double a = std::exp(-1.0 / s);
    const double b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
}

/// Spectral projectors of a strictly hyperbolic principal symbol via
/// P_j = prod_{h != j} (-i K1 - lambda_h) / (lambda_j - lambda_h), times the cutoff.
class ProjectorSet {
public:
    ProjectorSet(SymbolMatrix k1, HyperbolicityOptions opt = {}) : k1_(std::move(k1)), opt_(opt) {}

    int count() const noexcept { return k1_.size(); }
    const SymbolMatrix& principal() const noexcept { return k1_; }

    /// All projectors at one point (zero matrices where the cutoff vanishes).
    std::vector<CMatrix> at(double t, const Coord& x, const Coord& xi) const {
        const int m = k1_.size();
        const int dim = k1_.dim();
        const double psi = frequency_cutoff(norm_of(xi, dim));
        std::vector<CMatrix> p(std::size_t(m), CMatrix::Zero(m, m));
        if (psi == 0.0)
            return p;
        const CMatrix k = k1_(t, x, xi);
        const auto lam = characteristic_speeds(k, t, x, xi, dim, opt_);
        const double b = bracket(xi, dim);
        const CMatrix mk = k / cplx(0.0, 1.0);
        for (int j = 0; j < m; ++j) {
            CMatrix acc = CMatrix::Identity(m, m);
            for (int h = 0; h < m; ++h) {
                if (h == j)
                    continue;
                const double den = lam[std::size_t(j)] - lam[std::size_t(h)];
                if (!(std::abs(den) > opt_.gap_floor * b))
                    throw HyperbolicityError("degenerate eigenvalues in projector formula at " +
                                                 describe_point(t, x, xi),
                                             make_witness(t, x, xi));
                acc = acc * (mk - lam[std::size_t(h)] * CMatrix::Identity(m, m)) / den;
            }
            p[std::size_t(j)] = acc * psi;
        }
        return p;
    }

    std::vector<double> lambdas(double t, const Coord& x, const Coord& xi) const {
        return characteristic_speeds(k1_(t, x, xi), t, x, xi, k1_.dim(), opt_);
    }

    /// P_j as an order-0 symbol.
    SymbolMatrix projector(int j) const {
        auto self = std::make_shared<ProjectorSet>(*this);
        return SymbolMatrix(
                   k1_.size(), 0.0, k1_.dim(),
                   [self, j](double t, const Coord& x, const Coord& xi) { return self->at(t, x, xi)[std::size_t(j)]; },
                   k1_.time_independent())
            .set_name("P" + std::to_string(j));
    }

private:
    SymbolMatrix k1_;
    HyperbolicityOptions opt_;
};

inline ProjectorSet projectors_product_formula(const SymbolMatrix& k1, const EigenSystem& es,
                                               const HyperbolicityOptions& opt = {}) {
    if (!(es.gap > 0.0) || es.size != k1.size())
        throw ArgumentError("projectors_product_formula: eigen system not certified for this symbol");
    return ProjectorSet(k1, opt);
}

struct ProjectorResiduals {
    double partition = 0.0;      ///< max ||sum_j P_j - I||
    double orthogonality = 0.0;  ///< max ||P_j P_h - delta_jh P_j||
    double reconstruction = 0.0; ///< max ||sum_j i lambda_j P_j - K1|| / <xi>
};

inline double op_norm(const CMatrix& a) { return matrix_norm2(a); }

inline ProjectorResiduals check_projector_algebra(const ProjectorSet& ps, const EigenSystem& es) {
    ProjectorResiduals r;
    const int m = ps.count();
    const int dim = ps.principal().dim();
    for (const auto& rec : es.records) {
        const auto& s = rec.point;
        const auto p = ps.at(es.t, s.x, s.xi);
        const auto lam = ps.lambdas(es.t, s.x, s.xi);
        CMatrix sum = CMatrix::Zero(m, m), rec_k = CMatrix::Zero(m, m);
        for (int j = 0; j < m; ++j) {
            sum += p[std::size_t(j)];
            rec_k += cplx(0.0, lam[std::size_t(j)]) * p[std::size_t(j)];
            for (int h = 0; h < m; ++h) {
                CMatrix d = p[std::size_t(j)] * p[std::size_t(h)];
                if (h == j)
                    d -= p[std::size_t(j)];
                r.orthogonality = std::max(r.orthogonality, op_norm(d));
            }
        }
        r.partition = std::max(r.partition, op_norm(sum - CMatrix::Identity(m, m)));
        r.reconstruction =
            std::max(r.reconstruction, op_norm(rec_k - ps.principal()(es.t, s.x, s.xi)) / bracket(s.xi, dim));
    }
    return r;
}

/// R0 = sum_j P_j^* P_j (Hermitian, order 0).
inline SymbolMatrix build_R(const ProjectorSet& ps) {
    auto self = std::make_shared<ProjectorSet>(ps);
    const int m = ps.count();
    return SymbolMatrix(
               m, 0.0, ps.principal().dim(),
               [self, m](double t, const Coord& x, const Coord& xi) {
                   CMatrix r = CMatrix::Zero(m, m);
                   for (const auto& p : self->at(t, x, xi))
                       r += p.adjoint() * p;
                   return r;
               },
               ps.principal().time_independent())
        .set_name("R0");
}

struct MinEigenvalue {
    double value = std::numeric_limits<double>::infinity();
    SamplePoint argmin;
};

/// Smallest eigenvalue of the Hermitian part of a symbol over a sample set.
inline MinEigenvalue min_eigenvalue(const SymbolMatrix& a, double t, const std::vector<SamplePoint>& samples) {
    MinEigenvalue r;
    for (const auto& s : samples) {
        const CMatrix v = a(t, s.x, s.xi);
        Eigen::SelfAdjointEigenSolver<CMatrix> es((v + v.adjoint()) * 0.5, Eigen::EigenvaluesOnly);
        if (es.eigenvalues()(0) < r.value) {
            r.value = es.eigenvalues()(0);
            r.argmin = s;
        }
    }
    return r;
}

/// max ||R0 K1 + (R0 K1)^*|| over the samples.
inline double cancellation_check(const SymbolMatrix& r0, const SymbolMatrix& k1, double t,
                                 const std::vector<SamplePoint>& samples) {
    double worst = 0.0;
    for (const auto& s : samples) {
        const CMatrix rk = r0(t, s.x, s.xi) * k1(t, s.x, s.xi);
        worst = std::max(worst, op_norm(rk + rk.adjoint()));
    }
    return worst;
}

/// S = R0 + c1 <xi>^{-1} I; operators are the Kohn-Nirenberg quantisations,
/// with quadratic forms taken as real parts.
struct SymmetriserPair {
    SymbolMatrix R0;
    SymbolMatrix S;
    double c = 0.0;
    double c1 = 0.0;

    SymmetriserPair(SymbolMatrix r0, double c_, double c1_) : R0(std::move(r0)), c(c_), c1(c1_) {
        auto r0f = R0.evaluator();
        const int m = R0.size();
        const int dim = R0.dim();
        const double k = c1;
        S = SymbolMatrix(
                m, 0.0, dim,
                [r0f, m, dim, k](double t, const Coord& x, const Coord& xi) {
                    return CMatrix(r0f(t, x, xi) + CMatrix::Identity(m, m) * (k / bracket(xi, dim)));
                },
                R0.time_independent())
                .set_name("S");
    }

    int size() const noexcept { return R0.size(); }
};

/// Re(S u, u) on a fixed grid, with the quantised R0 cached.
class SymmetriserOperator {
public:
    SymmetriserOperator(const SymmetriserPair& pair, const TorusGrid& g) : c1_(pair.c1), r0_(pair.R0, g) {}

    double energy(const SpectralField& u, double t = 0.0) const {
        const double w = sobolev_norm(-0.5, u);
        return inner(r0_.apply(t, u), u).real() + c1_ * w * w;
    }

private:
    double c1_;
    GridOperator r0_;
};

struct BuildOptions {
    int trials = 64;
    std::uint64_t seed = 1;
    double cap = 1e6;
    double t = 0.0;
    GardingOptions garding;
};

namespace detail {

// Smallest c1 >= 0 closing the probed margin: test 0, double from a small
// start, then bisect down to a relative bracket of 1e-7.
inline double search_c1(const ProbeSet& ps, double c, double cap) {
    if (ps.min_margin(c, 0.0) >= 0.0)
        return 0.0;
    double lo = 0.0, hi = 1e-3;
    while (ps.min_margin(c, hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > cap) {
            std::size_t arg = 0;
            const double m = ps.min_margin(c, cap, &arg);
            throw PositivityError("c1 search exceeded cap " + csv::short_num(cap) + " (margin " + csv::short_num(m) +
                                  " on probe " + std::to_string(arg) + ")");
        }
    }
    while (hi - lo > 1e-7 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (ps.min_margin(c, mid) >= 0.0)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

} // namespace detail

/// Symmetriser from an order-0 symbol R0 quantised directly.
inline SymmetriserPair build_S(const SymbolMatrix& r0, const TorusGrid& g, const BuildOptions& opt = {}) {
    const int m = r0.size();
    const double c = 1.0 / (2.0 * m * m);
    const SymbolForm form(r0, g, opt.t);
    const BandBasis basis = probe_basis(g, m, opt.garding);
    const ProbeSet probes = make_probes(form, basis, c, opt.trials, opt.seed, opt.garding);
    const double c1 = detail::search_c1(probes, c, opt.cap);
    return SymmetriserPair(r0, c, c1);
}

/// Symmetriser from the projectors of a certified principal symbol.
inline SymmetriserPair build_S(const ProjectorSet& ps, const TorusGrid& g, const BuildOptions& opt = {}) {
    return build_S(build_R(ps), g, opt);
}

/// Garding report for R0 with the pair's constants, i.e. Re(Su,u) - c||u||^2 per probe.
inline GardingReport garding_probe(const SymmetriserPair& pair, const TorusGrid& g, int trials, std::uint64_t seed,
                                   const GardingOptions& opt = {}, double t = 0.0) {
    return garding_probe(SymbolForm(pair.R0, g, t), pair.c, pair.c1, trials, seed, opt);
}

/// Columns: t, x.., xi.., lambda_1..m, gap, min_eig_R0, cancellation.
inline void write_certification_csv(std::ostream& out, const EigenSystem& es, const SymbolMatrix& r0,
                                    const SymbolMatrix& k1) {
    out << "t," << (es.dim == 1 ? "x,xi" : "x1,x2,xi1,xi2");
    for (int j = 1; j <= es.size; ++j)
        out << ",lambda" << j;
    out << ",gap,min_eig_R0,cancellation\n";
    for (const auto& r : es.records) {
        const auto& s = r.point;
        const CMatrix rv = r0(es.t, s.x, s.xi);
        Eigen::SelfAdjointEigenSolver<CMatrix> ev((rv + rv.adjoint()) * 0.5, Eigen::EigenvaluesOnly);
        const CMatrix rk = rv * k1(es.t, s.x, s.xi);
        out << csv::num(es.t) << "," << csv::num(s.x[0]) << ",";
        if (es.dim == 2)
            out << csv::num(s.x[1]) << ",";
        out << csv::num(s.xi[0]);
        if (es.dim == 2)
            out << "," << csv::num(s.xi[1]);
        for (double l : r.lambdas)
            out << "," << csv::num(l);
        out << "," << csv::num(r.gap) << "," << csv::num(ev.eigenvalues()(0)) << ","
            << csv::num(op_norm(rk + rk.adjoint())) << "\n";
    }
}

} // namespace hypnet

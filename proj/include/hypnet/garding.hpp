#pragma once

// Probing Garding-type lower bounds Re(Au,u) >= c||u||^2 - c1||u||_{-1/2}^2
// and the 1D Friedrichs part of a scalar symbol.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <ostream>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hypnet/epsnets.hpp"
#include "hypnet/mollify.hpp"
#include "hypnet/symbolgrid.hpp"

namespace hypnet {

/// Band-limited coefficient space: modes with max_a |xi_a| <= band (Nyquist
/// excluded), m components each. Basis element (b, q) has index b * modes + q.
class BandBasis {
public:
    BandBasis(const TorusGrid& g, int m, int band) : grid_(g), m_(m), band_(band) {
        if (band < 0)
            throw ArgumentError("BandBasis: band must be >= 0");
        for (int k = 0; k < g.size(); ++k) {
            if (g.is_nyquist(k))
                continue;
            const Coord xi = g.frequency(k);
            if (std::abs(xi[0]) <= band && std::abs(xi[1]) <= band)
                modes_.push_back(k);
        }
    }

    const TorusGrid& grid() const noexcept { return grid_; }
    int components() const noexcept { return m_; }
    int band() const noexcept { return band_; }
    int modes() const noexcept { return int(modes_.size()); }
    int dimension() const noexcept { return m_ * modes(); }
    int grid_index(int q) const { return modes_[std::size_t(q)]; }
    Coord frequency(int q) const { return grid_.frequency(grid_index(q)); }

    /// (2pi)^n, the factor in ||u||^2 = (2pi)^n sum |u_hat|^2.
    double volume() const { return grid_.volume(); }

    SpectralField to_field(const CVector& v) const {
        std::vector<cplx> c(std::size_t(m_) * grid_.size(), cplx{});
        for (int b = 0; b < m_; ++b)
            for (int q = 0; q < modes(); ++q)
                c[std::size_t(b) * grid_.size() + grid_index(q)] = v(b * modes() + q);
        return SpectralField::from_coefficients(grid_, m_, std::move(c));
    }

    /// Orthogonal projection of a field onto the band.
    CVector from_field(const SpectralField& u) const {
        CVector v(dimension());
        for (int b = 0; b < m_; ++b)
            for (int q = 0; q < modes(); ++q)
                v(b * modes() + q) = u.coefficient(b, grid_index(q));
        return v;
    }

private:
    TorusGrid grid_;
    int m_;
    int band_;
    std::vector<int> modes_;
};

/// A Hermitian quadratic form on fields, given by its Gram matrix on a band
/// and a pointwise symbol used to locate adversarial probes.
template <class F>
concept QuadraticForm = requires(const F& f, const BandBasis& b, const Coord& x) {
    { f.grid() } -> std::convertible_to<TorusGrid>;
    { f.components() } -> std::convertible_to<int>;
    { f.gram(b) } -> std::convertible_to<CMatrix>;
    { f.pointwise(x, x) } -> std::convertible_to<CMatrix>;
};

/// Re(Op(A)u, u) for the Kohn-Nirenberg quantisation of A at time t.
class SymbolForm {
public:
    SymbolForm(SymbolMatrix a, TorusGrid g, double t = 0.0) : a_(std::move(a)), g_(g), t_(t) {}

    const TorusGrid& grid() const noexcept { return g_; }
    int components() const noexcept { return a_.size(); }

    CMatrix gram(const BandBasis& basis) const {
        const int m = a_.size();
        const int n = g_.size();
        const int dim = basis.dimension();
        CMatrix h(dim, dim);
        std::vector<cplx> phys(std::size_t(m) * n), coef(std::size_t(m) * n);
        std::vector<CMatrix> vals(static_cast<std::size_t>(n));
        for (int q = 0; q < basis.modes(); ++q) {
            const Coord xi = basis.frequency(q);
            for (int i = 0; i < n; ++i)
                vals[std::size_t(i)] = a_(t_, g_.point(i), xi);
            for (int b = 0; b < m; ++b) {
                for (int i = 0; i < n; ++i) {
                    const Coord x = g_.point(i);
                    const cplx ph = std::polar(1.0, x[0] * xi[0] + x[1] * xi[1]);
                    for (int a = 0; a < m; ++a)
                        phys[std::size_t(a) * n + i] = vals[std::size_t(i)](a, b) * ph;
                }
                for (int a = 0; a < m; ++a)
                    forward_transform(g_, phys.data() + std::size_t(a) * n, coef.data() + std::size_t(a) * n);
                const int col = b * basis.modes() + q;
                for (int a = 0; a < m; ++a)
                    for (int r = 0; r < basis.modes(); ++r)
                        h(a * basis.modes() + r, col) = basis.volume() * coef[std::size_t(a) * n + basis.grid_index(r)];
            }
        }
        return (h + h.adjoint()) * 0.5;
    }

    CMatrix pointwise(const Coord& x, const Coord& xi) const {
        const CMatrix a = a_(t_, x, xi);
        return (a + a.adjoint()) * 0.5;
    }

private:
    SymbolMatrix a_;
    TorusGrid g_;
    double t_;
};

struct GardingOptions {
    int band = 128;            ///< probes live on modes with |xi_a| <= min(band, N/2 - 1)
    int adversarial_modes = 4; ///< top eigenvectors of the margin deficit added as probes
};

/// Unit-norm probes with cached quadratic-form values.
struct ProbeSet {
    std::vector<CVector> vectors; ///< band coefficients, ||u||_0 = 1
    std::vector<double> form;     ///< Re(Au, u)
    std::vector<double> weak;     ///< ||u||_{-1/2}^2

    std::size_t size() const { return vectors.size(); }

    double margin(std::size_t i, double c, double c1) const { return form[i] - c + c1 * weak[i]; }

    double min_margin(double c, double c1, std::size_t* arg = nullptr) const {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < size(); ++i) {
            const double v = margin(i, c, c1);
            if (v < best) {
                best = v;
                if (arg)
                    *arg = i;
            }
        }
        return best;
    }
};

/// Random band-limited fields, a wave packet at the worst point of a
/// pointwise scan, and the directions where c||u||^2 - Re(Au,u) is largest
/// relative to ||u||_{-1/2}^2 on the band.
template <QuadraticForm F>
ProbeSet make_probes(const F& form, const BandBasis& basis, double c, int trials, std::uint64_t seed,
                     const GardingOptions& opt = {}) {
    const TorusGrid& g = basis.grid();
    const int m = basis.components();
    const int dim = basis.dimension();
    const int nd = g.dim();
    const CMatrix h = form.gram(basis);
    Eigen::VectorXd wdiag(dim);
    for (int b = 0; b < m; ++b)
        for (int q = 0; q < basis.modes(); ++q)
            wdiag(b * basis.modes() + q) = 1.0 / bracket(basis.frequency(q), nd);

    ProbeSet ps;
    auto add = [&](CVector v) {
        const double nrm = std::sqrt(basis.volume()) * v.norm();
        if (!(nrm > 0.0))
            return;
        v /= nrm;
        ps.form.push_back((v.adjoint() * h * v)(0, 0).real());
        ps.weak.push_back(basis.volume() * (v.cwiseAbs2().cwiseProduct(wdiag)).sum());
        ps.vectors.push_back(std::move(v));
    };

    // Largest eigenvalues of W^{-1/2}(c I - H/vol)W^{-1/2} with W = diag(<xi>^{-1}).
    {
        CMatrix mtx = CMatrix::Identity(dim, dim) * c - h / basis.volume();
        const Eigen::VectorXd s = wdiag.cwiseSqrt().cwiseInverse();
        mtx = s.asDiagonal() * mtx * s.asDiagonal();
        Eigen::SelfAdjointEigenSolver<CMatrix> es(mtx);
        const int k = std::min(opt.adversarial_modes, dim);
        for (int i = 0; i < k; ++i)
            add(s.asDiagonal() * es.eigenvectors().col(dim - 1 - i));
    }

    // Pointwise scan for the smallest eigenvalue of the Hermitian part.
    {
        const int stride = std::max(1, g.size() / 64);
        double worst = std::numeric_limits<double>::infinity();
        int wi = 0, wq = 0;
        CVector wz = CVector::Zero(m);
        for (int i = 0; i < g.size(); i += stride)
            for (int q = 0; q < basis.modes(); ++q) {
                Eigen::SelfAdjointEigenSolver<CMatrix> es(form.pointwise(g.point(i), basis.frequency(q)));
                if (es.eigenvalues()(0) < worst) {
                    worst = es.eigenvalues()(0);
                    wi = i;
                    wq = q;
                    wz = es.eigenvectors().col(0);
                }
            }
        const Coord x0 = g.point(wi);
        const Coord xi0 = basis.frequency(wq);
        const double sigma = std::max(3.0 * g.spacing(), 1.0 / std::sqrt(bracket(xi0, nd)));
        const auto packet = SpectralField::sample(g, m, [&](const Coord& x) {
            double d2 = 0.0, phase = 0.0;
            for (int a = 0; a < nd; ++a) {
                double d = std::remainder(x[a] - x0[a], 2.0 * pi);
                d2 += d * d;
                phase += x[a] * xi0[a];
            }
            return CVector(wz * (std::exp(-0.5 * d2 / (sigma * sigma)) * std::polar(1.0, phase)));
        });
        add(basis.from_field(packet));
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd01(0.0, 1.0);
    const double damping[4] = {0.0, 0.5, 1.0, 2.0};
    for (int i = 0; int(ps.size()) < trials; ++i) {
        const int limit = 1 + int(rng() % std::uint64_t(std::max(1, basis.band())));
        CVector v(dim);
        for (int b = 0; b < m; ++b)
            for (int q = 0; q < basis.modes(); ++q) {
                const double re = nd01(rng);
                const double im = nd01(rng);
                const Coord xi = basis.frequency(q);
                const bool keep = std::abs(xi[0]) <= limit && std::abs(xi[1]) <= limit;
                v(b * basis.modes() + q) =
                    keep ? cplx(re, im) * std::pow(bracket(xi, nd), -damping[i % 4]) : cplx(0.0);
            }
        add(v);
    }
    return ps;
}

inline BandBasis probe_basis(const TorusGrid& g, int m, const GardingOptions& opt) {
    return BandBasis(g, m, std::min(opt.band, g.points_per_axis() / 2 - 1));
}

struct GardingReport {
    double c = 0.0;
    double c1 = 0.0;
    double min_margin = 0.0;
    int trials = 0;
    SpectralField witness;
    std::vector<double> margins;

    /// Margins are relative to unit-norm probes.
    bool valid(double tol = 1e-9) const { return min_margin >= -tol; }
};

template <QuadraticForm F>
GardingReport garding_probe(const F& form, double c, double c1, int trials, std::uint64_t seed,
                            const GardingOptions& opt = {}) {
    if (trials < 16)
        throw ArgumentError("garding_probe: trials must be >= 16");
    const BandBasis basis = probe_basis(form.grid(), form.components(), opt);
    const ProbeSet ps = make_probes(form, basis, c, trials, seed, opt);
    GardingReport r;
    r.c = c;
    r.c1 = c1;
    r.trials = int(ps.size());
    std::size_t arg = 0;
    r.min_margin = ps.min_margin(c, c1, &arg);
    for (std::size_t i = 0; i < ps.size(); ++i)
        r.margins.push_back(ps.margin(i, c, c1));
    r.witness = basis.to_field(ps.vectors[arg]);
    return r;
}

/// Order-0 symbol A, Kohn-Nirenberg quantised on g.
inline GardingReport garding_probe(const SymbolMatrix& a, const TorusGrid& g, double c, double c1, int trials,
                                   std::uint64_t seed, const GardingOptions& opt = {}) {
    if (std::abs(a.declared_order()) > 1e-12)
        throw ArgumentError("garding_probe: symbol must have order 0");
    return garding_probe(SymbolForm(a, g), c, c1, trials, seed, opt);
}

/// Classifies the net eps -> c1_eps. A net that is identically zero is bounded
/// and reported as LogSlowScale with p = 0.
inline AsymptoticClass scale_classify_constants(const std::vector<GardingReport>& reports, const EpsilonGrid& grid,
                                                const ClassifierOptions& opt = {}) {
    if (reports.size() != grid.size())
        throw ArgumentError("scale_classify_constants: one report per epsilon required");
    std::vector<double> v;
    bool all_zero = true;
    for (const auto& r : reports) {
        v.push_back(r.c1);
        all_zero = all_zero && r.c1 == 0.0;
    }
    if (all_zero) {
        AsymptoticClass c;
        c.kind = NetKind::LogSlowScale;
        return c;
    }
    return classify_net(NetSample(grid, std::move(v)), 0, opt);
}

inline void write_garding_csv(std::ostream& out, const GardingReport& r) {
    out << "trial,margin\n";
    for (std::size_t i = 0; i < r.margins.size(); ++i)
        out << i << "," << csv::num(r.margins[i]) << "\n";
}

inline void write_garding_summary(std::ostream& out, const GardingReport& r) {
    out << "c=" << csv::num(r.c) << " c1=" << csv::num(r.c1) << " min_margin=" << csv::num(r.min_margin) << "\n";
}

// ---------------------------------------------------------------------------
// Friedrichs part in one dimension

/// Window q proportional to the bump, with discrete integral of q^2 equal to 1.
struct FriedrichsWindow {
    double scale = 1.0;
    int samples = 4097; ///< sample grid on [-1, 1] used for the normalisation

    static FriedrichsWindow make(int samples = 4097) {
        FriedrichsWindow w;
        w.samples = samples;
        const double h = 2.0 / (samples - 1);
        double s = 0.0;
        for (int i = 0; i < samples; ++i) {
            const double b = raw_bump(-1.0 + i * h);
            s += b * b;
        }
        w.scale = 1.0 / std::sqrt(s * h);
        return w;
    }

    double operator()(double s) const { return scale * raw_bump(s); }

    /// Discrete integral of q^2 on the sample grid.
    double discrete_l2sq() const {
        const double h = 2.0 / (samples - 1);
        double s = 0.0;
        for (int i = 0; i < samples; ++i) {
            const double v = (*this)(-1.0 + i * h);
            s += v * v;
        }
        return s * h;
    }
};

struct FriedrichsOptions {
    int zeta_per_unit = 16; ///< quadrature nodes per unit frequency
};

/// p_F(xi, x', xi') = int F(xi, z) p(x', z) F(xi', z) dz with
/// F(xi, z) = q((z - xi)<xi>^{-1/2}) <xi>^{-1/4}, on a 1D grid.
class FriedrichsAmplitude {
public:
    FriedrichsAmplitude(const SymbolMatrix& p, const TorusGrid& g, const FriedrichsOptions& opt = {})
        : grid_(g), window_(FriedrichsWindow::make()), r_(opt.zeta_per_unit) {
        if (g.dim() != 1 || p.size() != 1)
            throw ArgumentError("friedrichs_part_1d: needs a scalar symbol on a 1D grid");
        const int n = g.size();
        // Node range per frequency: zeta = j / r strictly inside the window.
        std::vector<int> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
        int jmin = std::numeric_limits<int>::max(), jmax = std::numeric_limits<int>::min();
        for (int k = 0; k < n; ++k) {
            const double xi = g.frequency(k)[0];
            const double w = std::sqrt(bracket({xi, 0.0}, 1));
            lo[std::size_t(k)] = int(std::floor((xi - w) * r_)) + 1;
            hi[std::size_t(k)] = int(std::ceil((xi + w) * r_)) - 1;
            if (hi[std::size_t(k)] - lo[std::size_t(k)] + 1 < 4)
                throw ResolutionError("friedrichs_part_1d: fewer than 4 quadrature nodes in the window at xi=" +
                                          csv::short_num(xi),
                                      0);
            jmin = std::min(jmin, lo[std::size_t(k)]);
            jmax = std::max(jmax, hi[std::size_t(k)]);
        }
        const int nz = jmax - jmin + 1;
        std::vector<double> pz(std::size_t(n) * nz); // p(x_i, zeta_j)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < nz; ++j) {
                const cplx v = p(0.0, g.point(i), {double(jmin + j) / r_, 0.0})(0, 0);
                if (std::abs(v.imag()) > 1e-12 * std::max(1.0, std::abs(v.real())))
                    throw ArgumentError("friedrichs_part_1d: symbol must be real");
                pz[std::size_t(i) * nz + j] = v.real();
            }
        auto f = [&](int k, int j) {
            const double xi = g.frequency(k)[0];
            const double b = bracket({xi, 0.0}, 1);
            return window_((double(j) / r_ - xi) / std::sqrt(b)) / std::pow(b, 0.25);
        };
        table_.assign(std::size_t(n) * n * n, 0.0);
        const double dz = 1.0 / r_;
        std::vector<double> prod;
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                const int a = std::max(lo[std::size_t(k)], lo[std::size_t(l)]);
                const int b = std::min(hi[std::size_t(k)], hi[std::size_t(l)]);
                if (a > b)
                    continue;
                prod.assign(std::size_t(b - a + 1), 0.0);
                for (int j = a; j <= b; ++j)
                    prod[std::size_t(j - a)] = f(k, j) * f(l, j) * dz;
                for (int i = 0; i < n; ++i) {
                    double s = 0.0;
                    const double* row = pz.data() + std::size_t(i) * nz + (a - jmin);
                    for (int j = 0; j <= b - a; ++j)
                        s += prod[std::size_t(j)] * row[j];
                    table_[index(k, i, l)] = s;
                }
            }
        // M(xi_k, xi_l) = (dx / 2pi) sum_i e^{-i x_i (xi_k - xi_l)} p_F(xi_k, x_i, xi_l).
        m_ = CMatrix::Zero(n, n);
        const double wgt = g.spacing() / (2.0 * pi);
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                const double d = g.frequency(k)[0] - g.frequency(l)[0];
                cplx s{};
                for (int i = 0; i < n; ++i) {
                    const double v = table_[index(k, i, l)];
                    if (v != 0.0)
                        s += v * std::polar(1.0, -g.point(i)[0] * d);
                }
                m_(k, l) = s * wgt;
            }
    }

    const TorusGrid& grid() const noexcept { return grid_; }
    const FriedrichsWindow& window() const noexcept { return window_; }
    int zeta_per_unit() const noexcept { return r_; }

    /// p_F(xi_k, x_i, xi_l) by grid indices.
    double amplitude(int k, int i, int l) const { return table_[index(k, i, l)]; }

    /// Matrix acting on coefficients (grid coefficient ordering).
    const CMatrix& matrix() const noexcept { return m_; }

    /// F(xi, zeta) as used in the table.
    double window_function(double xi, double zeta) const {
        const double b = bracket({xi, 0.0}, 1);
        return window_((zeta - xi) / std::sqrt(b)) / std::pow(b, 0.25);
    }

    /// sigma_F(x_i, xi_l) = sum_k M(xi_k, xi_l) e^{i x_i (xi_k - xi_l)}, as a grid-point symbol.
    SymbolMatrix effective_symbol() const {
        const int n = grid_.size();
        auto tab = std::make_shared<std::vector<cplx>>(std::size_t(n) * n);
        for (int i = 0; i < n; ++i)
            for (int l = 0; l < n; ++l) {
                cplx s{};
                for (int k = 0; k < n; ++k)
                    s += m_(k, l) * std::polar(1.0, grid_.point(i)[0] * (grid_.frequency(k)[0] - grid_.frequency(l)[0]));
                (*tab)[std::size_t(i) * n + l] = s;
            }
        const TorusGrid g = grid_;
        return SymbolMatrix(
            1, 0.0, 1,
            [tab, g](double, const Coord& x, const Coord& xi) {
                const double r = (x[0] + pi) / g.spacing();
                const int i = int(std::lround(r));
                const int f = int(std::lround(xi[0]));
                if (std::abs(r - i) > 1e-9 || std::abs(xi[0] - f) > 1e-9 || f <= -g.points_per_axis() / 2 ||
                    f > g.points_per_axis() / 2)
                    throw ArgumentError("effective symbol: defined only at grid points and grid frequencies");
                CMatrix v(1, 1);
                v(0, 0) = (*tab)[std::size_t(((i % g.size()) + g.size()) % g.size()) * g.size() +
                                 g.axis_index_of_frequency(f)];
                return v;
            },
            true);
    }

private:
    std::size_t index(int k, int i, int l) const {
        const std::size_t n = std::size_t(grid_.size());
        return (std::size_t(k) * n + std::size_t(i)) * n + std::size_t(l);
    }

    TorusGrid grid_;
    FriedrichsWindow window_;
    int r_;
    std::vector<double> table_;
    CMatrix m_;
};

inline FriedrichsAmplitude friedrichs_part_1d(const SymbolMatrix& p, const TorusGrid& g,
                                              const FriedrichsOptions& opt = {}) {
    return FriedrichsAmplitude(p, g, opt);
}

/// Output coefficients v_hat = M u_hat.
inline SpectralField friedrichs_apply(const FriedrichsAmplitude& fa, const SpectralField& u) {
    if (u.components() != 1 || !(u.grid() == fa.grid()))
        throw ArgumentError("friedrichs_apply: needs a scalar field on the amplitude grid");
    const int n = u.grid().size();
    CVector c(n);
    for (int k = 0; k < n; ++k)
        c(k) = u.coefficient(0, k);
    const CVector v = fa.matrix() * c;
    return SpectralField::from_coefficients(u.grid(), 1, std::vector<cplx>(v.data(), v.data() + n));
}

} // namespace hypnet

#pragma once

// Discrete symbol calculus on the periodic torus: Fourier multipliers,
// Kohn-Nirenberg quantisation of matrix symbols, Sobolev norms and
// numerical order estimates.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hypnet/csv.hpp"
#include "hypnet/epsnets.hpp"
#include "hypnet/torus.hpp"

namespace hypnet {

using SymbolFn = std::function<CMatrix(double t, const Coord& x, const Coord& xi)>;
using CoefficientFn = std::function<CMatrix(double t, const Coord& x)>;
using MultiplierFn = std::function<cplx(const Coord& xi)>;

/// One term A(t,x) m(xi) of a left-separable symbol.
struct SeparableTerm {
    CoefficientFn coefficient;
    MultiplierFn multiplier;
};

/// m x m matrix symbol p(t, x, xi) with a declared order.
///
/// Symbols built from separable terms sum_k A_k(t,x) m_k(xi) keep the terms so
/// that their quantisation can use transforms instead of the dense
/// Kohn-Nirenberg sum; both routes give the same operator.
class SymbolMatrix {
public:
    SymbolMatrix() = default;

    SymbolMatrix(int size, double order, int dim, SymbolFn eval, bool time_independent = false)
        : size_(size), order_(order), dim_(dim), eval_(std::move(eval)), time_independent_(time_independent) {
        if (size < 1)
            throw ArgumentError("SymbolMatrix: size must be positive");
    }

    static SymbolMatrix separable(int size, double order, int dim, std::vector<SeparableTerm> terms,
                                  bool time_independent = false) {
        auto shared = std::make_shared<std::vector<SeparableTerm>>(std::move(terms));
        SymbolMatrix s(
            size, order, dim,
            [shared, size](double t, const Coord& x, const Coord& xi) {
                CMatrix out = CMatrix::Zero(size, size);
                for (const auto& term : *shared)
                    out += term.coefficient(t, x) * term.multiplier(xi);
                return out;
            },
            time_independent);
        s.terms_ = shared;
        return s;
    }

    CMatrix operator()(double t, const Coord& x, const Coord& xi) const { return eval_(t, x, xi); }

    int size() const noexcept { return size_; }
    double declared_order() const noexcept { return order_; }
    int dim() const noexcept { return dim_; }
    bool time_independent() const noexcept { return time_independent_; }
    bool is_separable() const noexcept { return terms_ != nullptr; }
    const std::vector<SeparableTerm>& terms() const { return *terms_; }
    const SymbolFn& evaluator() const noexcept { return eval_; }

    /// Whether the Nyquist coefficient of the input is dropped before quantisation.
    bool zero_nyquist() const noexcept { return zero_nyquist_; }
    SymbolMatrix& set_zero_nyquist(bool v) {
        zero_nyquist_ = v;
        return *this;
    }

    const std::string& name() const noexcept { return name_; }
    SymbolMatrix& set_name(std::string n) {
        name_ = std::move(n);
        return *this;
    }

private:
    int size_ = 1;
    double order_ = 0.0;
    int dim_ = 1;
    SymbolFn eval_;
    bool time_independent_ = false;
    bool zero_nyquist_ = false;
    std::shared_ptr<std::vector<SeparableTerm>> terms_;
    std::string name_;
};

// ---------------------------------------------------------------------------
// Symbol factories

/// <xi>^s times the m x m identity.
inline SymbolMatrix bracket_symbol(int dim, int m, double s) {
    return SymbolMatrix::separable(m, s, dim,
                                   {{[m](double, const Coord&) { return CMatrix(CMatrix::Identity(m, m)); },
                                     [dim, s](const Coord& xi) { return cplx(std::pow(bracket(xi, dim), s)); }}},
                                   true)
        .set_name("bracket^" + csv::short_num(s));
}

/// Scalar Fourier multiplier times the identity.
inline SymbolMatrix multiplier_symbol(int dim, int m, double order, MultiplierFn f) {
    return SymbolMatrix::separable(
        m, order, dim, {{[m](double, const Coord&) { return CMatrix(CMatrix::Identity(m, m)); }, std::move(f)}}, true);
}

/// x-only (multiplication) symbol A(x).
inline SymbolMatrix multiplication_symbol(int dim, int m, std::function<CMatrix(const Coord&)> a) {
    return SymbolMatrix::separable(m, 0.0, dim,
                                   {{[a](double, const Coord& x) { return a(x); }, [](const Coord&) { return cplx(1.0); }}},
                                   true);
}

/// Constant matrix symbol.
inline SymbolMatrix constant_symbol(int dim, CMatrix a) {
    const int m = int(a.rows());
    return SymbolMatrix::separable(m, 0.0, dim,
                                   {{[a](double, const Coord&) { return a; }, [](const Coord&) { return cplx(1.0); }}},
                                   true);
}

/// Pointwise conjugate transpose (principal-level adjoint).
inline SymbolMatrix adjoint_symbol(const SymbolMatrix& p) {
    if (p.is_separable()) {
        std::vector<SeparableTerm> terms;
        for (const auto& term : p.terms()) {
            auto c = term.coefficient;
            auto mfn = term.multiplier;
            terms.push_back({[c](double t, const Coord& x) { return CMatrix(c(t, x).adjoint()); },
                             [mfn](const Coord& xi) { return std::conj(mfn(xi)); }});
        }
        return SymbolMatrix::separable(p.size(), p.declared_order(), p.dim(), std::move(terms), p.time_independent())
            .set_zero_nyquist(p.zero_nyquist());
    }
    auto f = p.evaluator();
    return SymbolMatrix(
               p.size(), p.declared_order(), p.dim(),
               [f](double t, const Coord& x, const Coord& xi) { return CMatrix(f(t, x, xi).adjoint()); },
               p.time_independent())
        .set_zero_nyquist(p.zero_nyquist());
}

/// Pointwise matrix product p(t,x,xi) q(t,x,xi); orders add.
inline SymbolMatrix product_symbol(const SymbolMatrix& p, const SymbolMatrix& q) {
    if (p.size() != q.size())
        throw ArgumentError("product_symbol: size mismatch");
    auto f = p.evaluator();
    auto g = q.evaluator();
    return SymbolMatrix(
        p.size(), p.declared_order() + q.declared_order(), p.dim(),
        [f, g](double t, const Coord& x, const Coord& xi) { return CMatrix(f(t, x, xi) * g(t, x, xi)); },
        p.time_independent() && q.time_independent());
}

/// Pointwise difference p - q.
inline SymbolMatrix difference_symbol(const SymbolMatrix& p, const SymbolMatrix& q) {
    if (p.size() != q.size())
        throw ArgumentError("difference_symbol: size mismatch");
    auto f = p.evaluator();
    auto g = q.evaluator();
    return SymbolMatrix(
        p.size(), std::max(p.declared_order(), q.declared_order()), p.dim(),
        [f, g](double t, const Coord& x, const Coord& xi) { return CMatrix(f(t, x, xi) - g(t, x, xi)); },
        p.time_independent() && q.time_independent());
}

// ---------------------------------------------------------------------------
// Quantisation on a grid

namespace detail {

// e^{i x_j . xi_k} from a table of N-th roots of unity.
class PhaseTable {
public:
    explicit PhaseTable(const TorusGrid& g) : g_(g), roots_(g.points_per_axis()) {
        const int n = g.points_per_axis();
        for (int r = 0; r < n; ++r)
            roots_[r] = std::polar(1.0, 2.0 * pi * r / n);
    }

    cplx operator()(int j, int k) const {
        const int n = g_.points_per_axis();
        if (g_.dim() == 1)
            return roots_[(long(j) * k) % n] * origin_sign(k);
        const int j0 = j / n, j1 = j % n, k0 = k / n, k1 = k % n;
        return roots_[(long(j0) * k0 + long(j1) * k1) % n] * origin_sign(k0 + k1);
    }

private:
    TorusGrid g_;
    std::vector<cplx> roots_;
};

inline void zero_nyquist_coefficients(const TorusGrid& g, int m, std::vector<cplx>& coefs) {
    for (int k = 0; k < g.size(); ++k)
        if (g.is_nyquist(k))
            for (int c = 0; c < m; ++c)
                coefs[std::size_t(c) * g.size() + k] = 0.0;
}

} // namespace detail

/// Dense table of symbol values p(t, x_j, xi_k) at one time, with the
/// Kohn-Nirenberg operator (p(x,D)u)(x_j) = sum_k p(x_j, xi_k) u_hat(xi_k) e^{i x_j xi_k}.
class SymbolTable {
public:
    SymbolTable(const SymbolMatrix& p, const TorusGrid& g, double t)
        : grid_(g), m_(p.size()), zero_nyquist_(p.zero_nyquist()), phases_(g) {
        const int n = g.size();
        data_.resize(std::size_t(n) * n * m_ * m_);
        for (int j = 0; j < n; ++j) {
            const Coord x = g.point(j);
            for (int k = 0; k < n; ++k) {
                const CMatrix v = p(t, x, g.frequency(k));
                std::copy(v.data(), v.data() + m_ * m_, block_ptr(j, k));
            }
        }
    }

    const TorusGrid& grid() const noexcept { return grid_; }
    int size() const noexcept { return m_; }

    /// Column-major m x m block at (x_j, xi_k).
    Eigen::Map<const CMatrix> block(int j, int k) const {
        return Eigen::Map<const CMatrix>(data_.data() + offset(j, k), m_, m_);
    }

    std::vector<cplx> apply_physical(const std::vector<cplx>& u) const {
        const int n = grid_.size();
        std::vector<cplx> coefs(u.size());
        for (int c = 0; c < m_; ++c)
            forward_transform(grid_, u.data() + std::size_t(c) * n, coefs.data() + std::size_t(c) * n);
        return apply_coefficients(std::move(coefs));
    }

    std::vector<cplx> apply_coefficients(std::vector<cplx> coefs) const {
        const int n = grid_.size();
        if (zero_nyquist_)
            detail::zero_nyquist_coefficients(grid_, m_, coefs);
        std::vector<cplx> out(std::size_t(m_) * n, cplx{});
        std::vector<cplx> tmp(m_);
        for (int j = 0; j < n; ++j) {
            std::fill(tmp.begin(), tmp.end(), cplx{});
            for (int k = 0; k < n; ++k) {
                const cplx ph = phases_(j, k);
                const cplx* blk = data_.data() + offset(j, k);
                for (int b = 0; b < m_; ++b) {
                    const cplx ub = coefs[std::size_t(b) * n + k] * ph;
                    if (ub == cplx{})
                        continue;
                    for (int a = 0; a < m_; ++a)
                        tmp[a] += blk[a + b * m_] * ub;
                }
            }
            for (int a = 0; a < m_; ++a)
                out[std::size_t(a) * n + j] = tmp[a];
        }
        return out;
    }

    /// Exact L2 adjoint of the discrete operator.
    std::vector<cplx> apply_adjoint_physical(const std::vector<cplx>& v) const {
        const int n = grid_.size();
        std::vector<cplx> w(std::size_t(m_) * n, cplx{});
        const double inv = 1.0 / n;
        for (int k = 0; k < n; ++k) {
            for (int j = 0; j < n; ++j) {
                const cplx ph = std::conj(phases_(j, k)) * inv;
                const cplx* blk = data_.data() + offset(j, k);
                for (int a = 0; a < m_; ++a) {
                    const cplx va = v[std::size_t(a) * n + j] * ph;
                    for (int b = 0; b < m_; ++b)
                        w[std::size_t(b) * n + k] += std::conj(blk[a + b * m_]) * va;
                }
            }
        }
        if (zero_nyquist_)
            detail::zero_nyquist_coefficients(grid_, m_, w);
        std::vector<cplx> out(w.size());
        for (int c = 0; c < m_; ++c)
            inverse_transform(grid_, w.data() + std::size_t(c) * n, out.data() + std::size_t(c) * n);
        return out;
    }

    SpectralField apply(const SpectralField& u) const {
        check(u);
        return SpectralField::from_physical(grid_, m_, apply_coefficients(u.coefficients()));
    }

    SpectralField apply_adjoint(const SpectralField& u) const {
        check(u);
        return SpectralField::from_physical(grid_, m_, apply_adjoint_physical(u.physical()));
    }

private:
    std::size_t offset(int j, int k) const { return (std::size_t(j) * grid_.size() + k) * m_ * m_; }
    cplx* block_ptr(int j, int k) { return data_.data() + offset(j, k); }
    void check(const SpectralField& u) const {
        if (u.components() != m_ || !(u.grid() == grid_))
            throw ArgumentError("SymbolTable: field does not match symbol size or grid");
    }

    TorusGrid grid_;
    int m_;
    bool zero_nyquist_;
    detail::PhaseTable phases_;
    std::vector<cplx> data_;
};

/// Quantisation of a symbol on a fixed grid, reusable across times.
///
/// Separable symbols go through transforms: for each term the multiplier is
/// applied to the coefficients and the result multiplied pointwise by the
/// matrix coefficient. Other symbols use the dense table (cached when the
/// symbol is time independent).
class GridOperator {
public:
    GridOperator(SymbolMatrix p, TorusGrid g) : p_(std::move(p)), g_(g) {
        if (p_.dim() != g_.dim())
            throw ArgumentError("GridOperator: symbol and grid dimensions differ");
        if (p_.is_separable()) {
            for (const auto& term : p_.terms()) {
                std::vector<cplx> mult(g_.size());
                for (int k = 0; k < g_.size(); ++k)
                    mult[k] = term.multiplier(g_.frequency(k));
                if (p_.zero_nyquist())
                    for (int k = 0; k < g_.size(); ++k)
                        if (g_.is_nyquist(k))
                            mult[k] = 0.0;
                multipliers_.push_back(std::move(mult));
            }
            if (p_.time_independent())
                coefficient_cache_ = coefficient_grids(0.0);
        } else if (p_.time_independent()) {
            table_.emplace(p_, g_, 0.0);
        }
    }

    const SymbolMatrix& symbol() const noexcept { return p_; }
    const TorusGrid& grid() const noexcept { return g_; }

    /// Physical in, physical out (component-major layout).
    std::vector<cplx> apply(double t, const std::vector<cplx>& u) const {
        const int n = g_.size();
        const int m = p_.size();
        if (u.size() != std::size_t(m) * n)
            throw ArgumentError("GridOperator: state size mismatch");
        std::vector<cplx> coefs(u.size());
        for (int c = 0; c < m; ++c)
            forward_transform(g_, u.data() + std::size_t(c) * n, coefs.data() + std::size_t(c) * n);
        if (!p_.is_separable()) {
            if (table_)
                return table_->apply_coefficients(std::move(coefs));
            return SymbolTable(p_, g_, t).apply_coefficients(std::move(coefs));
        }
        std::vector<std::vector<CMatrix>> fresh;
        const auto* grids = &coefficient_cache_;
        if (!p_.time_independent()) {
            fresh = coefficient_grids(t);
            grids = &fresh;
        }
        std::vector<cplx> out(u.size(), cplx{});
        std::vector<cplx> work(u.size());
        std::vector<cplx> scaled(n);
        for (std::size_t term = 0; term < multipliers_.size(); ++term) {
            for (int c = 0; c < m; ++c) {
                for (int k = 0; k < n; ++k)
                    scaled[k] = coefs[std::size_t(c) * n + k] * multipliers_[term][k];
                inverse_transform(g_, scaled.data(), work.data() + std::size_t(c) * n);
            }
            const auto& cg = (*grids)[term];
            for (int j = 0; j < n; ++j) {
                const CMatrix& a = cg[j];
                for (int r = 0; r < m; ++r) {
                    cplx acc{};
                    for (int c = 0; c < m; ++c)
                        acc += a(r, c) * work[std::size_t(c) * n + j];
                    out[std::size_t(r) * n + j] += acc;
                }
            }
        }
        return out;
    }

    SpectralField apply(double t, const SpectralField& u) const {
        if (u.components() != p_.size() || !(u.grid() == g_))
            throw ArgumentError("psido_apply: symbol size " + std::to_string(p_.size()) + " vs field components " +
                                std::to_string(u.components()));
        return SpectralField::from_physical(g_, p_.size(), apply(t, u.physical()));
    }

private:
    std::vector<std::vector<CMatrix>> coefficient_grids(double t) const {
        std::vector<std::vector<CMatrix>> out;
        for (const auto& term : p_.terms()) {
            std::vector<CMatrix> v(g_.size());
            for (int j = 0; j < g_.size(); ++j)
                v[j] = term.coefficient(t, g_.point(j));
            out.push_back(std::move(v));
        }
        return out;
    }

    SymbolMatrix p_;
    TorusGrid g_;
    std::vector<std::vector<cplx>> multipliers_;
    std::vector<std::vector<CMatrix>> coefficient_cache_;
    std::optional<SymbolTable> table_;
};

/// p(t, x, D) u.
inline SpectralField psido_apply(const SymbolMatrix& p, double t, const SpectralField& u) {
    if (p.size() != u.components())
        throw ArgumentError("psido_apply: symbol size " + std::to_string(p.size()) + " vs field components " +
                            std::to_string(u.components()));
    return GridOperator(p, u.grid()).apply(t, u);
}

/// Same operator through the dense Kohn-Nirenberg sum regardless of structure.
inline SpectralField psido_apply_dense(const SymbolMatrix& p, double t, const SpectralField& u) {
    if (p.size() != u.components())
        throw ArgumentError("psido_apply_dense: size mismatch");
    return SymbolTable(p, u.grid(), t).apply(u);
}

// ---------------------------------------------------------------------------
// Multipliers and Sobolev norms

/// <D>^s u.
inline SpectralField multiplier_apply(double s, const SpectralField& u) {
    const auto& g = u.grid();
    auto c = u.coefficients();
    for (int comp = 0; comp < u.components(); ++comp)
        for (int k = 0; k < g.size(); ++k)
            c[std::size_t(comp) * g.size() + k] *= std::pow(bracket(g.frequency(k), g.dim()), s);
    return SpectralField::from_coefficients(g, u.components(), std::move(c));
}

/// ||u||_l = ||<D>^l u||_{L2}, evaluated on the coefficients.
inline double sobolev_norm(double l, const SpectralField& u) {
    const auto& g = u.grid();
    double s = 0.0;
    for (int comp = 0; comp < u.components(); ++comp)
        for (int k = 0; k < g.size(); ++k)
            s += std::norm(u.coefficient(comp, k)) * std::pow(bracket(g.frequency(k), g.dim()), 2.0 * l);
    return std::sqrt(s * std::pow(2.0 * pi, g.dim()));
}

// ---------------------------------------------------------------------------
// Random probes

/// Gaussian coefficients damped by <xi>^{-decay}, Nyquist mode zeroed.
inline SpectralField random_field(const TorusGrid& g, int m, double decay, std::mt19937_64& rng,
                                  double band_limit = std::numeric_limits<double>::infinity()) {
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<cplx> c(std::size_t(m) * g.size());
    for (int comp = 0; comp < m; ++comp)
        for (int k = 0; k < g.size(); ++k) {
            const double re = nd(rng);
            const double im = nd(rng);
            const Coord xi = g.frequency(k);
            const bool keep = !g.is_nyquist(k) && norm_of(xi, g.dim()) <= band_limit;
            c[std::size_t(comp) * g.size() + k] = keep ? cplx(re, im) * std::pow(bracket(xi, g.dim()), -decay) : 0.0;
        }
    return SpectralField::from_coefficients(g, m, std::move(c));
}

/// max over random u of ||p u||_s / ||u||_{s+m}, m the declared order.
inline double operator_bound_probe(const SymbolMatrix& p, const TorusGrid& g, double s, int trials,
                                   std::uint64_t seed = 1, double t = 0.0) {
    if (trials < 1)
        throw ArgumentError("operator_bound_probe: trials must be >= 1");
    std::mt19937_64 rng(seed);
    const double order = p.declared_order();
    const GridOperator op(p, g);
    double best = 0.0;
    for (int i = 0; i < trials; ++i) {
        const auto u = random_field(g, p.size(), s + order + g.dim(), rng);
        const double den = sobolev_norm(s + order, u);
        if (den <= 0.0)
            continue;
        best = std::max(best, sobolev_norm(s, op.apply(t, u)) / den);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Order estimation on dyadic shells

struct ShellSup {
    double center = 0.0; ///< <xi> at the point where the shell supremum is attained
    double sup = 0.0;
};

struct OrderEstimate {
    double order = std::numeric_limits<double>::quiet_NaN();
    double residual = 0.0;
    bool degenerate = false; ///< every shell supremum below the degeneracy floor
    std::vector<ShellSup> shells;
};

inline double matrix_norm2(const CMatrix& a) {
    if (a.size() == 1)
        return std::abs(a(0, 0));
    Eigen::JacobiSVD<CMatrix> svd(a);
    return svd.singularValues()(0);
}

/// Log-log slope of shell suprema of ||p(t,x,xi)|| over |xi| in [2^j, 2^{j+1}).
inline OrderEstimate estimate_order(const SymbolMatrix& p, const TorusGrid& g, int shells, double t = 0.0,
                                    double degenerate_floor = 1e-10) {
    if (shells < 3)
        throw ArgumentError("estimate_order: need at least 3 shells");
    if ((1 << shells) - 1 > g.points_per_axis() / 2)
        throw ArgumentError("estimate_order: " + std::to_string(shells) + " dyadic shells do not fit a grid with N=" +
                            std::to_string(g.points_per_axis()));
    OrderEstimate est;
    for (int j = 0; j < shells; ++j) {
        const double lo = std::ldexp(1.0, j), hi = std::ldexp(1.0, j + 1);
        ShellSup s;
        for (int k = 0; k < g.size(); ++k) {
            const Coord xi = g.frequency(k);
            const double r = norm_of(xi, g.dim());
            if (r < lo || r >= hi)
                continue;
            for (int i = 0; i < g.size(); ++i) {
                const double v = matrix_norm2(p(t, g.point(i), xi));
                if (v > s.sup) {
                    s.sup = v;
                    s.center = bracket(xi, g.dim());
                }
            }
        }
        if (s.center == 0.0)
            s.center = bracket({1.5 * lo, 0.0}, 1);
        est.shells.push_back(s);
    }
    double top = 0.0;
    for (const auto& s : est.shells)
        top = std::max(top, s.sup);
    if (top < degenerate_floor) {
        est.degenerate = true;
        return est;
    }
    std::vector<double> lx, ly;
    for (const auto& s : est.shells) {
        if (s.sup <= 0.0)
            continue;
        lx.push_back(std::log(s.center));
        ly.push_back(std::log(s.sup));
    }
    if (lx.size() < 2) {
        est.degenerate = true;
        return est;
    }
    const auto f = least_squares_line(lx, ly);
    est.order = f.slope;
    est.residual = f.residual;
    return est;
}

// ---------------------------------------------------------------------------
// CSV export

/// Columns: x..., Re c_i, Im c_i per component.
inline void write_field_csv(std::ostream& out, const SpectralField& u) {
    const auto& g = u.grid();
    out << (g.dim() == 1 ? "x" : "x1,x2");
    for (int c = 0; c < u.components(); ++c)
        out << ",re" << c << ",im" << c;
    out << "\n";
    for (int i = 0; i < g.size(); ++i) {
        const Coord x = g.point(i);
        out << csv::num(x[0]);
        if (g.dim() == 2)
            out << "," << csv::num(x[1]);
        for (int c = 0; c < u.components(); ++c)
            out << "," << csv::num(u.value(c, i).real()) << "," << csv::num(u.value(c, i).imag());
        out << "\n";
    }
}

inline void write_order_csv(std::ostream& out, const OrderEstimate& e) {
    out << "shell_center,sup\n";
    for (const auto& s : e.shells)
        out << csv::num(s.center) << "," << csv::num(s.sup) << "\n";
}

} // namespace hypnet

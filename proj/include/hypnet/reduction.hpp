#pragma once

// Reduction of L = d_t^m - sum_j A_{m-j}(t,x,D_x) d_t^j to a first-order
// system in u_j = d_t^{j-1} <D>^{m-j} u with a companion symbol B.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hypnet/symbolgrid.hpp"
#include "hypnet/symmetriser.hpp"

namespace hypnet {

using ScalarCoefficientFn = std::function<double(double t, const Coord& x)>;

/// a(t,x) d_x^alpha.
struct DifferentialTerm {
    ScalarCoefficientFn coefficient;
    std::array<int, 2> alpha{0, 0};
    std::string label = "a"; ///< used only in printed descriptions

    int order() const noexcept { return alpha[0] + alpha[1]; }

    /// Symbol a(t,x) (i xi)^alpha.
    cplx symbol(double t, const Coord& x, const Coord& xi) const {
        return coefficient(t, x) * multiplier(xi);
    }
    cplx multiplier(const Coord& xi) const {
        return std::pow(cplx(0.0, xi[0]), alpha[0]) * std::pow(cplx(0.0, xi[1]), alpha[1]);
    }
};

/// Scalar operator of order m; terms[k-1] holds A_k (order <= k), which
/// multiplies d_t^{m-k}.
class HigherOrderOperator {
public:
    HigherOrderOperator(int m, int dim, std::vector<std::vector<DifferentialTerm>> terms, bool time_independent = false)
        : m_(m), dim_(dim), terms_(std::move(terms)), time_independent_(time_independent) {
        if (m < 2)
            throw ArgumentError("HigherOrderOperator: order must be >= 2");
        if (dim != 1 && dim != 2)
            throw ArgumentError("HigherOrderOperator: dimension must be 1 or 2");
        if (int(terms_.size()) != m)
            throw ArgumentError("HigherOrderOperator: need one term list per A_1..A_m");
        for (int k = 1; k <= m; ++k)
            for (const auto& t : terms_[std::size_t(k - 1)]) {
                if (t.alpha[0] < 0 || t.alpha[1] < 0 || (dim == 1 && t.alpha[1] != 0))
                    throw ArgumentError("HigherOrderOperator: invalid multi-index");
                if (t.order() > k)
                    throw ArgumentError("HigherOrderOperator: A_" + std::to_string(k) + " has a term of order " +
                                        std::to_string(t.order()));
            }
    }

    int order() const noexcept { return m_; }
    int dim() const noexcept { return dim_; }
    bool time_independent() const noexcept { return time_independent_; }

    /// Terms of A_k, k = 1..m.
    const std::vector<DifferentialTerm>& A(int k) const { return terms_[std::size_t(k - 1)]; }

    /// Symbol of A_k at (t, x, xi).
    cplx symbol(int k, double t, const Coord& x, const Coord& xi) const {
        cplx s{};
        for (const auto& term : A(k))
            s += term.symbol(t, x, xi);
        return s;
    }

private:
    int m_;
    int dim_;
    std::vector<std::vector<DifferentialTerm>> terms_;
    bool time_independent_;
};

/// First-order system d_t U = B(t,x,D) U + (0,...,0,f).
struct CompanionSystem {
    HigherOrderOperator op;
    SymbolMatrix B;

    int size() const noexcept { return op.order(); }

    /// (g_1..g_m) -> u_j(0) = <D>^{m-j} g_j, stacked component-major.
    SpectralField transform_data(const std::vector<SpectralField>& g) const {
        const int m = size();
        if (int(g.size()) != m)
            throw ArgumentError("transform_data: need m data fields");
        const TorusGrid grid = g[0].grid();
        std::vector<cplx> c(std::size_t(m) * grid.size());
        for (int j = 1; j <= m; ++j) {
            if (g[std::size_t(j - 1)].components() != 1 || !(g[std::size_t(j - 1)].grid() == grid))
                throw ArgumentError("transform_data: data must be scalar fields on one grid");
            const auto v = multiplier_apply(double(m - j), g[std::size_t(j - 1)]);
            std::copy(v.coefficients().begin(), v.coefficients().end(), c.begin() + std::ptrdiff_t(j - 1) * grid.size());
        }
        return SpectralField::from_coefficients(grid, m, std::move(c));
    }

    /// f -> (0, ..., 0, f).
    SpectralField embed_source(const SpectralField& f) const {
        const int m = size();
        std::vector<cplx> v(std::size_t(m) * f.points(), cplx{});
        std::copy(f.physical().begin(), f.physical().end(), v.begin() + std::ptrdiff_t(m - 1) * f.points());
        return SpectralField::from_physical(f.grid(), m, std::move(v));
    }

    /// u = <D>^{1-m} u_1.
    SpectralField recover(const SpectralField& state) const { return multiplier_apply(1.0 - size(), state.component(0)); }

    /// Rows and symbol formulas as text.
    std::string describe() const {
        const int m = size();
        std::ostringstream o;
        o << "companion system m=" << m << " dim=" << op.dim() << "\n";
        for (int r = 1; r < m; ++r) {
            o << "row " << r << ":";
            for (int c = 1; c <= m; ++c)
                o << (c == 1 ? " " : ", ") << (c == r + 1 ? "<xi>" : "0");
            o << "\n";
        }
        o << "row " << m << ":";
        for (int j = 1; j <= m; ++j) {
            const int k = m - j + 1;
            o << (j == 1 ? " " : ", ") << "b" << j << " = A" << k << "~ <xi>^" << (j - m);
        }
        o << "\n";
        for (int k = 1; k <= m; ++k) {
            o << "A" << k << "~ =";
            const auto& terms = op.A(k);
            if (terms.empty())
                o << " 0";
            for (std::size_t i = 0; i < terms.size(); ++i) {
                o << (i == 0 ? " " : " + ") << terms[i].label;
                if (terms[i].order() > 0) {
                    o << " (i xi1)^" << terms[i].alpha[0];
                    if (op.dim() == 2)
                        o << " (i xi2)^" << terms[i].alpha[1];
                }
            }
            o << "\n";
        }
        return o.str();
    }
};

inline CompanionSystem reduce(const HigherOrderOperator& op) {
    const int m = op.order();
    const int dim = op.dim();
    std::vector<SeparableTerm> terms;
    // Superdiagonal <xi>.
    terms.push_back({[m](double, const Coord&) {
                         CMatrix e = CMatrix::Zero(m, m);
                         for (int r = 0; r + 1 < m; ++r)
                             e(r, r + 1) = 1.0;
                         return e;
                     },
                     [dim](const Coord& xi) { return cplx(bracket(xi, dim)); }});
    // Last row: b_j = A_{m-j+1} <xi>^{j-m}.
    for (int j = 1; j <= m; ++j) {
        const int k = m - j + 1;
        for (const auto& t : op.A(k)) {
            auto coef = t.coefficient;
            terms.push_back({[coef, m, j](double tt, const Coord& x) {
                                 CMatrix e = CMatrix::Zero(m, m);
                                 e(m - 1, j - 1) = coef(tt, x);
                                 return e;
                             },
                             [t, dim, j, m](const Coord& xi) {
                                 return t.multiplier(xi) * std::pow(bracket(xi, dim), double(j - m));
                             }});
        }
    }
    auto B = SymbolMatrix::separable(m, 1.0, dim, std::move(terms), op.time_independent());
    B.set_zero_nyquist(true).set_name("B");
    return CompanionSystem{op, std::move(B)};
}

/// Eigenvalues of B certified purely imaginary; tau_j = eigenvalue / i.
inline EigenSystem characteristic_roots(const CompanionSystem& cs, double t, const std::vector<SamplePoint>& samples,
                                        const HyperbolicityOptions& opt = {}) {
    return eigen_decompose(cs.B, t, samples, opt);
}

/// Roots tau of P(tau) = (i tau)^m - sum_j A~_{m-j} (i tau)^j from the
/// Frobenius companion matrix of the monic polynomial in mu = i tau.
inline std::vector<cplx> polynomial_roots(const HigherOrderOperator& op, double t, const Coord& x, const Coord& xi) {
    const int m = op.order();
    CMatrix c = CMatrix::Zero(m, m);
    for (int r = 0; r + 1 < m; ++r)
        c(r, r + 1) = 1.0;
    // mu^m = sum_{j=0}^{m-1} A~_{m-j} mu^j.
    for (int j = 0; j < m; ++j)
        c(m - 1, j) = op.symbol(m - j, t, x, xi);
    Eigen::ComplexEigenSolver<CMatrix> es(c, false);
    std::vector<cplx> roots;
    for (Eigen::Index i = 0; i < m; ++i)
        roots.push_back(es.eigenvalues()(i) / cplx(0.0, 1.0));
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    return roots;
}

} // namespace hypnet

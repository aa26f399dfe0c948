#pragma once

// Periodic grid on [-pi, pi)^n and vector fields with Fourier-coefficient access.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "hypnet/errors.hpp"

namespace hypnet {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Coord = std::array<double, 2>;

inline constexpr double pi = std::numbers::pi;

/// Japanese bracket <xi> = (1 + |xi|^2)^(1/2).
inline double bracket(const Coord& xi, int dim) {
    double s = 1.0;
    for (int a = 0; a < dim; ++a)
        s += xi[a] * xi[a];
    return std::sqrt(s);
}

inline double norm_of(const Coord& v, int dim) {
    double s = 0.0;
    for (int a = 0; a < dim; ++a)
        s += v[a] * v[a];
    return std::sqrt(s);
}

/// Uniform periodic grid with N points per axis (N a power of two).
///
/// Points are x_j = -pi + j*2pi/N. Coefficient index k maps to the integer
/// frequency k for k <= N/2 and k - N otherwise, so the frequency set is
/// {-N/2+1, ..., N/2}.
class TorusGrid {
public:
    TorusGrid() = default;

    TorusGrid(int dim, int points_per_axis) : dim_(dim), n_(points_per_axis) {
        if (dim != 1 && dim != 2)
            throw ArgumentError("TorusGrid: dimension must be 1 or 2");
        if (n_ < 4 || (n_ & (n_ - 1)) != 0)
            throw ArgumentError("TorusGrid: points per axis must be a power of two >= 4");
    }

    int dim() const noexcept { return dim_; }
    int points_per_axis() const noexcept { return n_; }
    int size() const noexcept { return dim_ == 1 ? n_ : n_ * n_; }
    double spacing() const noexcept { return 2.0 * pi / n_; }
    double cell_volume() const noexcept { return dim_ == 1 ? spacing() : spacing() * spacing(); }
    double volume() const noexcept { return dim_ == 1 ? 2.0 * pi : 4.0 * pi * pi; }

    double axis_point(int j) const noexcept { return -pi + j * spacing(); }
    int axis_frequency(int k) const noexcept { return k <= n_ / 2 ? k : k - n_; }
    int axis_index_of_frequency(int f) const noexcept { return f >= 0 ? f : f + n_; }

    /// Flat index is i0 * N + i1 in 2D.
    Coord point(int idx) const noexcept {
        if (dim_ == 1)
            return {axis_point(idx), 0.0};
        return {axis_point(idx / n_), axis_point(idx % n_)};
    }

    Coord frequency(int idx) const noexcept {
        if (dim_ == 1)
            return {double(axis_frequency(idx)), 0.0};
        return {double(axis_frequency(idx / n_)), double(axis_frequency(idx % n_))};
    }

    bool is_nyquist(int idx) const noexcept {
        if (dim_ == 1)
            return idx == n_ / 2;
        return idx / n_ == n_ / 2 || idx % n_ == n_ / 2;
    }

    /// Largest |xi| on the grid.
    double max_frequency() const noexcept { return dim_ == 1 ? n_ / 2.0 : n_ / 2.0 * std::sqrt(2.0); }

    bool operator==(const TorusGrid& o) const noexcept { return dim_ == o.dim_ && n_ == o.n_; }

private:
    int dim_ = 1;
    int n_ = 4;
};

namespace detail {

inline Eigen::FFT<double>& fft_engine() {
    thread_local Eigen::FFT<double> engine;
    return engine;
}

// (-1)^k phase from the -pi origin of the grid.
inline double origin_sign(int k) { return (k & 1) ? -1.0 : 1.0; }

inline void fft_axis_1d(std::vector<cplx>& data, bool forward) {
    auto& f = fft_engine();
    std::vector<cplx> out(data.size());
    if (forward)
        f.fwd(out, data);
    else
        f.inv(out, data); // scaled by 1/N
    data.swap(out);
}

} // namespace detail

/// Physical samples -> Fourier coefficients u_hat(xi) = N^-n sum_j u_j e^{-i x_j.xi}.
inline void forward_transform(const TorusGrid& g, const cplx* in, cplx* out) {
    const int n = g.points_per_axis();
    if (g.dim() == 1) {
        std::vector<cplx> buf(in, in + n);
        detail::fft_axis_1d(buf, true);
        for (int k = 0; k < n; ++k)
            out[k] = buf[k] * (detail::origin_sign(k) / n);
        return;
    }
    std::vector<cplx> work(in, in + n * n);
    std::vector<cplx> line(n);
    for (int i0 = 0; i0 < n; ++i0) {
        for (int i1 = 0; i1 < n; ++i1)
            line[i1] = work[i0 * n + i1];
        detail::fft_axis_1d(line, true);
        for (int i1 = 0; i1 < n; ++i1)
            work[i0 * n + i1] = line[i1];
    }
    for (int i1 = 0; i1 < n; ++i1) {
        for (int i0 = 0; i0 < n; ++i0)
            line[i0] = work[i0 * n + i1];
        detail::fft_axis_1d(line, true);
        for (int i0 = 0; i0 < n; ++i0)
            out[i0 * n + i1] = line[i0] * (detail::origin_sign(i0 + i1) / (double(n) * n));
    }
}

/// Fourier coefficients -> physical samples u_j = sum_xi u_hat(xi) e^{i x_j.xi}.
inline void inverse_transform(const TorusGrid& g, const cplx* in, cplx* out) {
    const int n = g.points_per_axis();
    if (g.dim() == 1) {
        std::vector<cplx> buf(n);
        for (int k = 0; k < n; ++k)
            buf[k] = in[k] * detail::origin_sign(k);
        detail::fft_axis_1d(buf, false);
        for (int j = 0; j < n; ++j)
            out[j] = buf[j] * double(n);
        return;
    }
    std::vector<cplx> work(n * n);
    for (int i0 = 0; i0 < n; ++i0)
        for (int i1 = 0; i1 < n; ++i1)
            work[i0 * n + i1] = in[i0 * n + i1] * detail::origin_sign(i0 + i1);
    std::vector<cplx> line(n);
    for (int i0 = 0; i0 < n; ++i0) {
        for (int i1 = 0; i1 < n; ++i1)
            line[i1] = work[i0 * n + i1];
        detail::fft_axis_1d(line, false);
        for (int i1 = 0; i1 < n; ++i1)
            work[i0 * n + i1] = line[i1];
    }
    for (int i1 = 0; i1 < n; ++i1) {
        for (int i0 = 0; i0 < n; ++i0)
            line[i0] = work[i0 * n + i1];
        detail::fft_axis_1d(line, false);
        for (int i0 = 0; i0 < n; ++i0)
            out[i0 * n + i1] = line[i0] * (double(n) * n);
    }
}

/// Vector-valued function on the torus, immutable after construction.
///
/// Values are stored component-major: entry (c, idx) lives at c * size + idx,
/// both for physical samples and for Fourier coefficients.
class SpectralField {
public:
    SpectralField() = default;

    static SpectralField zeros(const TorusGrid& g, int components) {
        SpectralField f;
        f.grid_ = g;
        f.m_ = components;
        f.phys_.assign(std::size_t(components) * g.size(), cplx{});
        f.coef_ = f.phys_;
        return f;
    }

    static SpectralField from_physical(const TorusGrid& g, int components, std::vector<cplx> values) {
        if (values.size() != std::size_t(components) * g.size())
            throw ArgumentError("SpectralField: value count does not match grid and components");
        SpectralField f;
        f.grid_ = g;
        f.m_ = components;
        f.phys_ = std::move(values);
        f.coef_.resize(f.phys_.size());
        for (int c = 0; c < components; ++c)
            forward_transform(g, f.phys_.data() + c * g.size(), f.coef_.data() + c * g.size());
        return f;
    }

    static SpectralField from_coefficients(const TorusGrid& g, int components, std::vector<cplx> coefs) {
        if (coefs.size() != std::size_t(components) * g.size())
            throw ArgumentError("SpectralField: coefficient count does not match grid and components");
        SpectralField f;
        f.grid_ = g;
        f.m_ = components;
        f.coef_ = std::move(coefs);
        f.phys_.resize(f.coef_.size());
        for (int c = 0; c < components; ++c)
            inverse_transform(g, f.coef_.data() + c * g.size(), f.phys_.data() + c * g.size());
        return f;
    }

    /// Samples fn(x) (returning one value per component) at the grid points.
    static SpectralField sample(const TorusGrid& g, int components, const std::function<CVector(const Coord&)>& fn) {
        std::vector<cplx> v(std::size_t(components) * g.size());
        for (int i = 0; i < g.size(); ++i) {
            const CVector z = fn(g.point(i));
            for (int c = 0; c < components; ++c)
                v[std::size_t(c) * g.size() + i] = z(c);
        }
        return from_physical(g, components, std::move(v));
    }

    static SpectralField sample_scalar(const TorusGrid& g, const std::function<cplx(const Coord&)>& fn) {
        std::vector<cplx> v(g.size());
        for (int i = 0; i < g.size(); ++i)
            v[i] = fn(g.point(i));
        return from_physical(g, 1, std::move(v));
    }

    /// Single Fourier mode z * e^{i x.xi}.
    static SpectralField mode(const TorusGrid& g, const Coord& xi, const CVector& z) {
        const int m = int(z.size());
        std::vector<cplx> coefs(std::size_t(m) * g.size(), cplx{});
        int idx = g.axis_index_of_frequency(int(xi[0]));
        if (g.dim() == 2)
            idx = idx * g.points_per_axis() + g.axis_index_of_frequency(int(xi[1]));
        for (int c = 0; c < m; ++c)
            coefs[std::size_t(c) * g.size() + idx] = z(c);
        return from_coefficients(g, m, std::move(coefs));
    }

    const TorusGrid& grid() const noexcept { return grid_; }
    int components() const noexcept { return m_; }
    int points() const noexcept { return grid_.size(); }

    cplx value(int c, int idx) const { return phys_[std::size_t(c) * grid_.size() + idx]; }
    cplx coefficient(int c, int k) const { return coef_[std::size_t(c) * grid_.size() + k]; }

    /// Component vector at grid point idx.
    CVector at(int idx) const {
        CVector z(m_);
        for (int c = 0; c < m_; ++c)
            z(c) = value(c, idx);
        return z;
    }
    CVector coefficient_vector(int k) const {
        CVector z(m_);
        for (int c = 0; c < m_; ++c)
            z(c) = coefficient(c, k);
        return z;
    }

    const std::vector<cplx>& physical() const noexcept { return phys_; }
    const std::vector<cplx>& coefficients() const noexcept { return coef_; }

    /// One component as a scalar field.
    SpectralField component(int c) const {
        std::vector<cplx> v(phys_.begin() + std::ptrdiff_t(c) * grid_.size(),
                            phys_.begin() + std::ptrdiff_t(c + 1) * grid_.size());
        return from_physical(grid_, 1, std::move(v));
    }

    SpectralField operator+(const SpectralField& o) const { return combine(o, 1.0); }
    SpectralField operator-(const SpectralField& o) const { return combine(o, -1.0); }
    SpectralField operator*(cplx s) const {
        auto v = phys_;
        for (auto& x : v)
            x *= s;
        auto c = coef_;
        for (auto& x : c)
            x *= s;
        SpectralField f;
        f.grid_ = grid_;
        f.m_ = m_;
        f.phys_ = std::move(v);
        f.coef_ = std::move(c);
        return f;
    }

private:
    SpectralField combine(const SpectralField& o, double sign) const {
        if (!(o.grid_ == grid_) || o.m_ != m_)
            throw ArgumentError("SpectralField: incompatible operands");
        SpectralField f;
        f.grid_ = grid_;
        f.m_ = m_;
        f.phys_.resize(phys_.size());
        f.coef_.resize(coef_.size());
        for (std::size_t i = 0; i < phys_.size(); ++i) {
            f.phys_[i] = phys_[i] + sign * o.phys_[i];
            f.coef_[i] = coef_[i] + sign * o.coef_[i];
        }
        return f;
    }

    TorusGrid grid_;
    int m_ = 0;
    std::vector<cplx> phys_;
    std::vector<cplx> coef_;
};

inline SpectralField operator*(cplx s, const SpectralField& f) { return f * s; }

/// L2 inner product (u, v) = integral of u . conj(v) by the rectangle rule.
inline cplx inner(const SpectralField& u, const SpectralField& v) {
    if (!(u.grid() == v.grid()) || u.components() != v.components())
        throw ArgumentError("inner: incompatible fields");
    cplx s{};
    const auto& a = u.physical();
    const auto& b = v.physical();
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * std::conj(b[i]);
    return s * u.grid().cell_volume();
}

inline double l2_norm(const SpectralField& u) { return std::sqrt(std::max(0.0, inner(u, u).real())); }

inline double sup_norm(const SpectralField& u) {
    double s = 0.0;
    for (int i = 0; i < u.points(); ++i)
        s = std::max(s, u.at(i).norm());
    return s;
}

/// Componentwise physical samples of a scalar function.
inline std::vector<double> sample_real(const TorusGrid& g, const std::function<double(const Coord&)>& fn) {
    std::vector<double> v(g.size());
    for (int i = 0; i < g.size(); ++i)
        v[i] = fn(g.point(i));
    return v;
}

} // namespace hypnet

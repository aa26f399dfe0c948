#pragma once

// Mollifier families and regularisation of piecewise coefficients into
// smooth nets.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "hypnet/csv.hpp"
#include "hypnet/epsnets.hpp"
#include "hypnet/torus.hpp"

namespace hypnet {

/// Unnormalised bump exp(-1/(1-s^2)) on (-1, 1).
inline double raw_bump(double s) {
    const double q = 1.0 - s * s;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

/// Integral of raw_bump over (-1, 1). The bump is flat to all orders at the
/// endpoints, so the trapezoid rule converges faster than any power.
inline double raw_bump_mass() {
    static const double mass = [] {
        const int n = 1 << 14;
        const double h = 2.0 / n;
        double s = 0.0;
        for (int i = 1; i < n; ++i)
            s += raw_bump(-1.0 + i * h);
        return s * h;
    }();
    return mass;
}

/// Unit-mass even bump profile on (-1, 1).
inline double bump_profile(double s) { return raw_bump(s) / raw_bump_mass(); }

/// Derivative of the unit-mass profile.
inline double bump_profile_derivative(double s) {
    const double q = 1.0 - s * s;
    if (q <= 0.0)
        return 0.0;
    return bump_profile(s) * (-2.0 * s / (q * q));
}

enum class RateKind { Logarithmic, Power };

/// epsilon -> omega_eps, either 1 + log(1/eps) or eps^-theta.
struct MollifierRate {
    RateKind kind = RateKind::Logarithmic;
    double theta = 1.0;

    static MollifierRate logarithmic() { return {}; }
    static MollifierRate power(double theta) {
        if (!(theta > 0.0))
            throw ArgumentError("MollifierRate: power exponent must be positive");
        return {RateKind::Power, theta};
    }

    double operator()(double eps) const {
        if (!(eps > 0.0 && eps <= 1.0))
            throw ArgumentError("MollifierRate: eps must lie in (0,1]");
        return kind == RateKind::Logarithmic ? 1.0 + std::log(1.0 / eps) : std::pow(eps, -theta);
    }

    std::string describe() const {
        return kind == RateKind::Logarithmic ? std::string("1+log(1/eps)") : "eps^-" + csv::short_num(theta);
    }
};

/// phi_eps(x) = omega^n prod_a profile(omega x_a).
struct MollifierFamily {
    MollifierRate rate;
    int dim = 1;

    double omega(double eps) const { return rate(eps); }

    double phi(double eps, const Coord& x) const {
        const double w = omega(eps);
        double v = 1.0;
        for (int a = 0; a < dim; ++a)
            v *= w * bump_profile(w * x[a]);
        return v;
    }

    /// sup of the unit-mass profile, attained at 0.
    static double max_profile() { return bump_profile(0.0); }
};

/// Sampled 1D kernel with unit discrete mass; in 2D the tensor square is used.
struct DiscreteKernel {
    double omega = 1.0;
    double spacing = 0.0;
    int radius = 0;
    std::vector<double> weights; ///< index i + radius for offset i

    int support_points() const { return 2 * radius + 1; }
    double at(int i) const { return (i < -radius || i > radius) ? 0.0 : weights[std::size_t(i + radius)]; }
    double mass() const {
        double s = 0.0;
        for (double w : weights)
            s += w;
        return s * spacing;
    }
};

/// Smallest power-of-two point count per period 2pi resolving omega.
inline long required_points_for(double omega) {
    long n = 4;
    while (!(2.0 * pi / double(n) < 1.0 / (4.0 * omega)))
        n *= 2;
    return n;
}

inline DiscreteKernel sample_mollifier(const MollifierFamily& f, double eps, double spacing) {
    const double w = f.omega(eps);
    if (!(spacing > 0.0))
        throw ArgumentError("sample_mollifier: spacing must be positive");
    if (!(spacing < 1.0 / (4.0 * w)))
        throw ResolutionError("sample_mollifier: spacing " + csv::short_num(spacing) + " does not resolve omega=" +
                                  csv::short_num(w) + " (need spacing < 1/(4 omega))",
                              required_points_for(w));
    DiscreteKernel k;
    k.omega = w;
    k.spacing = spacing;
    k.radius = int(std::floor(1.0 / (w * spacing) + 1e-12));
    k.weights.assign(std::size_t(2 * k.radius + 1), 0.0);
    double sum = 0.0;
    for (int i = 0; i <= k.radius; ++i) {
        const double v = w * bump_profile(w * i * spacing);
        k.weights[std::size_t(k.radius + i)] = v;
        k.weights[std::size_t(k.radius - i)] = v;
        sum += (i == 0 ? 1.0 : 2.0) * v;
    }
    const double scale = 1.0 / (sum * spacing);
    for (auto& v : k.weights)
        v *= scale;
    return k;
}

enum class JumpVariable { Space, Time };

/// Piecewise coefficient along one variable (x_1 in space, or t).
///
/// Breakpoints split the variable's range into pieces, each with a smooth
/// closed-form value. At a breakpoint the value is the midpoint of the
/// one-sided limits. In space the range is the period [-pi, pi), and a
/// mismatch between the two ends counts as a jump at the seam.
class PiecewiseCoefficient {
public:
    using PieceFn = std::function<double(const Coord&)>;

    PiecewiseCoefficient() = default;

    PiecewiseCoefficient(int dim, JumpVariable var, std::vector<double> breaks, std::vector<PieceFn> pieces,
                         double lower, double upper)
        : dim_(dim), var_(var), breaks_(std::move(breaks)), pieces_(std::move(pieces)), lower_(lower), upper_(upper) {
        if (dim != 1 && dim != 2)
            throw ArgumentError("PiecewiseCoefficient: dimension must be 1 or 2");
        if (pieces_.size() != breaks_.size() + 1)
            throw ArgumentError("PiecewiseCoefficient: need one more piece than breakpoints");
        if (!std::is_sorted(breaks_.begin(), breaks_.end()) ||
            std::adjacent_find(breaks_.begin(), breaks_.end()) != breaks_.end())
            throw ArgumentError("PiecewiseCoefficient: breakpoints must be strictly increasing");
        if (var_ == JumpVariable::Space)
            for (double b : breaks_)
                if (!(b > -pi && b < pi))
                    throw ArgumentError("PiecewiseCoefficient: spatial breakpoints must lie in (-pi, pi)");
        if (!(lower_ > 0.0 && upper_ >= lower_))
            throw ArgumentError("PiecewiseCoefficient: bounds must satisfy 0 < lower <= upper");
        check_bounds();
    }

    static PiecewiseCoefficient constant(int dim, double value) {
        return piecewise_constant(dim, JumpVariable::Space, {}, {value});
    }

    /// Constant pieces; bounds are the extreme values.
    static PiecewiseCoefficient piecewise_constant(int dim, JumpVariable var, std::vector<double> breaks,
                                                   const std::vector<double>& values) {
        std::vector<PieceFn> pieces;
        for (double v : values)
            pieces.push_back([v](const Coord&) { return v; });
        if (values.empty())
            throw ArgumentError("PiecewiseCoefficient: no values");
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        return PiecewiseCoefficient(dim, var, std::move(breaks), std::move(pieces), *lo, *hi);
    }

    /// Single jump at `at` from `left` to `right`.
    static PiecewiseCoefficient step(int dim, JumpVariable var, double at, double left, double right) {
        return piecewise_constant(dim, var, {at}, {left, right});
    }

    int dim() const noexcept { return dim_; }
    JumpVariable variable() const noexcept { return var_; }
    const std::vector<double>& breaks() const noexcept { return breaks_; }
    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }

    /// Value at a point; for time coefficients pass {t, 0}.
    double operator()(const Coord& p) const {
        const double s = p[0];
        for (std::size_t k = 0; k < breaks_.size(); ++k) {
            if (s == breaks_[k])
                return 0.5 * (pieces_[k](p) + pieces_[k + 1](p));
            if (s < breaks_[k])
                return pieces_[k](p);
        }
        return pieces_.back()(p);
    }

    double at_time(double t) const { return (*this)({t, 0.0}); }

    /// Jump locations including the seam (-pi) when the periodic ends disagree.
    std::vector<double> jumps() const {
        std::vector<double> j = breaks_;
        if (var_ == JumpVariable::Space) {
            const double l = pieces_.front()({-pi, 0.0});
            const double r = pieces_.back()({pi, 0.0});
            if (std::abs(l - r) > 1e-14 * std::max(1.0, std::abs(l)))
                j.insert(j.begin(), -pi);
        }
        return j;
    }

    /// Distance (periodic in space) to the nearest jump; +inf if none.
    double distance_to_jump(double s) const {
        double d = std::numeric_limits<double>::infinity();
        for (double b : jumps()) {
            double e = std::abs(s - b);
            if (var_ == JumpVariable::Space)
                e = std::min(e, 2.0 * pi - e);
            d = std::min(d, e);
        }
        return d;
    }

private:
    void check_bounds() const {
        const int samples = 64;
        for (std::size_t k = 0; k < pieces_.size(); ++k) {
            // Time pieces are unbounded at the ends; sample one unit beyond the outer breakpoints.
            const bool space = var_ == JumpVariable::Space;
            const double first = breaks_.empty() ? 0.0 : breaks_.front();
            const double lo = k > 0 ? breaks_[k - 1] : space ? -pi : first - 1.0;
            const double hi = k < breaks_.size() ? breaks_[k] : space ? pi : lo + 1.0;
            for (int i = 0; i <= samples; ++i) {
                const double s = lo + (hi - lo) * i / samples;
                for (int y = 0; y < (dim_ == 2 ? 8 : 1); ++y) {
                    const Coord p{s, dim_ == 2 ? -pi + y * pi / 4.0 : 0.0};
                    const double v = pieces_[k](p);
                    if (!(v >= lower_ - 1e-12 && v <= upper_ + 1e-12))
                        throw ArgumentError("PiecewiseCoefficient: value " + csv::short_num(v) + " at " +
                                            csv::short_num(s) + " violates bounds [" + csv::short_num(lower_) + ", " +
                                            csv::short_num(upper_) + "]");
                }
            }
        }
    }

    int dim_ = 1;
    JumpVariable var_ = JumpVariable::Space;
    std::vector<double> breaks_;
    std::vector<PieceFn> pieces_;
    double lower_ = 1.0;
    double upper_ = 1.0;
};

/// Uniform nodes on an axis: periodic over [-pi, pi) or an interval [t0, t1].
struct NodeAxis {
    double origin = -pi;
    double spacing = 0.0;
    int count = 0;
    bool periodic = true;

    static NodeAxis torus(const TorusGrid& g) { return {-pi, g.spacing(), g.points_per_axis(), true}; }
    static NodeAxis interval(double t0, double t1, int points) {
        if (points < 2 || !(t1 > t0))
            throw ArgumentError("NodeAxis: need t1 > t0 and >= 2 points");
        return {t0, (t1 - t0) / (points - 1), points, false};
    }
    double node(int i) const { return origin + i * spacing; }
};

/// c_eps = c * phi_eps realised on a node set.
///
/// At the nodes this is the discrete convolution with the renormalised
/// kernel. Between nodes it is extended by the normalised kernel average
/// sum_i phi(x - y_i) c(y_i) / sum_i phi(x - y_i), which is smooth, agrees with
/// the nodal values and keeps every value inside the coefficient bounds.
class RegularizedCoefficient {
public:
    RegularizedCoefficient(PiecewiseCoefficient c, const MollifierFamily& f, NodeAxis axis, double eps)
        : c_(std::move(c)), axis_(axis), dim_(c_.dim()) {
        if (c_.variable() == JumpVariable::Time)
            dim_ = 1;
        kernel_ = sample_mollifier(f, eps, axis_.spacing);
        const int n = axis_.count;
        const int size = dim_ == 1 ? n : n * n;
        exact_.resize(std::size_t(size));
        for (int i = 0; i < size; ++i)
            exact_[std::size_t(i)] = c_(node_point(i));
        nodal_.resize(std::size_t(size));
        for (int i = 0; i < size; ++i)
            nodal_[std::size_t(i)] = convolve_at_node(i);
    }

    double omega() const noexcept { return kernel_.omega; }
    const DiscreteKernel& kernel() const noexcept { return kernel_; }
    const PiecewiseCoefficient& exact() const noexcept { return c_; }

    /// Values at the nodes (flat index i0 * N + i1 in 2D).
    const std::vector<double>& nodal_values() const noexcept { return nodal_; }

    double operator()(const Coord& p) const {
        int idx = 0;
        if (node_index(p, idx))
            return nodal_[std::size_t(idx)];
        return shepard(p);
    }

    double at_time(double t) const { return (*this)({t, 0.0}); }

private:
    Coord node_point(int i) const {
        if (dim_ == 1)
            return {axis_.node(i), 0.0};
        return {axis_.node(i / axis_.count), axis_.node(i % axis_.count)};
    }

    int wrap(int i) const {
        if (!axis_.periodic)
            return i;
        const int n = axis_.count;
        return ((i % n) + n) % n;
    }

    bool valid(int i) const { return axis_.periodic || (i >= 0 && i < axis_.count); }

    bool node_index(const Coord& p, int& idx) const {
        int out = 0;
        for (int a = 0; a < dim_; ++a) {
            const double r = (p[a] - axis_.origin) / axis_.spacing;
            const double k = std::round(r);
            if (std::abs(r - k) > 1e-9)
                return false;
            const int i = wrap(int(k));
            if (!valid(i))
                return false;
            out = out * axis_.count + i;
        }
        idx = out;
        return true;
    }

    double convolve_at_node(int idx) const {
        const int n = axis_.count;
        const int r = kernel_.radius;
        double num = 0.0, den = 0.0;
        if (dim_ == 1) {
            for (int o = -r; o <= r; ++o) {
                const int j = wrap(idx - o);
                if (!valid(j))
                    continue;
                const double w = kernel_.at(o);
                num += w * exact_[std::size_t(j)];
                den += w;
            }
        } else {
            const int i0 = idx / n, i1 = idx % n;
            for (int o0 = -r; o0 <= r; ++o0)
                for (int o1 = -r; o1 <= r; ++o1) {
                    const double w = kernel_.at(o0) * kernel_.at(o1);
                    num += w * exact_[std::size_t(wrap(i0 - o0) * n + wrap(i1 - o1))];
                    den += w;
                }
        }
        return num / den;
    }

    double shepard(const Coord& p) const {
        const int n = axis_.count;
        const double w = kernel_.omega;
        const double h = axis_.spacing;
        auto axis_terms = [&](double s, std::vector<std::pair<int, double>>& out) {
            out.clear();
            const double r = (s - axis_.origin) / h;
            const int lo = int(std::floor(r - 1.0 / (w * h))) - 1;
            const int hi = int(std::ceil(r + 1.0 / (w * h))) + 1;
            for (int k = lo; k <= hi; ++k) {
                const int j = wrap(k);
                if (!valid(j))
                    continue;
                const double v = bump_profile(w * (s - (axis_.origin + k * h)));
                if (v > 0.0)
                    out.emplace_back(j, v);
            }
        };
        std::vector<std::pair<int, double>> t0, t1;
        axis_terms(p[0], t0);
        double num = 0.0, den = 0.0;
        if (dim_ == 1) {
            for (auto [j, v] : t0) {
                num += v * exact_[std::size_t(j)];
                den += v;
            }
        } else {
            axis_terms(p[1], t1);
            for (auto [j0, v0] : t0)
                for (auto [j1, v1] : t1) {
                    num += v0 * v1 * exact_[std::size_t(j0 * n + j1)];
                    den += v0 * v1;
                }
        }
        if (!(den > 0.0))
            throw ResolutionError("RegularizedCoefficient: no kernel nodes near evaluation point");
        return num / den;
    }

    PiecewiseCoefficient c_;
    NodeAxis axis_;
    int dim_;
    DiscreteKernel kernel_;
    std::vector<double> exact_;
    std::vector<double> nodal_;
};

/// Discrete convolution on a torus grid; returns c_eps at the grid points.
inline std::vector<double> regularize_coefficient(const PiecewiseCoefficient& c, const MollifierFamily& f,
                                                  const TorusGrid& g, double eps) {
    if (c.variable() != JumpVariable::Space || c.dim() != g.dim())
        throw ArgumentError("regularize_coefficient: spatial coefficient and grid dimension must agree");
    return RegularizedCoefficient(c, f, NodeAxis::torus(g), eps).nodal_values();
}

/// Discrete convolution on a temporal node set.
inline std::vector<double> regularize_coefficient(const PiecewiseCoefficient& c, const MollifierFamily& f,
                                                  const NodeAxis& time_nodes, double eps) {
    if (c.variable() != JumpVariable::Time)
        throw ArgumentError("regularize_coefficient: coefficient does not jump in time");
    return RegularizedCoefficient(c, f, time_nodes, eps).nodal_values();
}

/// Spectral derivative d^k/dx^k (1D) of real grid samples; Nyquist dropped for odd k.
inline std::vector<double> spectral_derivative(const TorusGrid& g, const std::vector<double>& v, int axis, int k) {
    std::vector<cplx> in(v.begin(), v.end()), c(v.size()), out(v.size());
    forward_transform(g, in.data(), c.data());
    for (int i = 0; i < g.size(); ++i) {
        const double xi = g.frequency(i)[axis];
        const bool nyq = (g.dim() == 1 ? i == g.points_per_axis() / 2
                                       : (axis == 0 ? i / g.points_per_axis() : i % g.points_per_axis()) ==
                                             g.points_per_axis() / 2);
        if (nyq && (k % 2 == 1))
            c[std::size_t(i)] = 0.0;
        else
            c[std::size_t(i)] *= std::pow(cplx(0.0, xi), k);
    }
    inverse_transform(g, c.data(), out.data());
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        r[i] = out[i].real();
    return r;
}

/// For each derivative order 0..max_order, the net eps -> ||d^alpha c_eps||_inf
/// (in 2D the sup over all multi-indices of that order).
inline std::vector<NetSample> derivative_growth_report(const PiecewiseCoefficient& c, const MollifierFamily& f,
                                                       const TorusGrid& g, const EpsilonGrid& eps_grid,
                                                       int max_order) {
    if (max_order < 0)
        throw ArgumentError("derivative_growth_report: max_order must be >= 0");
    std::vector<std::vector<double>> values(std::size_t(max_order + 1));
    for (double eps : eps_grid) {
        const auto ce = regularize_coefficient(c, f, g, eps);
        for (int k = 0; k <= max_order; ++k) {
            double sup = 0.0;
            for (int a0 = 0; a0 <= (g.dim() == 2 ? k : 0); ++a0) {
                const int k0 = g.dim() == 2 ? a0 : k;
                const int k1 = k - k0;
                auto d = k0 > 0 ? spectral_derivative(g, ce, 0, k0) : ce;
                if (k1 > 0)
                    d = spectral_derivative(g, d, 1, k1);
                for (double x : d)
                    sup = std::max(sup, std::abs(x));
            }
            values[std::size_t(k)].push_back(sup);
        }
    }
    std::vector<NetSample> out;
    for (auto& v : values)
        out.emplace_back(eps_grid, std::move(v));
    return out;
}

/// Two-column export (x, value); 2D writes x1, x2, value.
inline void write_coefficient_csv(std::ostream& out, const TorusGrid& g, const std::vector<double>& values) {
    out << (g.dim() == 1 ? "x,value\n" : "x1,x2,value\n");
    for (int i = 0; i < g.size(); ++i) {
        const Coord x = g.point(i);
        out << csv::num(x[0]) << ",";
        if (g.dim() == 2)
            out << csv::num(x[1]) << ",";
        out << csv::num(values[std::size_t(i)]) << "\n";
    }
}

} // namespace hypnet

#pragma once

// Nets indexed by a finite epsilon grid and their asymptotic classification.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hypnet/csv.hpp"
#include "hypnet/errors.hpp"

namespace hypnet {

/// Strictly decreasing sequence of net parameters in (0, 1].
class EpsilonGrid {
public:
    EpsilonGrid() = default;

    explicit EpsilonGrid(std::vector<double> epsilons, std::string description = {})
        : eps_(std::move(epsilons)), description_(std::move(description)) {
        if (eps_.size() < 4)
            throw ArgumentError("EpsilonGrid: need at least 4 values, got " + std::to_string(eps_.size()));
        for (std::size_t k = 0; k < eps_.size(); ++k) {
            if (!(eps_[k] > 0.0 && eps_[k] <= 1.0))
                throw ArgumentError("EpsilonGrid: value out of (0,1] at index " + std::to_string(k));
            if (k > 0 && !(eps_[k] < eps_[k - 1]))
                throw ArgumentError("EpsilonGrid: values must be strictly decreasing");
        }
    }

    std::size_t size() const noexcept { return eps_.size(); }
    double operator[](std::size_t k) const { return eps_[k]; }
    const std::vector<double>& values() const noexcept { return eps_; }
    const std::string& description() const noexcept { return description_; }

    auto begin() const noexcept { return eps_.begin(); }
    auto end() const noexcept { return eps_.end(); }

private:
    std::vector<double> eps_;
    std::string description_;
};

/// eps_k = eps0 * ratio^k for k = 0..count-1.
inline EpsilonGrid make_geometric_grid(double eps0, double ratio, int count) {
    if (!(eps0 > 0.0 && eps0 <= 1.0))
        throw ArgumentError("make_geometric_grid: eps0 must lie in (0,1]");
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ArgumentError("make_geometric_grid: ratio must lie in (0,1)");
    if (count < 4)
        throw ArgumentError("make_geometric_grid: count must be >= 4");
    std::vector<double> e(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k)
        e[static_cast<std::size_t>(k)] = eps0 * std::pow(ratio, k);
    std::ostringstream d;
    d << "geometric eps0=" << eps0 << " ratio=" << ratio << " count=" << count;
    return EpsilonGrid(std::move(e), d.str());
}

/// Default sweep: eps = 2^-2 .. 2^-13 (12 points).
inline EpsilonGrid default_epsilon_grid() { return make_geometric_grid(0.25, 0.5, 12); }

/// A seminorm evaluated on every member of a net.
struct NetSample {
    EpsilonGrid grid;
    std::vector<double> values;

    NetSample() = default;
    NetSample(EpsilonGrid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
        if (values.size() != grid.size())
            throw ArgumentError("NetSample: one value per epsilon required");
        for (double x : values)
            if (!std::isfinite(x) || x < 0.0)
                throw ArgumentError("NetSample: values must be finite and nonnegative");
    }
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0; ///< root-mean-square of the residuals
};

/// Ordinary least squares y ~ slope * x + intercept.
inline LinearFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ArgumentError("least_squares_line: need >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0)
        throw ArgumentError("least_squares_line: abscissae are all equal");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        ss += r * r;
    }
    f.residual = std::sqrt(ss / n);
    return f;
}

struct PowerFit {
    double exponent = 0.0;
    double residual = 0.0;
};

/// Slope of log(value) against log(eps); value ~ eps^exponent.
inline PowerFit fit_power_law(const NetSample& s) {
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < s.values.size(); ++k) {
        if (!(s.values[k] > 0.0))
            throw DomainError("fit_power_law: zero or negative value at eps=" + std::to_string(s.grid[k]));
        lx.push_back(std::log(s.grid[k]));
        ly.push_back(std::log(s.values[k]));
    }
    const auto f = least_squares_line(lx, ly);
    return {f.slope, f.residual};
}

/// Slope of log(value) against log(1 + log(1/eps)); value ~ (1 + log 1/eps)^p.
inline PowerFit fit_log_power_law(const NetSample& s) {
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < s.values.size(); ++k) {
        if (!(s.values[k] > 0.0))
            throw DomainError("fit_log_power_law: zero or negative value at eps=" + std::to_string(s.grid[k]));
        lx.push_back(std::log(1.0 + std::log(1.0 / s.grid[k])));
        ly.push_back(std::log(s.values[k]));
    }
    const auto f = least_squares_line(lx, ly);
    return {f.slope, f.residual};
}

enum class NetKind { PowerGrowth, SlowScale, LogSlowScale, PowerDecay, Indeterminate };

inline const char* to_string(NetKind k) {
    switch (k) {
    case NetKind::PowerGrowth: return "PowerGrowth";
    case NetKind::SlowScale: return "SlowScale";
    case NetKind::LogSlowScale: return "LogSlowScale";
    case NetKind::PowerDecay: return "PowerDecay";
    case NetKind::Indeterminate: return "Indeterminate";
    }
    return "?";
}

struct AsymptoticClass {
    NetKind kind = NetKind::Indeterminate;
    int order = 0;                ///< N for PowerGrowth, q for PowerDecay
    double log_power = 0.0;       ///< p for LogSlowScale (slope in log(1 + log 1/eps))
    double fitted_exponent = 0.0; ///< slope against log(eps)
    double fit_residual = 0.0;    ///< residual of the power fit
    double log_fit_residual = 0.0;

    std::string describe() const {
        std::ostringstream o;
        o << to_string(kind);
        if (kind == NetKind::PowerGrowth || kind == NetKind::PowerDecay)
            o << "(" << order << ")";
        if (kind == NetKind::LogSlowScale)
            o << "(p=" << log_power << ")";
        o << " exponent=" << fitted_exponent << " residual=" << fit_residual;
        return o.str();
    }
};

struct ClassifierOptions {
    double growth_threshold = 0.25;   ///< tau: exponents <= -tau count as power growth
    double residual_tolerance = 0.05; ///< RMS tolerance in log units
};

/// Heuristic decision procedure over a finite grid.
///
/// Power decay is tested first, then power growth, then logarithmic slow
/// scale growth. Power growth is reported only when the log-power model does
/// not explain the data at least as well, since logarithmic growth also
/// produces negative exponents over a finite range.
inline AsymptoticClass classify_net(const NetSample& s, int decay_orders_tested, const ClassifierOptions& opt = {}) {
    if (s.values.empty())
        throw ArgumentError("classify_net: empty sample");
    const PowerFit pw = fit_power_law(s);
    const PowerFit lg = fit_log_power_law(s);

    AsymptoticClass c;
    c.fitted_exponent = pw.exponent;
    c.fit_residual = pw.residual;
    c.log_power = lg.exponent;
    c.log_fit_residual = lg.residual;

    const bool power_good = pw.residual <= opt.residual_tolerance;
    const bool log_good = lg.residual <= opt.residual_tolerance;

    if (power_good && decay_orders_tested >= 1 && pw.exponent >= 1.0 - 1e-9) {
        int q = 0;
        while (q < decay_orders_tested && pw.exponent >= (q + 1) - 1e-9)
            ++q;
        c.kind = NetKind::PowerDecay;
        c.order = q;
        return c;
    }
    if (pw.exponent <= -opt.growth_threshold && !(log_good && lg.residual < pw.residual)) {
        c.kind = NetKind::PowerGrowth;
        c.order = static_cast<int>(std::ceil(-pw.exponent - 1e-6));
        return c;
    }
    if (log_good) {
        c.kind = NetKind::LogSlowScale;
        return c;
    }
    if (pw.exponent > -opt.growth_threshold) {
        c.kind = NetKind::SlowScale;
        return c;
    }
    c.kind = NetKind::Indeterminate;
    return c;
}

/// Two-column CSV (epsilon, value) with a one-line header.
inline void write_net_csv(std::ostream& out, const NetSample& s, const std::string& value_name = "value") {
    out << "epsilon," << value_name << "\n";
    for (std::size_t k = 0; k < s.values.size(); ++k)
        out << csv::num(s.grid[k]) << "," << csv::num(s.values[k]) << "\n";
}

inline NetSample read_net_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw ArgumentError("read_net_csv: missing header");
    std::vector<double> e, v;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ArgumentError("read_net_csv: malformed row '" + line + "'");
        e.push_back(std::stod(line.substr(0, comma)));
        v.push_back(std::stod(line.substr(comma + 1)));
    }
    return NetSample(EpsilonGrid(std::move(e)), std::move(v));
}

} // namespace hypnet

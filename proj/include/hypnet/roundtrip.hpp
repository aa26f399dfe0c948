#pragma once

// Equivalence check between a higher-order equation solved directly and
// through its first-order companion reduction.

#include <algorithm>
#include <vector>

#include "hypnet/evolve.hpp"
#include "hypnet/problems.hpp"
#include "hypnet/reduction.hpp"

namespace hypnet {

struct RoundtripResult {
    double discrepancy = 0.0; ///< max over stored times of the L2 distance
    double step_size = 0.0;
    int steps = 0;
};

/// Solves L w = 0 with data (g_1..g_m) via reduce + solve and via the direct
/// system with the same step; compares w at every step. dt <= 0 selects the
/// automatic step of the companion system.
inline RoundtripResult roundtrip_solve_check(const HigherOrderOperator& op, const std::vector<SpectralField>& data,
                                             double T, double dt = 0.0) {
    const int m = op.order();
    if (int(data.size()) != m)
        throw ArgumentError("roundtrip_solve_check: need m data fields");
    const TorusGrid g = data[0].grid();
    const CompanionSystem cs = reduce(op);
    if (dt <= 0.0)
        dt = auto_step(cs.B, g, T);
    const int steps = std::max(1, int(std::ceil(T / dt - 1e-9)));
    SolveOptions opt;
    opt.dt = T / steps;

    const auto reduced = solve(CauchyProblem{cs.B, {}, cs.transform_data(data), T, 1.0}, opt);
    std::vector<cplx> v;
    for (const auto& d : data)
        v.insert(v.end(), d.physical().begin(), d.physical().end());
    const auto direct =
        solve(CauchyProblem{direct_system(op), {}, SpectralField::from_physical(g, m, std::move(v)), T, 1.0}, opt);

    RoundtripResult r;
    r.step_size = reduced.step_size;
    r.steps = reduced.steps;
    for (std::size_t k = 0; k < reduced.states.size(); ++k)
        r.discrepancy = std::max(r.discrepancy,
                                 l2_norm(cs.recover(reduced.states[k]) - direct.states[k].component(0)));
    return r;
}

} // namespace hypnet

#pragma once

#include <optional>

#include "oshe/scalar_fn.hpp"

namespace oshe {

// Outcome of integrating v' = b(v), v(0) = c.
struct OdeOutcome {
    bool blew_up = false;
    double time = 0.0;         // blow-up time, or the horizon when survived
    double v_final = 0.0;      // last finite state
    double identity_residual = 0.0; // |t - integral_c^v ds/b(s)| cross-check
    std::uint64_t n_steps = 0;
};

struct OdePolicy {
    double step_factor = 1e-3;   // dt ~ step_factor * v / b(v)
    double blowup_threshold = 1e12;
    double min_step_frac = 1e-6; // dt floor, relative to the horizon
    double max_step_frac = 1e-2; // dt cap, relative to the horizon
};

// Integrates the comparison ODE with RK4 on an adaptive grid. A threshold
// crossing only counts as blow-up when the remaining time to infinity,
// integral_{threshold}^inf ds/b(s), is finite; otherwise the solution
// provably survives every finite horizon even though the state left the
// representable range. The change-of-variables identity
// t = integral_c^{v(t)} ds/b(s) is evaluated as a residual diagnostic.
// Throws NegativeDrift if b < 0 is encountered, DomainError if c <= 0.
OdeOutcome ode_osgood_oracle(const ScalarFn& b, double c, double horizon,
                             const OdePolicy& policy = {});

} // namespace oshe

#pragma once

#include <functional>
#include <string>
#include <utility>

namespace oshe {

// U_MAX is the largest argument any ScalarFn has to accept; improper
// integrals are truncated here and completed by tail analysis.
inline constexpr double U_MAX = 1e300;

// A named scalar function on (0, U_MAX] (envelope checks also evaluate at
// negative arguments for b and sigma, which are defined on all of R).
struct ScalarFn {
    std::function<double(double)> eval;
    std::string label;
    bool has_closed_form = false; // a closed-form antiderivative exists (test catalogs)

    double operator()(double u) const { return eval(u); }
};

inline ScalarFn make_scalar_fn(std::function<double(double)> f, std::string label,
                               bool has_closed_form = false) {
    return ScalarFn{std::move(f), std::move(label), has_closed_form};
}

} // namespace oshe

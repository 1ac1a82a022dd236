#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "oshe/scalar_fn.hpp"

namespace oshe {

// Periodic lattice over [-L, L)^d with N points per axis, d in {1, 2}.
struct Lattice {
    int d = 1;
    double L = 1.0;
    int N = 8;

    double dx() const { return 2.0 * L / N; }
    std::size_t size() const {
        std::size_t s = static_cast<std::size_t>(N);
        return d == 1 ? s : s * s;
    }
    double cell_volume() const {
        double v = dx();
        return d == 1 ? v : v * v;
    }
    // Signed coordinate of axis index j.
    double coord(int j) const { return -L + j * dx(); }

    bool operator==(const Lattice&) const = default;
};

Lattice make_lattice(int d, double L, int N);

// Real-valued field on a lattice. Row-major for d = 2.
struct GridField {
    Lattice lattice;
    std::vector<double> values;
    bool exploded = false;

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }
};

GridField make_field(const Lattice& lat, double fill = 0.0);

bool all_finite(const GridField& u);

struct VpNorm {
    double p = 2.0;
    double lp_value = 0.0;
    double linf_value = 0.0;
    double vp_value = 0.0;
};

// max(Lp, Linf) with cell-volume weighted Lp sums.
// Throws ExplodedField when the field contains non-finite values.
VpNorm vp_norm(const GridField& u, double p);

// Fourier-multiplier heat semigroup exp(nu * t * Laplacian); declared here,
// implemented by the spectral engine.
GridField heat_semigroup(const GridField& u, double t, double nu);

// amplitude * (2 pi t)^(-d/2) exp(-|x|^2 / (2t)) sampled on the lattice.
GridField gaussian_profile(const Lattice& lat, double t, double amplitude);

// Pointwise g(u(x)). Propagates the exploded flag.
GridField compose(const GridField& u, const ScalarFn& g);

// sum_x u(x) w(x) dx^d. Throws ExplodedField on non-finite input.
double weighted_integral(const GridField& u, const GridField& w);

// Fraction of the |u|^p mass within N/8 cells of the domain boundary.
double boundary_mass_fraction(const GridField& u, double p);

// Deterministic pseudo-random field for tests and diagnostics: iid N(0,1)
// values scaled by `scale`, indexed by (seed, stream).
GridField random_field(const Lattice& lat, std::uint64_t seed,
                       std::uint32_t stream, double scale = 1.0);

} // namespace oshe

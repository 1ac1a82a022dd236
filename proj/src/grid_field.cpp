#include "oshe/grid_field.hpp"

#include <cmath>

#include "oshe/errors.hpp"
#include "oshe/rng.hpp"

namespace oshe {

Lattice make_lattice(int d, double L, int N) {
    if (d != 1 && d != 2)
        throw DomainError("lattice dimension must be 1 or 2, got " + std::to_string(d));
    if (!(L > 0.0))
        throw DomainError("lattice extent L must be positive");
    if (N < 8 || (N & (N - 1)) != 0)
        throw DomainError("lattice N must be a power of two >= 8, got " +
                          std::to_string(N));
    return Lattice{d, L, N};
}

GridField make_field(const Lattice& lat, double fill) {
    GridField f;
    f.lattice = lat;
    f.values.assign(lat.size(), fill);
    return f;
}

bool all_finite(const GridField& u) {
    for (double v : u.values)
        if (!std::isfinite(v))
            return false;
    return true;
}

namespace {

// |x|^p with a fast path for small integer p (the hot loop of vp_norm).
inline double pow_abs(double x, double p) {
    double a = std::abs(x);
    int ip = static_cast<int>(p);
    if (p == static_cast<double>(ip) && ip >= 1 && ip <= 16) {
        double r = 1.0;
        double base = a;
        int e = ip;
        while (e > 0) {
            if (e & 1)
                r *= base;
            base *= base;
            e >>= 1;
        }
        return r;
    }
    return std::pow(a, p);
}

} // namespace

VpNorm vp_norm(const GridField& u, double p) {
    if (!(p >= 1.0))
        throw DomainError("vp_norm: p must be >= 1");
    double sum = 0.0;
    double linf = 0.0;
    for (double v : u.values) {
        if (!std::isfinite(v))
            throw ExplodedField("vp_norm: field contains non-finite values");
        double a = std::abs(v);
        if (a > linf)
            linf = a;
        sum += pow_abs(v, p);
    }
    VpNorm n;
    n.p = p;
    n.linf_value = linf;
    n.lp_value = std::pow(sum * u.lattice.cell_volume(), 1.0 / p);
    n.vp_value = std::max(n.lp_value, n.linf_value);
    return n;
}

GridField gaussian_profile(const Lattice& lat, double t, double amplitude) {
    if (!(t > 0.0))
        throw DomainError("gaussian_profile: t must be positive");
    GridField f = make_field(lat);
    const double norm = amplitude * std::pow(2.0 * M_PI * t, -0.5 * lat.d);
    if (lat.d == 1) {
        for (int j = 0; j < lat.N; ++j) {
            double x = lat.coord(j);
            f.values[j] = norm * std::exp(-x * x / (2.0 * t));
        }
    } else {
        for (int j1 = 0; j1 < lat.N; ++j1) {
            double x1 = lat.coord(j1);
            for (int j2 = 0; j2 < lat.N; ++j2) {
                double x2 = lat.coord(j2);
                f.values[static_cast<std::size_t>(j1) * lat.N + j2] =
                    norm * std::exp(-(x1 * x1 + x2 * x2) / (2.0 * t));
            }
        }
    }
    return f;
}

GridField compose(const GridField& u, const ScalarFn& g) {
    GridField out;
    out.lattice = u.lattice;
    out.exploded = u.exploded;
    out.values.resize(u.values.size());
    for (std::size_t i = 0; i < u.values.size(); ++i)
        out.values[i] = g(u.values[i]);
    return out;
}

double weighted_integral(const GridField& u, const GridField& w) {
    if (!(u.lattice == w.lattice))
        throw DomainError("weighted_integral: lattice mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        double prod = u.values[i] * w.values[i];
        if (!std::isfinite(prod))
            throw ExplodedField("weighted_integral: non-finite product");
        sum += prod;
    }
    return sum * u.lattice.cell_volume();
}

double boundary_mass_fraction(const GridField& u, double p) {
    const Lattice& lat = u.lattice;
    const int band = lat.N / 8;
    double total = 0.0, near = 0.0;
    auto near_edge = [&](int j) { return j < band || j >= lat.N - band; };
    if (lat.d == 1) {
        for (int j = 0; j < lat.N; ++j) {
            double m = pow_abs(u.values[j], p);
            total += m;
            if (near_edge(j))
                near += m;
        }
    } else {
        for (int j1 = 0; j1 < lat.N; ++j1)
            for (int j2 = 0; j2 < lat.N; ++j2) {
                double m = pow_abs(u.values[static_cast<std::size_t>(j1) * lat.N + j2], p);
                total += m;
                if (near_edge(j1) || near_edge(j2))
                    near += m;
            }
    }
    return total > 0.0 ? near / total : 0.0;
}

GridField random_field(const Lattice& lat, std::uint64_t seed,
                       std::uint32_t stream, double scale) {
    GridField f = make_field(lat);
    for (std::size_t i = 0; i < f.values.size(); ++i)
        f.values[i] = scale * gauss_pair(seed, stream, 0, i).z0;
    return f;
}

} // namespace oshe

#include "oshe/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "oshe/errors.hpp"
#include "oshe/rng.hpp"

namespace oshe {

namespace {

std::mutex plan_mutex; // FFTW plan creation is not thread-safe

inline fftw_complex* as_fftw(std::complex<double>* p) {
    return reinterpret_cast<fftw_complex*>(p);
}

} // namespace

SpectralEngine::SpectralEngine(const Lattice& lat) : lattice_(lat) {
    const std::size_t n = lat.size();
    buf_.assign(n, {0.0, 0.0});
    k2_.assign(n, 0.0);

    const double k0 = M_PI / lat.L;
    auto signed_mode = [&](int m) { return m < lat.N / 2 ? m : m - lat.N; };
    if (lat.d == 1) {
        for (int m = 0; m < lat.N; ++m) {
            double k = k0 * signed_mode(m);
            k2_[m] = k * k;
        }
    } else {
        for (int m1 = 0; m1 < lat.N; ++m1) {
            double ka = k0 * signed_mode(m1);
            for (int m2 = 0; m2 < lat.N; ++m2) {
                double kb = k0 * signed_mode(m2);
                k2_[static_cast<std::size_t>(m1) * lat.N + m2] = ka * ka + kb * kb;
            }
        }
    }

    std::lock_guard<std::mutex> lock(plan_mutex);
    if (lat.d == 1) {
        plan_fwd_ = fftw_plan_dft_1d(lat.N, as_fftw(buf_.data()), as_fftw(buf_.data()),
                                     FFTW_FORWARD, FFTW_ESTIMATE);
        plan_bwd_ = fftw_plan_dft_1d(lat.N, as_fftw(buf_.data()), as_fftw(buf_.data()),
                                     FFTW_BACKWARD, FFTW_ESTIMATE);
    } else {
        plan_fwd_ = fftw_plan_dft_2d(lat.N, lat.N, as_fftw(buf_.data()),
                                     as_fftw(buf_.data()), FFTW_FORWARD, FFTW_ESTIMATE);
        plan_bwd_ = fftw_plan_dft_2d(lat.N, lat.N, as_fftw(buf_.data()),
                                     as_fftw(buf_.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
    }
}

SpectralEngine::~SpectralEngine() {
    std::lock_guard<std::mutex> lock(plan_mutex);
    if (plan_fwd_)
        fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_bwd_)
        fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void SpectralEngine::forward(const std::vector<double>& in) {
    for (std::size_t i = 0; i < in.size(); ++i)
        buf_[i] = {in[i], 0.0};
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
}

void SpectralEngine::backward_to(std::vector<double>& out) {
    fftw_execute(static_cast<fftw_plan>(plan_bwd_));
    const double inv_n = 1.0 / static_cast<double>(buf_.size());
    double scale = 0.0;
    double imag_max = 0.0;
    out.resize(buf_.size());
    for (std::size_t i = 0; i < buf_.size(); ++i) {
        out[i] = buf_[i].real() * inv_n;
        double a = std::abs(out[i]);
        if (a > scale)
            scale = a;
        double im = std::abs(buf_[i].imag()) * inv_n;
        if (im > imag_max)
            imag_max = im;
    }
    if (scale > 0.0)
        max_imag_residue_ = std::max(max_imag_residue_, imag_max / scale);
}

GridField SpectralEngine::semigroup(const GridField& u, double t, double nu) {
    GridField out = u;
    semigroup_inplace(out, t, nu);
    return out;
}

void SpectralEngine::semigroup_inplace(GridField& u, double t, double nu) {
    if (!(t >= 0.0))
        throw DomainError("heat_semigroup: t must be nonnegative");
    if (t == 0.0)
        return;
    if (!(u.lattice == lattice_))
        throw DomainError("heat_semigroup: lattice mismatch");

    bool nonneg = true;
    for (double v : u.values)
        if (v < 0.0) {
            nonneg = false;
            break;
        }

    forward(u.values);
    for (std::size_t q = 0; q < buf_.size(); ++q)
        buf_[q] *= std::exp(-nu * k2_[q] * t);
    backward_to(u.values);

    if (nonneg) {
        // The multiplier preserves positivity up to spectral ringing; clamp
        // the sub-roundoff undershoot so downstream positivity checks see it.
        double scale = 0.0;
        for (double v : u.values)
            scale = std::max(scale, std::abs(v));
        const double floor = -1e-12 * scale;
        for (double& v : u.values)
            if (v < 0.0 && v >= floor) {
                clamp_magnitude_ = std::max(clamp_magnitude_, -v);
                ++clamp_count_;
                v = 0.0;
            }
    }
}

GridField SpectralEngine::synthesize(const std::vector<double>& weights, double dt,
                                     std::uint64_t seed, std::uint32_t stream,
                                     std::uint32_t step) {
    if (weights.size() != buf_.size())
        throw DomainError("synthesize: weight table size mismatch");

    const Lattice& lat = lattice_;
    const double vol = std::pow(2.0 * lat.L, lat.d);
    const int N = lat.N;

    auto mirror_of = [&](std::size_t q) -> std::size_t {
        if (lat.d == 1) {
            int m = static_cast<int>(q);
            return static_cast<std::size_t>((N - m) % N);
        }
        int m1 = static_cast<int>(q) / N;
        int m2 = static_cast<int>(q) % N;
        return static_cast<std::size_t>((N - m1) % N) * N +
               static_cast<std::size_t>((N - m2) % N);
    };

    // backward_to divides by N^d, so fold that factor into the amplitudes:
    // the target field is the *unnormalized* mode sum, whose covariance is
    // dt times the periodized correlation function.
    const double mode_scale = static_cast<double>(lat.size());
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t q = 0; q < buf_.size(); ++q) {
        std::size_t qm = mirror_of(q);
        if (q > qm)
            continue; // filled by the conjugate of its mirror
        double amp = mode_scale * std::sqrt(std::max(weights[q], 0.0) * dt / vol);
        GaussPair g = gauss_pair(seed, stream, step, q);
        if (q == qm) {
            buf_[q] = {amp * g.z0, 0.0};
        } else {
            std::complex<double> z{amp * g.z0 * inv_sqrt2, amp * g.z1 * inv_sqrt2};
            buf_[q] = z;
            buf_[qm] = std::conj(z);
        }
    }

    GridField out = make_field(lat);
    backward_to(out.values);
    return out;
}

GridField heat_semigroup(const GridField& u, double t, double nu) {
    return shared_engine(u.lattice).semigroup(u, t, nu);
}

SpectralEngine& shared_engine(const Lattice& lat) {
    thread_local std::map<std::tuple<int, double, int>, SpectralEngine> cache;
    auto key = std::make_tuple(lat.d, lat.L, lat.N);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.try_emplace(key, lat).first;
    return it->second;
}

} // namespace oshe

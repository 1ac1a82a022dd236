#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "oshe/grid_field.hpp"

namespace oshe {

// FFT workspace bound to one lattice. Owns FFTW plans and scratch buffers;
// one instance per worker thread (plan creation is internally serialized,
// execution is not shared). All transforms are complex-to-complex with the
// inverse carrying the 1/N^d normalization.
class SpectralEngine {
public:
    explicit SpectralEngine(const Lattice& lat);
    ~SpectralEngine();

    SpectralEngine(const SpectralEngine&) = delete;
    SpectralEngine& operator=(const SpectralEngine&) = delete;

    const Lattice& lattice() const { return lattice_; }

    // exp(-nu |k|^2 t) applied mode-wise; t = 0 returns the input unchanged.
    // Nonnegative inputs have ringing in [-1e-12 * scale, 0) clamped to 0.
    GridField semigroup(const GridField& u, double t, double nu);

    // In-place variant for the solver hot loop.
    void semigroup_inplace(GridField& u, double t, double nu);

    // Gaussian field with spectral weights: Cov = dt * f_L(x - y), where the
    // mode coefficients are sqrt(dt * weight_m / (2L)^d) * zeta_m with
    // Hermitian complex unit Gaussians zeta indexed by (seed, stream, step).
    GridField synthesize(const std::vector<double>& weights, double dt,
                         std::uint64_t seed, std::uint32_t stream,
                         std::uint32_t step);

    // |k|^2 of linear mode index q.
    double mode_k2(std::size_t q) const { return k2_[q]; }

    // Largest |imag| residue seen in any inverse transform, relative to the
    // field scale; stays at rounding level when Hermitian symmetry holds.
    double max_imag_residue() const { return max_imag_residue_; }

    // Clamp bookkeeping for the positivity guard.
    std::uint64_t clamp_count() const { return clamp_count_; }
    double clamp_magnitude() const { return clamp_magnitude_; }
    // Returns the max clamp magnitude since the last call and resets it, so
    // sequential path runs on one engine can log per-path values.
    double take_clamp_magnitude() {
        double m = clamp_magnitude_;
        clamp_magnitude_ = 0.0;
        return m;
    }

private:
    void forward(const std::vector<double>& in);
    void backward_to(std::vector<double>& out);

    Lattice lattice_;
    std::vector<double> k2_;
    std::vector<std::complex<double>> buf_;
    void* plan_fwd_ = nullptr;
    void* plan_bwd_ = nullptr;
    double max_imag_residue_ = 0.0;
    std::uint64_t clamp_count_ = 0;
    double clamp_magnitude_ = 0.0;
};

// Cached per-thread engine lookup; backs the free-function heat_semigroup.
SpectralEngine& shared_engine(const Lattice& lat);

} // namespace oshe

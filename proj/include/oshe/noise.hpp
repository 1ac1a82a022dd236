#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oshe/conditions.hpp"
#include "oshe/fft.hpp"
#include "oshe/grid_field.hpp"

namespace oshe {

// Space-time noise model: white in time, and in space either exactly white
// (d = 1 only) or colored with an isotropic spectral density.
struct NoiseModel {
    bool white = true;
    NoiseSpectrum spectrum; // density used when white == false; alpha always set
    std::string label = "white";
};

struct SpectralWeights {
    Lattice lattice;
    std::vector<double> weights; // f_hat(|k|) per linear mode index
    bool white_flag = false;
};

struct SeedPath {
    std::uint64_t seed = 0;
    std::uint32_t stream = 0; // path id
    std::uint32_t step = 0;   // time-step index
};

struct NoiseIncrement {
    GridField field;
    double dt = 0.0;
    SeedPath seed_path;
};

// Tabulate f_hat at the lattice wavenumbers. White noise keeps weights == 1
// and sets white_flag so sampling uses iid cell increments instead of
// spectral synthesis. Densities singular at zero (Riesz) are regularized by
// evaluating at pi/(L*N).
// Throws DimensionError for white noise with d > 1.
SpectralWeights build_spectrum(const NoiseModel& model, const Lattice& lat);

// One Gaussian increment with covariance dt * f_L(x-y).
NoiseIncrement sample_increment(const SpectralWeights& spec, double dt,
                                const SeedPath& rng, SpectralEngine& engine);

// Convenience overload using the per-thread engine cache.
NoiseIncrement sample_increment(const SpectralWeights& spec, double dt,
                                const SeedPath& rng);

struct CovarianceProfile {
    std::vector<int> lags;        // in cells
    std::vector<double> c;        // empirical Cov(field(x), field(x+r)) / dt
    std::vector<double> se;       // standard error per lag
    double temporal_corr = 0.0;   // lag-1 correlation between increments
    double temporal_se = 0.0;
    double dt = 0.0;
    double dx = 0.0;
    std::size_t n_samples = 0;
};

// Averaged covariance profile over axis-aligned lags.
// Throws InsufficientSamples when fewer than 100 increments are given.
CovarianceProfile empirical_covariance(const std::vector<NoiseIncrement>& samples,
                                       int max_lag);

} // namespace oshe

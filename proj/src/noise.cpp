#include "oshe/noise.hpp"

#include <cmath>

#include "oshe/errors.hpp"
#include "oshe/rng.hpp"

namespace oshe {

SpectralWeights build_spectrum(const NoiseModel& model, const Lattice& lat) {
    SpectralWeights sw;
    sw.lattice = lat;
    sw.weights.assign(lat.size(), 1.0);

    if (model.white) {
        if (lat.d > 1)
            throw DimensionError(
                "space-time white noise has no function-valued solution for d >= 2");
        sw.white_flag = true;
        return sw;
    }

    const double k0 = M_PI / lat.L;
    const double k_floor = M_PI / (lat.L * lat.N); // zero-mode regularization point
    auto signed_mode = [&](int m) { return m < lat.N / 2 ? m : m - lat.N; };
    auto eval = [&](double kmag) {
        double w = model.spectrum.density(kmag);
        if (!std::isfinite(w))
            w = model.spectrum.density(k_floor);
        if (!(w >= 0.0))
            throw DomainError("build_spectrum: density negative at |k| = " +
                              std::to_string(kmag));
        return w;
    };

    if (lat.d == 1) {
        for (int m = 0; m < lat.N; ++m)
            sw.weights[m] = eval(std::abs(k0 * signed_mode(m)));
    } else {
        for (int m1 = 0; m1 < lat.N; ++m1)
            for (int m2 = 0; m2 < lat.N; ++m2) {
                double ka = k0 * signed_mode(m1);
                double kb = k0 * signed_mode(m2);
                sw.weights[static_cast<std::size_t>(m1) * lat.N + m2] =
                    eval(std::hypot(ka, kb));
            }
    }
    return sw;
}

NoiseIncrement sample_increment(const SpectralWeights& spec, double dt,
                                const SeedPath& rng, SpectralEngine& engine) {
    if (!(dt > 0.0))
        throw DomainError("sample_increment: dt must be positive");

    NoiseIncrement inc;
    inc.dt = dt;
    inc.seed_path = rng;

    if (spec.white_flag) {
        inc.field = make_field(spec.lattice);
        const double sd = std::sqrt(dt / spec.lattice.cell_volume());
        for (std::size_t i = 0; i < inc.field.size(); ++i)
            inc.field[i] = sd * gauss_pair(rng.seed, rng.stream, rng.step, i).z0;
        return inc;
    }
    inc.field = engine.synthesize(spec.weights, dt, rng.seed, rng.stream, rng.step);
    return inc;
}

NoiseIncrement sample_increment(const SpectralWeights& spec, double dt,
                                const SeedPath& rng) {
    return sample_increment(spec, dt, rng, shared_engine(spec.lattice));
}

CovarianceProfile empirical_covariance(const std::vector<NoiseIncrement>& samples,
                                       int max_lag) {
    if (samples.size() < 100)
        throw InsufficientSamples("empirical_covariance: need >= 100 samples, got " +
                                  std::to_string(samples.size()));
    const Lattice lat = samples.front().field.lattice;
    const double dt = samples.front().dt;
    for (const auto& s : samples)
        if (!(s.field.lattice == lat) || s.dt != dt)
            throw DomainError("empirical_covariance: mixed lattice or dt");

    CovarianceProfile prof;
    prof.dt = dt;
    prof.dx = lat.dx();
    prof.n_samples = samples.size();

    const int n_lag = max_lag + 1;
    prof.lags.resize(n_lag);
    prof.c.assign(n_lag, 0.0);
    prof.se.assign(n_lag, 0.0);

    // Per-sample spatial means are iid across increments; their spread gives
    // the standard error without assuming independence across x.
    std::vector<std::vector<double>> per_sample(n_lag);
    for (auto& v : per_sample)
        v.reserve(samples.size());

    const int N = lat.N;
    for (const auto& s : samples) {
        const auto& f = s.field.values;
        for (int r = 0; r < n_lag; ++r) {
            double acc = 0.0;
            std::size_t count = 0;
            if (lat.d == 1) {
                for (int j = 0; j < N; ++j)
                    acc += f[j] * f[(j + r) % N];
                count = N;
            } else {
                for (int j1 = 0; j1 < N; ++j1)
                    for (int j2 = 0; j2 < N; ++j2) {
                        std::size_t q = static_cast<std::size_t>(j1) * N + j2;
                        acc += f[q] * f[static_cast<std::size_t>(j1) * N + (j2 + r) % N];
                        acc += f[q] * f[static_cast<std::size_t>((j1 + r) % N) * N + j2];
                    }
                count = 2ull * N * N;
            }
            per_sample[r].push_back(acc / (count * dt));
        }
    }

    for (int r = 0; r < n_lag; ++r) {
        prof.lags[r] = r;
        double mean = 0.0;
        for (double v : per_sample[r])
            mean += v;
        mean /= per_sample[r].size();
        double var = 0.0;
        for (double v : per_sample[r])
            var += (v - mean) * (v - mean);
        var /= (per_sample[r].size() - 1);
        prof.c[r] = mean;
        prof.se[r] = std::sqrt(var / per_sample[r].size());
    }

    // Lag-1 temporal cross-correlation between consecutive increments.
    std::vector<double> cross;
    cross.reserve(samples.size() - 1);
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const auto& a = samples[i].field.values;
        const auto& b = samples[i + 1].field.values;
        double acc = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j)
            acc += a[j] * b[j];
        cross.push_back(acc / (a.size() * dt));
    }
    double mean = 0.0;
    for (double v : cross)
        mean += v;
    mean /= cross.size();
    double var = 0.0;
    for (double v : cross)
        var += (v - mean) * (v - mean);
    var /= (cross.size() - 1);
    const double c0 = prof.c[0] != 0.0 ? prof.c[0] : 1.0;
    prof.temporal_corr = mean / c0;
    prof.temporal_se = std::sqrt(var / cross.size()) / std::abs(c0);
    return prof;
}

} // namespace oshe

#include "oshe/catalog.hpp"

#include <cmath>

#include "oshe/errors.hpp"

namespace oshe {

namespace {

struct NameParam {
    std::string name;
    std::optional<double> param;
};

NameParam split_name(const std::string& full) {
    auto pos = full.find(':');
    if (pos == std::string::npos)
        return {full, std::nullopt};
    std::string head = full.substr(0, pos);
    std::string tail = full.substr(pos + 1);
    try {
        size_t used = 0;
        double v = std::stod(tail, &used);
        if (used != tail.size())
            throw std::invalid_argument(tail);
        return {head, v};
    } catch (const std::exception&) {
        throw ConfigError("catalog: bad parameter '" + tail + "' in '" + full + "'");
    }
}

double sgn(double u) { return u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0); }

} // namespace

ScalarFn catalog_h(const std::string& full, double alpha) {
    auto [name, param] = split_name(full);
    if (name == "h.ulogu") {
        double c = param.value_or(std::exp(1.0 / alpha));
        return make_scalar_fn(
            [c](double u) { return c * u * std::max(std::log(u), 1.0); }, full, true);
    }
    if (name == "h.repeated_log") {
        int K = static_cast<int>(param.value_or(1));
        return repeated_log_family(K, alpha).h;
    }
    if (name == "h.power") {
        double p = param.value_or(2.0);
        return make_scalar_fn([p](double u) { return std::pow(u, p); }, full, true);
    }
    throw ConfigError("catalog: unknown h function '" + full + "'");
}

ScalarFn catalog_b(const std::string& full) {
    auto [name, param] = split_name(full);
    if (name == "b.zero")
        return make_scalar_fn([](double) { return 0.0; }, full);
    if (name == "b.linear") {
        double L = param.value_or(1.0);
        return make_scalar_fn([L](double u) { return L * u; }, full);
    }
    if (name == "b.power") {
        double p = param.value_or(2.0);
        return make_scalar_fn(
            [p](double u) { return std::pow(std::abs(u), p); }, full, true);
    }
    if (name == "b.uloge") {
        double s = param.value_or(1.0);
        return make_scalar_fn(
            [s](double u) { return s * u * std::log(M_E + std::abs(u)); }, full);
    }
    throw ConfigError("catalog: unknown b function '" + full + "'");
}

ScalarFn catalog_sigma(const std::string& full, const ScalarFn& h, double alpha) {
    auto [name, param] = split_name(full);
    if (name == "sigma.zero")
        return make_scalar_fn([](double) { return 0.0; }, full);
    if (name == "sigma.linear") {
        double L = param.value_or(1.0);
        return make_scalar_fn([L](double u) { return L * u; }, full);
    }
    if (name == "sigma.const") {
        double c = param.value_or(1.0);
        return make_scalar_fn([c](double) { return c; }, full);
    }
    if (name == "sigma.bounded") {
        double K = param.value_or(1.0);
        return make_scalar_fn(
            [K](double u) { return std::min(std::abs(u), K); }, full);
    }
    if (name == "sigma.envelope") {
        double r = param.value_or(1.0);
        ScalarFn h_copy = h;
        double a = alpha;
        return make_scalar_fn(
            [r, h_copy, a](double u) {
                return r * sigma_envelope_value(h_copy, a, u) * sgn(u);
            },
            full);
    }
    if (name == "sigma.repeated_log_bound") {
        int K = static_cast<int>(param.value_or(1));
        return repeated_log_family(K, alpha).sigma_bound;
    }
    throw ConfigError("catalog: unknown sigma function '" + full + "'");
}

std::optional<double> catalog_sigma_bound(const std::string& full) {
    auto [name, param] = split_name(full);
    if (name == "sigma.zero")
        return 0.0;
    if (name == "sigma.const")
        return std::abs(param.value_or(1.0));
    if (name == "sigma.bounded")
        return std::abs(param.value_or(1.0));
    return std::nullopt;
}

bool catalog_b_is_monotone_convex(const std::string& full) {
    auto [name, param] = split_name(full);
    if (name == "b.zero")
        return true;
    if (name == "b.power")
        return param.value_or(2.0) >= 1.0;
    if (name == "b.linear")
        return param.value_or(1.0) >= 0.0;
    return false;
}

NoiseSpectrum catalog_density(const std::string& full, double alpha, int dimension) {
    auto [name, param] = split_name(full);
    NoiseSpectrum spec;
    spec.alpha = alpha;
    spec.dimension = dimension;
    spec.label = full;
    if (name == "fhat.white") {
        spec.density = [](double) { return 1.0; };
        return spec;
    }
    if (name == "fhat.gaussian") {
        double l = param.value_or(1.0);
        spec.density = [l](double k) { return std::exp(-k * k * l * l); };
        return spec;
    }
    if (name == "fhat.riesz") {
        double beta = param.value_or(0.5);
        if (!(beta > 0.0) || beta >= dimension)
            throw ConfigError("catalog: fhat.riesz needs 0 < beta < d");
        double expo = beta - dimension;
        spec.density = [expo](double k) { return std::pow(k, expo); };
        return spec;
    }
    throw ConfigError("catalog: unknown spectral density '" + full + "'");
}

NonlinearitySpec resolve_nonlinearity(const std::string& b_name,
                                      const std::string& sigma_name,
                                      const std::string& h_name, double alpha) {
    NonlinearitySpec spec;
    spec.alpha = alpha;
    spec.h = catalog_h(h_name, alpha);
    spec.b = catalog_b(b_name);
    spec.sigma = catalog_sigma(sigma_name, spec.h, alpha);
    spec.sigma_sup = catalog_sigma_bound(sigma_name);
    spec.b_nondecreasing_convex = catalog_b_is_monotone_convex(b_name);
    return spec;
}

} // namespace oshe

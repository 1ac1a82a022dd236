#pragma once

#include <cstddef>
#include <vector>

namespace oshe {

struct WilsonInterval {
    double estimate = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double half_width() const { return 0.5 * (hi - lo); }
};

// 95% Wilson score interval for a binomial proportion.
WilsonInterval wilson_interval(std::size_t successes, std::size_t n);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t n = 0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

MeanSe mean_se(const std::vector<double>& xs);

} // namespace oshe

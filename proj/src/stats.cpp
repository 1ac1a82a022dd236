#include "oshe/stats.hpp"

#include <cmath>

namespace oshe {

WilsonInterval wilson_interval(std::size_t successes, std::size_t n) {
    WilsonInterval w;
    if (n == 0)
        return w;
    const double z = 1.959963984540054; // 97.5% normal quantile
    const double z2 = z * z;
    const double p = static_cast<double>(successes) / n;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half =
        z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    w.estimate = p;
    w.lo = std::max(0.0, center - half);
    w.hi = std::min(1.0, center + half);
    return w;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    LinearFit fit;
    fit.n = x.size();
    if (x.size() < 2 || x.size() != y.size())
        return fit;
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / x.size();
    const double my = sy / y.size();
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

MeanSe mean_se(const std::vector<double>& xs) {
    MeanSe m;
    m.n = xs.size();
    if (xs.empty())
        return m;
    double sum = 0.0;
    for (double v : xs)
        sum += v;
    m.mean = sum / xs.size();
    if (xs.size() < 2)
        return m;
    double var = 0.0;
    for (double v : xs)
        var += (v - m.mean) * (v - m.mean);
    var /= (xs.size() - 1);
    m.se = std::sqrt(var / xs.size());
    return m;
}

} // namespace oshe

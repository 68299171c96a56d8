#include "botmosaic/stats.hpp"

#include "botmosaic/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace botmosaic::stats {

double normal_cdf(double x, double mean, double sigma) {
    if (sigma == 0.0) return x < mean ? 0.0 : (x > mean ? 1.0 : 0.5);
    return 0.5 * std::erfc(-(x - mean) / (sigma * std::sqrt(2.0)));
}

double normal_sf(double x, double mean, double sigma) {
    if (sigma == 0.0) return x > mean ? 0.0 : (x < mean ? 1.0 : 0.5);
    return 0.5 * std::erfc((x - mean) / (sigma * std::sqrt(2.0)));
}

double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double ks_distance(std::span<const double> samples) {
    if (samples.size() < 10) throw ParameterError("ks_distance needs at least 10 samples");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double m = mean(sorted);
    const double s = stddev(sorted);
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = normal_cdf(sorted[i], m, s);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

} // namespace botmosaic::stats

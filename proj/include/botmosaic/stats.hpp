#pragma once

#include <span>

namespace botmosaic::stats {

double normal_cdf(double x, double mean = 0.0, double sigma = 1.0);
/// Upper tail P(X >= x) of N(mean, sigma), accurate far into the tail.
double normal_sf(double x, double mean = 0.0, double sigma = 1.0);

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1 denominator).
double stddev(std::span<const double> xs);

/// Sup distance between the empirical CDF of `samples` and the normal fitted
/// by sample mean/std. Throws ParameterError below 10 samples.
double ks_distance(std::span<const double> samples);

} // namespace botmosaic::stats

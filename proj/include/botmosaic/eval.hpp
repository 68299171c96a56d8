#pragma once

#include "botmosaic/botnet.hpp"
#include "botmosaic/channel.hpp"
#include "botmosaic/config.hpp"
#include "botmosaic/watermark.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace botmosaic {

struct TrialResult {
    int n_c_true = 0;
    int n_c_false = 0;

    friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

/// One watermarked mixture and its unwatermarked twin, both pushed through
/// the channel and scored after synchronization. Background commands start
/// `response_delay_hi` seconds before the watermark epoch so the chaff is
/// stationary over the whole span.
TrialResult run_trial(const WatermarkParams& params, const BotnetConfig& botnet,
                      const ChannelModel& channel, std::uint64_t seed);

/// Trial k uses seed derive_seed(master_seed, k). Runs on `threads` workers
/// (0 = hardware concurrency); results are ordered by trial index.
std::vector<TrialResult> run_trials(const WatermarkParams& params, const BotnetConfig& botnet,
                                    const ChannelModel& channel, int trials,
                                    std::uint64_t master_seed, unsigned threads = 0);

struct CoerReport {
    double mu_true = 0.0;
    double sigma_true = 0.0;
    double mu_false = 0.0;
    double sigma_false = 0.0;
    double theta_hat = 0.0;
    double coer = 0.0;  // extrapolated from the fitted normals
    int trials = 0;
    double ks_true = 0.0;   // NaN when fewer than 10 samples
    double ks_false = 0.0;
};

/// Fits normals by moments and bisects for the threshold where the true
/// lower tail equals the false upper tail.
CoerReport estimate_coer(std::span<const double> samples_true, std::span<const double> samples_false);
CoerReport estimate_coer(std::span<const TrialResult> trials);

/// Crossover of two normals by bisection on [min(mu), max(mu)] to 1e-6.
double crossover_threshold(double mu_true, double sigma_true, double mu_false, double sigma_false);

std::string format_report(const CoerReport& report);

struct SweepGrid {
    std::vector<int> l;
    std::vector<double> T;
    std::vector<double> r_over_b;
};

struct SweepRow {
    int l = 0;
    double T = 0.0;
    double r_over_b = 0.0;
    std::optional<CoerReport> report;  // empty for infeasible points
    std::string error;
    std::vector<TrialResult> samples;
};

/// Cartesian sweep; R = round(r_over_b * bots). Infeasible points are flagged
/// and skipped. Grid point g uses master seed derive_seed(seed, g).
std::vector<SweepRow> sweep(const ExperimentConfig& base, const SweepGrid& grid, int trials,
                            std::uint64_t seed);

/// CSV with header `l,T,R_over_B,mu_true,mu_false,theta_hat,coer,trials`.
std::string format_sweep_csv(std::span<const SweepRow> rows);

/// One-sided bootstrap test of H0 "later point's COER is no worse than the
/// earlier point's". Returns the p-value of observing the later point's
/// separation this far below the earlier one's; reject when p < alpha.
double coer_worsening_pvalue(std::span<const TrialResult> earlier, std::span<const TrialResult> later,
                             std::uint64_t seed, int resamples = 2000);

struct BenchResult {
    int flows = 0;
    int l = 0;
    double mean_us = 0.0;       // wall-clock per flow, synchronization included
    double cv = 0.0;            // coefficient of variation of per-flow time
    std::size_t state_bytes = 0;
};

/// Times detection over `flows` synthetic watermarked-plus-chaff flows.
/// With `identical`, one flow is generated and detected repeatedly.
BenchResult bench_detector(int flows, int l, std::uint64_t seed, bool identical = false);

} // namespace botmosaic

#include "botmosaic/eval.hpp"

#include "botmosaic/detector.hpp"
#include "botmosaic/error.hpp"
#include "botmosaic/rng.hpp"
#include "botmosaic/stats.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <thread>

namespace botmosaic {

namespace {

template <typename Fn>
void parallel_for(int n, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max(n, 1)));
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) fn(i);
        });
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

double separation(std::span<const double> t, std::span<const double> f) {
    const double spread = stats::stddev(t) + stats::stddev(f);
    const double gap = stats::mean(t) - stats::mean(f);
    if (spread == 0.0) return gap > 0 ? std::numeric_limits<double>::infinity()
                                      : (gap < 0 ? -std::numeric_limits<double>::infinity() : 0.0);
    return gap / spread;
}

void split(std::span<const TrialResult> trials, std::vector<double>& t, std::vector<double>& f) {
    t.clear();
    f.clear();
    for (const auto& r : trials) {
        t.push_back(r.n_c_true);
        f.push_back(r.n_c_false);
    }
}

} // namespace

TrialResult run_trial(const WatermarkParams& params, const BotnetConfig& botnet, const ChannelModel& channel,
                      std::uint64_t seed) {
    params.validate();
    channel.validate();
    const double epoch = botnet.response_delay_hi;
    const auto key = generate_key(derive_seed(seed, 0), params.l, params.T, epoch);

    auto flows = insert_watermark(key, params, derive_seed(seed, 1));

    BotnetConfig bn = botnet;
    bn.cap_interval = params.T;
    if (bn.duration <= 0.0) bn.duration = epoch + key.span();
    const auto background = simulate_background(bn, derive_seed(seed, 2));
    flows.push_back(background);

    const auto mixture = mix(flows, "mixture");
    const auto observed_true = apply_channel(mixture, channel, derive_seed(seed, 3));
    const auto observed_false = apply_channel(background, channel, derive_seed(seed, 3));

    Detector det(key, params.eta, 1);
    return {det.synchronize(observed_true.timestamps).n_c, det.synchronize(observed_false.timestamps).n_c};
}

std::vector<TrialResult> run_trials(const WatermarkParams& params, const BotnetConfig& botnet,
                                    const ChannelModel& channel, int trials, std::uint64_t master_seed,
                                    unsigned threads) {
    params.validate();
    std::vector<TrialResult> out(static_cast<std::size_t>(std::max(trials, 0)));
    parallel_for(trials, threads, [&](int k) {
        out[static_cast<std::size_t>(k)] = run_trial(params, botnet, channel, derive_seed(master_seed, static_cast<std::uint64_t>(k)));
    });
    return out;
}

double crossover_threshold(double mu_true, double sigma_true, double mu_false, double sigma_false) {
    if (!(sigma_true > 0.0) || !(sigma_false > 0.0)) throw ParameterError("crossover needs positive sigmas");
    // The two tails are equal exactly where the standardized distances agree;
    // bisecting on that difference avoids comparing underflowed tail masses.
    auto excess = [&](double theta) { return (theta - mu_true) / sigma_true + (theta - mu_false) / sigma_false; };
    double lo = std::min(mu_true, mu_false);
    double hi = std::max(mu_true, mu_false);
    for (int it = 0; it < 200 && hi - lo > 1e-6; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (excess(mid) < 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

CoerReport estimate_coer(std::span<const double> samples_true, std::span<const double> samples_false) {
    if (samples_true.size() < 2 || samples_false.size() < 2)
        throw ParameterError("estimate_coer needs at least 2 samples per class");
    CoerReport r;
    r.trials = static_cast<int>(std::min(samples_true.size(), samples_false.size()));
    r.mu_true = stats::mean(samples_true);
    r.sigma_true = stats::stddev(samples_true);
    r.mu_false = stats::mean(samples_false);
    r.sigma_false = stats::stddev(samples_false);
    r.ks_true = samples_true.size() >= 10 ? stats::ks_distance(samples_true) : std::nan("");
    r.ks_false = samples_false.size() >= 10 ? stats::ks_distance(samples_false) : std::nan("");

    if (r.sigma_true == 0.0 || r.sigma_false == 0.0) {
        const double min_true = *std::min_element(samples_true.begin(), samples_true.end());
        const double max_false = *std::max_element(samples_false.begin(), samples_false.end());
        if (!(min_true > max_false))
            throw Error("degenerate samples (zero variance) with overlapping supports; COER undefined");
        r.theta_hat = 0.5 * (min_true + max_false);
        r.coer = 0.0;
        return r;
    }
    r.theta_hat = crossover_threshold(r.mu_true, r.sigma_true, r.mu_false, r.sigma_false);
    r.coer = stats::normal_cdf(r.theta_hat, r.mu_true, r.sigma_true);
    return r;
}

CoerReport estimate_coer(std::span<const TrialResult> trials) {
    std::vector<double> t, f;
    split(trials, t, f);
    return estimate_coer(t, f);
}

std::string format_report(const CoerReport& r) {
    std::string out;
    out += "trials " + std::to_string(r.trials) + "\n";
    out += "mu_true " + fmt("%.6f", r.mu_true) + "\n";
    out += "sigma_true " + fmt("%.6f", r.sigma_true) + "\n";
    out += "mu_false " + fmt("%.6f", r.mu_false) + "\n";
    out += "sigma_false " + fmt("%.6f", r.sigma_false) + "\n";
    out += "theta_hat " + fmt("%.6f", r.theta_hat) + "\n";
    out += "coer " + fmt("%.6e", r.coer) + " (extrapolated)\n";
    out += "ks_true " + fmt("%.6f", r.ks_true) + "\n";
    out += "ks_false " + fmt("%.6f", r.ks_false) + "\n";
    return out;
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, const SweepGrid& grid, int trials, std::uint64_t seed) {
    std::vector<SweepRow> rows;
    std::uint64_t g = 0;
    for (int l : grid.l) {
        for (double T : grid.T) {
            for (double ratio : grid.r_over_b) {
                SweepRow row;
                row.l = l;
                row.T = T;
                row.r_over_b = ratio;
                WatermarkParams params = base.watermark;
                params.l = l;
                params.T = T;
                params.R = static_cast<int>(std::lround(ratio * base.botnet.bots));
                const auto point_seed = derive_seed(seed, g++);
                try {
                    row.samples = run_trials(params, base.botnet, base.channel, trials, point_seed);
                    row.report = estimate_coer(row.samples);
                } catch (const Error& e) {
                    row.error = e.what();
                }
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

std::string format_sweep_csv(std::span<const SweepRow> rows) {
    std::string out = "l,T,R_over_B,mu_true,mu_false,theta_hat,coer,trials\n";
    for (const auto& row : rows) {
        out += std::to_string(row.l) + "," + fmt("%g", row.T) + "," + fmt("%g", row.r_over_b) + ",";
        if (row.report) {
            const auto& r = *row.report;
            out += fmt("%.6f", r.mu_true) + "," + fmt("%.6f", r.mu_false) + "," + fmt("%.6f", r.theta_hat) + "," +
                   fmt("%.6e", r.coer) + "," + std::to_string(r.trials) + "\n";
        } else {
            out += "NA,NA,NA,NA,0\n";
        }
    }
    return out;
}

double coer_worsening_pvalue(std::span<const TrialResult> earlier, std::span<const TrialResult> later,
                             std::uint64_t seed, int resamples) {
    if (earlier.size() < 2 || later.size() < 2) throw ParameterError("bootstrap needs at least 2 trials per point");
    std::vector<double> et, ef, lt, lf;
    split(earlier, et, ef);
    split(later, lt, lf);

    auto rng = make_rng(seed);
    auto resample = [&rng](const std::vector<double>& xs, std::vector<double>& out) {
        std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
        out.resize(xs.size());
        for (auto& x : out) x = xs[pick(rng)];
    };
    std::vector<double> a, b, c, d;
    int not_worse = 0;
    for (int k = 0; k < resamples; ++k) {
        resample(et, a);
        resample(ef, b);
        resample(lt, c);
        resample(lf, d);
        if (separation(c, d) >= separation(a, b)) ++not_worse;
    }
    return static_cast<double>(not_worse) / resamples;
}

BenchResult bench_detector(int flows, int l, std::uint64_t seed, bool identical) {
    if (flows < 1) throw ParameterError("flows must be positive");
    WatermarkParams params;
    params.l = l;
    params.validate();
    const double epoch = 1.0;
    const auto key = generate_key(derive_seed(seed, 0), l, params.T, epoch);

    BotnetConfig bn;
    bn.cap_interval = params.T;
    bn.duration = epoch + key.span();
    const ChannelModel channel;

    auto make_flow = [&](std::uint64_t s) {
        auto parts = insert_watermark(key, params, derive_seed(s, 0));
        parts.push_back(simulate_background(bn, derive_seed(s, 1)));
        return apply_channel(mix(parts, "flow"), channel, derive_seed(s, 2));
    };

    std::vector<FlowTrace> corpus;
    if (identical) corpus.push_back(make_flow(derive_seed(seed, 1)));
    else {
        corpus.resize(static_cast<std::size_t>(flows));
        parallel_for(flows, 0, [&](int i) {
            corpus[static_cast<std::size_t>(i)] = make_flow(derive_seed(seed, 100 + static_cast<std::uint64_t>(i)));
        });
    }

    Detector det(key, params.eta, std::max(1, l / 2));
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(flows));
    long long sink = 0;
    using clock = std::chrono::steady_clock;
    for (int i = 0; i < flows; ++i) {
        const auto& flow = corpus[identical ? 0 : static_cast<std::size_t>(i)];
        const auto start = clock::now();
        const auto result = det(flow);
        const auto stop = clock::now();
        sink += result.n_c;
        times.push_back(std::chrono::duration<double, std::micro>(stop - start).count());
    }
    if (sink < 0) std::abort();

    BenchResult out;
    out.flows = flows;
    out.l = l;
    out.mean_us = stats::mean(times);
    out.cv = out.mean_us > 0.0 ? stats::stddev(times) / out.mean_us : 0.0;
    out.state_bytes = det.state_bytes();
    return out;
}

} // namespace botmosaic

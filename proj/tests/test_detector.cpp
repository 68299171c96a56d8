#include <doctest.h>

#include "botmosaic/botnet.hpp"
#include "botmosaic/channel.hpp"
#include "botmosaic/detector.hpp"
#include "botmosaic/error.hpp"
#include "botmosaic/watermark.hpp"

#include <random>

using namespace botmosaic;

namespace {

FlowTrace clean_mixture(const WatermarkKey& key, std::uint64_t seed, int R = 10) {
    WatermarkParams p;
    p.l = key.pairs();
    p.T = key.T();
    p.R = R;
    return mix(insert_watermark(key, p, seed), "m");
}

} // namespace

TEST_CASE("single packet lands in its interval") {
    const auto key = generate_key(1, 4, 0.5, 0.0);
    const auto counts = count_intervals(FlowTrace("f", {0.25}), key, 0.0);
    CHECK(counts == std::vector<std::uint32_t>{1, 0, 0, 0, 0, 0, 0, 0});
}

TEST_CASE("boundary packet belongs to the later interval") {
    const auto key = generate_key(1, 4, 0.5, 2.0);
    const auto counts = count_intervals(FlowTrace("f", {2.0, 2.5, 3.0, 6.0, 1.99}), key, 0.0);
    CHECK(counts == std::vector<std::uint32_t>{1, 1, 1, 0, 0, 0, 0, 0});
    const auto shifted = count_intervals(FlowTrace("f", {2.1, 2.6}), key, 0.1);
    CHECK(shifted == std::vector<std::uint32_t>{1, 1, 0, 0, 0, 0, 0, 0});
}

TEST_CASE("clean mixture scores delta = eta + psi on every pair") {
    const auto key = generate_key(2, 32, 0.5);
    const auto s = score(count_intervals(clean_mixture(key, 3), key, 0.0), key, 1);
    CHECK(s.n_c == 32);
    for (int d : s.deltas) CHECK(d == 2);
}

TEST_CASE("all-equal counts score zero") {
    const auto key = generate_key(2, 8, 0.5);
    const std::vector<std::uint32_t> counts(16, 3);
    const auto s = score(counts, key, 1);
    CHECK(s.n_c == 0);
    for (int d : s.deltas) CHECK(d == 0);
    CHECK_THROWS_AS(score(std::vector<std::uint32_t>(15, 0), key, 1), ParameterError);
}

TEST_CASE("Poisson counts give the Skellam exceedance probability") {
    constexpr double lambda = 2.0;
    constexpr int l = 100, draws = 1000;  // 10^5 pair scores
    const auto key = generate_key(5, l, 0.5);
    std::mt19937_64 rng(6);
    std::poisson_distribution<int> pois(lambda);

    long long detected = 0;
    std::vector<std::uint32_t> counts(2 * l);
    for (int d = 0; d < draws; ++d) {
        for (auto& c : counts) c = static_cast<std::uint32_t>(pois(rng));
        detected += score(counts, key, 1).n_c;
    }
    const double empirical = static_cast<double>(detected) / (static_cast<double>(l) * draws);

    // Independent Monte-Carlo oracle: difference of two fresh Poisson draws.
    std::mt19937_64 orng(7);
    long long hits = 0;
    for (int k = 0; k < 100000; ++k)
        if (pois(orng) - pois(orng) > 1) ++hits;
    const double oracle = static_cast<double>(hits) / 100000.0;

    CHECK(std::abs(empirical - oracle) < 0.02);
    CHECK(std::abs(empirical - 0.217748) < 0.02);  // scipy.stats.skellam.sf(1, 2, 2)
}

TEST_CASE("aligned clean trace synchronizes at offset 0 with every pair") {
    const auto key = generate_key(3, 64, 0.5);
    const auto sync = synchronize(clean_mixture(key, 4), key, 1);
    CHECK(sync.offset == 0.0);
    CHECK(sync.n_c == 64);
}

TEST_CASE("shift by 0.3 T keeps the detected pairs") {
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto key = generate_key(s, 64, 0.5);
        const auto m = clean_mixture(key, s + 1000);
        const int aligned = synchronize(m, key, 1).n_c;
        CHECK(synchronize(shift(m, 0.3 * 0.5), key, 1).n_c >= aligned - 2);
    }
}

TEST_CASE("shift by 0.3 T is recovered within one grid step on a dense watermark") {
    // At T = 0.5 a HI interval holds two packets, so several grid offsets can
    // tie at n_c = l; with T = 2 and R = 20 every grid step costs pairs.
    int close = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto key = generate_key(s, 64, 2.0);
        const auto m = clean_mixture(key, s + 1000, 20);
        const auto sync = synchronize(shift(m, 0.3 * 2.0), key, 1);
        CHECK(sync.n_c == 64);
        if (std::abs(sync.offset - 0.6) <= 2.0 / 100 + 1e-12) ++close;
    }
    CHECK(close == 100);
}

TEST_CASE("detect on empty and clean traces") {
    const auto key = generate_key(9, 16, 0.5);
    for (int theta : {1, 8, 16}) {
        const auto r = detect(FlowTrace{}, key, 1, theta);
        CHECK(r.n_c == 0);
        CHECK_FALSE(r.watermarked);
    }
    const auto r = detect(clean_mixture(key, 1), key, 1, 16);
    CHECK(r.watermarked);
    CHECK(r.n_c == 16);
    CHECK(r.deltas.size() == 16);
    CHECK_THROWS_AS(detect(FlowTrace{}, key, 1, 0), ParameterError);
    CHECK_THROWS_AS(detect(FlowTrace{}, key, 1, 17), ParameterError);
}

TEST_CASE("ties in synchronization go to the smallest offset") {
    const auto key = generate_key(4, 4, 1.0);
    // A background-free trace that scores zero everywhere.
    const auto sync = synchronize(FlowTrace("f", {100.0}), key, 1);
    CHECK(sync.offset == 0.0);
    CHECK(sync.n_c == 0);
}

TEST_CASE("n_c is non-increasing in eta") {
    BotnetConfig cfg;
    cfg.duration = 80.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto key = generate_key(s, 64, 0.5, 10.0);
        const FlowTrace parts[] = {clean_mixture(key, s), simulate_background(cfg, s)};
        const auto m = mix(parts, "m");
        int previous = 64;
        for (int eta = 0; eta <= 6; ++eta) {
            const int n = score(count_intervals(m, key, 0.0), key, eta).n_c;
            CHECK(n <= previous);
            previous = n;
        }
    }
}

TEST_CASE("reusable detector matches the free functions") {
    BotnetConfig cfg;
    cfg.duration = 80.0;
    const auto key = generate_key(1, 64, 0.5, 10.0);
    Detector det(key, 1, 32);
    CHECK(det.state_bytes() == 128 * sizeof(std::uint32_t));
    for (std::uint64_t s = 0; s < 10; ++s) {
        const FlowTrace parts[] = {clean_mixture(key, s), simulate_background(cfg, s)};
        const auto m = apply_channel(mix(parts, "m"), ChannelModel{}, s);
        const auto a = det(m);
        const auto b = detect(m, key, 1, 32);
        CHECK(a.n_c == b.n_c);
        CHECK(a.offset == b.offset);
        CHECK(a.deltas == b.deltas);
    }
}

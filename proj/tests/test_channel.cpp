#include <doctest.h>

#include "botmosaic/channel.hpp"
#include "botmosaic/detector.hpp"
#include "botmosaic/error.hpp"
#include "botmosaic/stats.hpp"
#include "botmosaic/watermark.hpp"

#include <algorithm>
#include <random>

using namespace botmosaic;

namespace {

FlowTrace random_trace(std::uint64_t seed, int n, double span) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, span);
    std::vector<double> ts(static_cast<std::size_t>(n));
    for (auto& t : ts) t = u(rng);
    return FlowTrace("f", ts);
}

FlowTrace clean_mixture(const WatermarkKey& key, std::uint64_t seed) {
    WatermarkParams p;
    p.l = key.pairs();
    p.T = key.T();
    return mix(insert_watermark(key, p, seed), "m");
}

} // namespace

TEST_CASE("mix of one trace is the identity") {
    const auto x = random_trace(1, 50, 10.0);
    const FlowTrace single[] = {x};
    CHECK(mix(single, "f") == x);
}

TEST_CASE("mix is a sorted multiset union, independent of input order") {
    const auto a = random_trace(1, 40, 10.0);
    const auto b = random_trace(2, 25, 10.0);
    const auto c = random_trace(3, 0, 10.0);
    const FlowTrace abc[] = {a, b, c};
    const FlowTrace cba[] = {c, b, a};
    const auto m = mix(abc, "m");
    CHECK(m.size() == 65);
    CHECK(std::is_sorted(m.timestamps.begin(), m.timestamps.end()));
    CHECK(m == mix(cba, "m"));

    auto expected = a.timestamps;
    expected.insert(expected.end(), b.timestamps.begin(), b.timestamps.end());
    std::sort(expected.begin(), expected.end());
    CHECK(m.timestamps == expected);
}

TEST_CASE("zero impairment is the identity, certain drop empties the trace") {
    const auto x = random_trace(4, 100, 20.0);
    CHECK(apply_channel(x, ChannelModel::none(), 1) == x);
    CHECK(apply_channel(x, {0.0, 0.0, 1.0, 1}, 1).empty());
}

TEST_CASE("constant delay shifts every timestamp and keeps packets") {
    const auto x = random_trace(5, 100, 20.0);
    const auto y = apply_channel(x, {0.2, 0.0, 0.0, 1}, 1);
    REQUIRE(y.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.timestamps[i] == doctest::Approx(x.timestamps[i] + 0.2));
    const auto z = apply_channel(x, {0.1, 0.05, 0.0, 3}, 9);
    CHECK(z.size() == x.size());
}

TEST_CASE("constant delay below T leaves synchronized detection intact") {
    const auto key = generate_key(3, 64, 0.5);
    const auto m = clean_mixture(key, 4);
    const int aligned = detect(m, key, 1, 32).n_c;
    for (double d : {0.01, 0.123, 0.25, 0.49}) {
        const auto shifted = apply_channel(m, {d, 0.0, 0.0, 1}, 1);
        CHECK(std::abs(detect(shifted, key, 1, 32).n_c - aligned) <= 1);
    }
}

TEST_CASE("jitter never yields a negative per-packet delay") {
    const auto x = random_trace(6, 2000, 5.0);
    const auto y = apply_channel(x, {0.001, 0.05, 0.0, 1}, 3);
    // Compare sorted multisets: every output is at least its input, so the
    // k-th smallest output is at least the k-th smallest input.
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.timestamps[i] >= x.timestamps[i]);
}

TEST_CASE("k stages match k single-stage passes in added-delay mean and variance") {
    std::vector<double> zeros(10000, 0.0);
    const FlowTrace origin("z", zeros);
    const ChannelModel one{0.05, 0.01, 0.0, 1};
    const ChannelModel three{0.05, 0.01, 0.0, 3};

    const auto direct = apply_channel(origin, three, 17);
    auto composed = origin;
    for (std::uint64_t s = 0; s < 3; ++s) composed = apply_channel(composed, one, 100 + s);

    const double m1 = stats::mean(direct.timestamps), m2 = stats::mean(composed.timestamps);
    const double s1 = stats::stddev(direct.timestamps), s2 = stats::stddev(composed.timestamps);
    CHECK(m1 == doctest::Approx(0.15).epsilon(0.01));
    CHECK(m2 == doctest::Approx(0.15).epsilon(0.01));
    // Clipping at -base_delay is 5 sigma away, so the sum behaves like N(0, 3 sigma^2).
    CHECK(s1 == doctest::Approx(0.01 * std::sqrt(3.0)).epsilon(0.05));
    CHECK(s2 == doctest::Approx(s1).epsilon(0.05));
}

TEST_CASE("multi-stage drop survives with (1 - p)^k") {
    std::vector<double> ts(20000, 1.0);
    const FlowTrace x("x", ts);
    const auto y = apply_channel(x, {0.0, 0.0, 0.2, 3}, 8);
    const double survived = static_cast<double>(y.size()) / 20000.0;
    CHECK(survived == doctest::Approx(0.512).epsilon(0.03));
}

TEST_CASE("invalid channel models are rejected") {
    const auto x = random_trace(1, 3, 1.0);
    CHECK_THROWS_AS(apply_channel(x, {-0.1, 0.0, 0.0, 1}, 1), ParameterError);
    CHECK_THROWS_AS(apply_channel(x, {0.0, 0.0, 1.5, 1}, 1), ParameterError);
    CHECK_THROWS_AS(apply_channel(x, {0.0, 0.0, 0.0, 0}, 1), ParameterError);
}

#pragma once

#include "botmosaic/trace.hpp"

#include <cstdint>
#include <vector>

namespace botmosaic {

/// Chaff model: B bots answering Poisson-arriving botmaster commands.
struct BotnetConfig {
    int bots = 100;
    double duration = 0.0;            // seconds of command arrivals
    double command_rate = 0.2;        // commands/second
    double response_delay_lo = 0.5;   // seconds
    double response_delay_hi = 10.0;
    double response_prob = 0.1;
    double per_bot_rate_cap = 0.5;    // packets/second
    double cap_interval = 0.5;        // interval over which the cap is enforced, seconds

    /// Most packets one bot may send in an aligned cap interval: ceil(cap_interval * rate).
    int per_bot_interval_cap() const;
    void validate() const;
};

/// Per-bot response flows, ids "bot-<n>".
std::vector<FlowTrace> simulate_bots(const BotnetConfig& config, std::uint64_t rng_seed);

/// Mixture of all bots' response packets, flow id "background".
FlowTrace simulate_background(const BotnetConfig& config, std::uint64_t rng_seed);

} // namespace botmosaic

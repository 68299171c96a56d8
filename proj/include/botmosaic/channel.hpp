#pragma once

#include "botmosaic/trace.hpp"

#include <cstdint>
#include <span>
#include <string>

namespace botmosaic {

/// Per-hop impairment, applied `stages` times in sequence.
struct ChannelModel {
    double base_delay = 0.050;    // seconds
    double jitter_sigma = 0.010;  // seconds, zero-mean normal, clipped at -base_delay
    double drop_prob = 0.0;
    int stages = 1;

    static ChannelModel none() { return {0.0, 0.0, 0.0, 1}; }

    void validate() const;
};

/// Sorted multiset union of all input timestamps.
FlowTrace mix(std::span<const FlowTrace> traces, std::string out_id);

/// Drops, delays and re-sorts packets. Each stage drops a packet with
/// drop_prob, then delays it by base_delay + max(N(0, sigma), -base_delay).
FlowTrace apply_channel(const FlowTrace& trace, const ChannelModel& model, std::uint64_t rng_seed);

/// Adds a constant to every timestamp.
FlowTrace shift(const FlowTrace& trace, double delta);

} // namespace botmosaic

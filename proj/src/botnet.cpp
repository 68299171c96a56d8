#include "botmosaic/botnet.hpp"

#include "botmosaic/channel.hpp"
#include "botmosaic/error.hpp"
#include "botmosaic/rng.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace botmosaic {

int BotnetConfig::per_bot_interval_cap() const {
    return static_cast<int>(std::ceil(cap_interval * per_bot_rate_cap - 1e-9));
}

void BotnetConfig::validate() const {
    if (bots < 0) throw ParameterError("bots must be >= 0");
    if (!(duration > 0.0) || !std::isfinite(duration)) throw ParameterError("duration must be positive");
    if (!(command_rate >= 0.0) || !std::isfinite(command_rate)) throw ParameterError("command_rate must be >= 0");
    if (!(response_delay_lo >= 0.0) || !(response_delay_hi >= response_delay_lo) || !std::isfinite(response_delay_hi))
        throw ParameterError("response delay range must satisfy 0 <= lo <= hi");
    if (!(response_prob >= 0.0 && response_prob <= 1.0)) throw ParameterError("response_prob must lie in [0, 1]");
    if (!(per_bot_rate_cap > 0.0)) throw ParameterError("per_bot_rate_cap must be positive");
    if (!(cap_interval > 0.0)) throw ParameterError("cap_interval must be positive");
}

std::vector<FlowTrace> simulate_bots(const BotnetConfig& config, std::uint64_t rng_seed) {
    config.validate();
    std::vector<FlowTrace> flows;
    flows.reserve(static_cast<std::size_t>(config.bots));

    auto rng = make_rng(rng_seed);
    std::vector<double> commands;
    if (config.command_rate > 0.0) {
        std::exponential_distribution<double> gap(config.command_rate);
        for (double t = gap(rng); t < config.duration; t += gap(rng)) commands.push_back(t);
    }

    std::bernoulli_distribution answers(config.response_prob);
    std::uniform_real_distribution<double> delay(config.response_delay_lo, config.response_delay_hi);
    const int cap = config.per_bot_interval_cap();
    const double width = config.cap_interval;

    for (int b = 0; b < config.bots; ++b) {
        FlowTrace flow;
        flow.flow_id = "bot-" + std::to_string(b);
        std::vector<double> raw;
        for (double c : commands)
            if (answers(rng)) raw.push_back(c + delay(rng));
        std::sort(raw.begin(), raw.end());

        // A response landing in a full cap interval moves to the same phase
        // of the next interval with room left.
        std::unordered_map<long long, int> used;
        for (double t : raw) {
            auto slot = static_cast<long long>(std::floor(t / width));
            const double phase = t - static_cast<double>(slot) * width;
            long long moved = 0;
            while (used[slot] >= cap) {
                ++slot;
                ++moved;
            }
            ++used[slot];
            if (moved) {
                t = static_cast<double>(slot) * width + phase;
                while (std::floor(t / width) < static_cast<double>(slot)) t = std::nextafter(t, INFINITY);
                while (std::floor(t / width) > static_cast<double>(slot)) t = std::nextafter(t, -INFINITY);
            }
            flow.timestamps.push_back(t);
        }
        std::sort(flow.timestamps.begin(), flow.timestamps.end());
        flows.push_back(std::move(flow));
    }
    return flows;
}

FlowTrace simulate_background(const BotnetConfig& config, std::uint64_t rng_seed) {
    const auto bots = simulate_bots(config, rng_seed);
    return mix(bots, "background");
}

} // namespace botmosaic

#pragma once

#include "botmosaic/botnet.hpp"
#include "botmosaic/channel.hpp"
#include "botmosaic/watermark.hpp"

#include <cstdint>
#include <string>

namespace botmosaic {

/// Everything one evaluation run needs. Defaults follow the T = 0.5 s,
/// l = 64, R = 10, B = 100 operating point.
struct ExperimentConfig {
    WatermarkParams watermark;
    int theta = 32;
    BotnetConfig botnet;
    ChannelModel channel;
    int trials = 100;
    std::uint64_t master_seed = 1;
};

/// `key = value` lines, `#` comments. Omitted theta defaults to floor(l / 2).
/// Throws ParseError naming the line for unknown keys, bad values and
/// infeasible watermark parameters.
ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "<config>");
ExperimentConfig parse_config(const std::string& path);

} // namespace botmosaic

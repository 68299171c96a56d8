#include "botmosaic/config.hpp"

#include "botmosaic/error.hpp"
#include "io_util.hpp"

#include <functional>
#include <map>
#include <sstream>

namespace botmosaic {

namespace {

template <typename T>
std::function<bool(std::string_view)> into(T& field) {
    return [&field](std::string_view v) { return detail::parse_number(v, field); };
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& source) {
    ExperimentConfig cfg;
    bool theta_given = false;
    std::size_t theta_line = 0;

    const std::map<std::string, std::function<bool(std::string_view)>, std::less<>> fields{
        {"T", into(cfg.watermark.T)},
        {"l", into(cfg.watermark.l)},
        {"eta", into(cfg.watermark.eta)},
        {"psi", into(cfg.watermark.psi)},
        {"R", into(cfg.watermark.R)},
        {"rate_cap", into(cfg.watermark.rate_cap)},
        {"theta", into(cfg.theta)},
        {"bots", into(cfg.botnet.bots)},
        {"duration", into(cfg.botnet.duration)},
        {"command_rate", into(cfg.botnet.command_rate)},
        {"response_delay_lo", into(cfg.botnet.response_delay_lo)},
        {"response_delay_hi", into(cfg.botnet.response_delay_hi)},
        {"response_prob", into(cfg.botnet.response_prob)},
        {"per_bot_rate_cap", into(cfg.botnet.per_bot_rate_cap)},
        {"base_delay", into(cfg.channel.base_delay)},
        {"jitter_sigma", into(cfg.channel.jitter_sigma)},
        {"drop_prob", into(cfg.channel.drop_prob)},
        {"stages", into(cfg.channel.stages)},
        {"trials", into(cfg.trials)},
        {"master_seed", into(cfg.master_seed)},
    };

    // Range checks per key, run after parsing so errors name the offending line.
    std::map<std::string, std::size_t> seen;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected 'key = value'");
        std::string key(detail::trim(line.substr(0, eq)));
        auto value = detail::trim(line.substr(eq + 1));
        auto it = fields.find(key);
        if (it == fields.end()) throw ParseError(source, line_no, "unknown key '" + key + "'");
        if (!it->second(value)) throw ParseError(source, line_no, "bad value for '" + key + "': '" + std::string(value) + "'");
        seen[key] = line_no;
        if (key == "theta") {
            theta_given = true;
            theta_line = line_no;
        }
    }

    auto line_of = [&](const std::string& key) {
        auto it = seen.find(key);
        return it == seen.end() ? std::size_t{0} : it->second;
    };
    auto check = [&](bool ok, const std::string& key, const std::string& what) {
        if (!ok) throw ParseError(source, line_of(key), key + " " + what);
    };

    const auto& wm = cfg.watermark;
    check(wm.T > 0.0, "T", "must be positive");
    check(wm.l >= 1, "l", "must be at least 1");
    check(wm.eta >= 1, "eta", "must be at least 1");
    check(wm.psi >= 1, "psi", "must be at least 1");
    check(wm.R >= 1, "R", "must be at least 1");
    check(wm.rate_cap > 0.0, "rate_cap", "must be positive");
    try {
        wm.validate();
    } catch (const FeasibilityError& e) {
        std::size_t where = 0;
        for (const char* k : {"eta", "psi", "T", "R", "rate_cap"})
            if (line_of(k) > where) where = line_of(k);
        throw ParseError(source, where, std::string("infeasible watermark parameters: ") + e.what());
    }

    if (!theta_given) cfg.theta = wm.l / 2 > 0 ? wm.l / 2 : 1;
    if (cfg.theta < 1 || cfg.theta > wm.l)
        throw ParseError(source, theta_line, "theta must lie in [1, l]");

    auto& bn = cfg.botnet;
    check(bn.bots >= 0, "bots", "must be >= 0");
    check(bn.duration >= 0.0, "duration", "must be >= 0 (0 derives it from the watermark span)");
    check(bn.command_rate >= 0.0, "command_rate", "must be >= 0");
    check(bn.response_delay_lo >= 0.0, "response_delay_lo", "must be >= 0");
    check(bn.response_delay_hi >= bn.response_delay_lo, "response_delay_hi", "must be >= response_delay_lo");
    check(bn.response_prob >= 0.0 && bn.response_prob <= 1.0, "response_prob", "must lie in [0, 1]");
    check(bn.per_bot_rate_cap > 0.0, "per_bot_rate_cap", "must be positive");
    bn.cap_interval = wm.T;

    const auto& ch = cfg.channel;
    check(ch.base_delay >= 0.0, "base_delay", "must be >= 0");
    check(ch.jitter_sigma >= 0.0, "jitter_sigma", "must be >= 0");
    check(ch.drop_prob >= 0.0 && ch.drop_prob <= 1.0, "drop_prob", "must lie in [0, 1]");
    check(ch.stages >= 1, "stages", "must be at least 1");
    check(cfg.trials >= 2, "trials", "must be at least 2");
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    return parse_config_text(detail::read_file(path), path);
}

} // namespace botmosaic

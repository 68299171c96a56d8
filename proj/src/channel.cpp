#include "botmosaic/channel.hpp"

#include "botmosaic/error.hpp"
#include "botmosaic/rng.hpp"

#include <algorithm>
#include <cmath>

namespace botmosaic {

void ChannelModel::validate() const {
    if (!(base_delay >= 0.0) || !std::isfinite(base_delay)) throw ParameterError("base_delay must be >= 0");
    if (!(jitter_sigma >= 0.0) || !std::isfinite(jitter_sigma)) throw ParameterError("jitter_sigma must be >= 0");
    if (!(drop_prob >= 0.0 && drop_prob <= 1.0)) throw ParameterError("drop_prob must lie in [0, 1]");
    if (stages < 1) throw ParameterError("stages must be at least 1");
}

FlowTrace mix(std::span<const FlowTrace> traces, std::string out_id) {
    std::size_t total = 0;
    for (const auto& t : traces) total += t.size();
    FlowTrace out;
    out.flow_id = std::move(out_id);
    out.timestamps.reserve(total);
    for (const auto& t : traces) {
        const auto mid = out.timestamps.size();
        out.timestamps.insert(out.timestamps.end(), t.timestamps.begin(), t.timestamps.end());
        std::inplace_merge(out.timestamps.begin(), out.timestamps.begin() + static_cast<std::ptrdiff_t>(mid),
                           out.timestamps.end());
    }
    return out;
}

FlowTrace apply_channel(const FlowTrace& trace, const ChannelModel& model, std::uint64_t rng_seed) {
    model.validate();
    auto rng = make_rng(rng_seed);
    std::bernoulli_distribution drop(model.drop_prob);
    std::normal_distribution<double> jitter(0.0, model.jitter_sigma > 0.0 ? model.jitter_sigma : 1.0);

    FlowTrace out;
    out.flow_id = trace.flow_id;
    out.timestamps.reserve(trace.size());
    for (double t : trace.timestamps) {
        bool lost = false;
        for (int s = 0; s < model.stages; ++s) {
            if (model.drop_prob > 0.0 && drop(rng)) {
                lost = true;
                break;
            }
            double hop = model.base_delay;
            if (model.jitter_sigma > 0.0) hop += std::max(jitter(rng), -model.base_delay);
            t += hop;
        }
        if (!lost) out.timestamps.push_back(t);
    }
    std::sort(out.timestamps.begin(), out.timestamps.end());
    return out;
}

FlowTrace shift(const FlowTrace& trace, double delta) {
    FlowTrace out = trace;
    for (auto& t : out.timestamps) t += delta;
    return out;
}

} // namespace botmosaic

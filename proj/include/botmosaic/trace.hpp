#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace botmosaic {

/// A flow identity with its packet timestamps (seconds), sorted non-decreasing.
struct FlowTrace {
    std::string flow_id;
    std::vector<double> timestamps;

    FlowTrace() = default;
    FlowTrace(std::string id, std::vector<double> ts)
        : flow_id(std::move(id)), timestamps(std::move(ts)) {
        std::sort(timestamps.begin(), timestamps.end());
    }

    std::size_t size() const noexcept { return timestamps.size(); }
    bool empty() const noexcept { return timestamps.empty(); }

    friend bool operator==(const FlowTrace&, const FlowTrace&) = default;
};

/// Reads a `flow_id,timestamp` CSV. Flows keep first-appearance order.
/// Timestamps must be non-negative and non-decreasing within each flow.
std::vector<FlowTrace> load_traces(const std::string& path);

/// Loads a file expected to hold at most one flow. Header-only files give an empty trace.
FlowTrace load_trace(const std::string& path);

void save_traces(const std::string& path, const std::vector<FlowTrace>& flows);
void save_trace(const std::string& path, const FlowTrace& flow);

std::vector<FlowTrace> parse_traces(const std::string& text, const std::string& source = "<trace>");
std::string format_traces(const std::vector<FlowTrace>& flows);

/// Fixed 9-digit decimal rendering used by every writer.
std::string format_seconds(double seconds);

} // namespace botmosaic

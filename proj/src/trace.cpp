#include "botmosaic/trace.hpp"

#include "botmosaic/error.hpp"
#include "io_util.hpp"

#include <charconv>
#include <cmath>
#include <unordered_map>

namespace botmosaic {

namespace {
constexpr std::string_view kHeader = "flow_id,timestamp";
}

std::string format_seconds(double seconds) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), seconds, std::chars_format::fixed, 9);
    if (ec != std::errc{}) throw ParameterError("timestamp out of range");
    return std::string(buf, ptr);
}

std::vector<FlowTrace> parse_traces(const std::string& text, const std::string& source) {
    std::vector<FlowTrace> flows;
    std::unordered_map<std::string, std::size_t> index;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool saw_header = false;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string_view line = detail::trim(std::string_view(text).substr(pos, end - pos));
        pos = end + 1;
        ++line_no;

        if (!saw_header) {
            if (line != kHeader) throw ParseError(source, line_no, "expected header 'flow_id,timestamp'");
            saw_header = true;
            continue;
        }
        if (line.empty()) continue;

        auto comma = line.rfind(',');
        if (comma == std::string_view::npos || comma == 0)
            throw ParseError(source, line_no, "expected '<flow_id>,<timestamp>'");
        std::string id(detail::trim(line.substr(0, comma)));
        double t = 0.0;
        if (!detail::parse_number(line.substr(comma + 1), t) || !std::isfinite(t))
            throw ParseError(source, line_no, "malformed timestamp");
        if (t < 0.0) throw ParseError(source, line_no, "negative timestamp");

        auto [it, inserted] = index.try_emplace(id, flows.size());
        if (inserted) flows.push_back(FlowTrace{id, {}});
        auto& ts = flows[it->second].timestamps;
        if (!ts.empty() && t < ts.back())
            throw ParseError(source, line_no, "timestamp decreases within flow '" + id + "'");
        ts.push_back(t);
    }
    if (!saw_header) throw ParseError(source, 1, "expected header 'flow_id,timestamp'");
    return flows;
}

std::string format_traces(const std::vector<FlowTrace>& flows) {
    std::string out(kHeader);
    out += '\n';
    for (const auto& flow : flows) {
        for (double t : flow.timestamps) {
            out += flow.flow_id;
            out += ',';
            out += format_seconds(t);
            out += '\n';
        }
    }
    return out;
}

std::vector<FlowTrace> load_traces(const std::string& path) {
    return parse_traces(detail::read_file(path), path);
}

FlowTrace load_trace(const std::string& path) {
    auto flows = load_traces(path);
    if (flows.empty()) return {};
    if (flows.size() > 1)
        throw ParseError(path, 0, "expected a single flow, found " + std::to_string(flows.size()));
    return std::move(flows.front());
}

void save_traces(const std::string& path, const std::vector<FlowTrace>& flows) {
    detail::write_file(path, format_traces(flows));
}

void save_trace(const std::string& path, const FlowTrace& flow) {
    save_traces(path, {flow});
}

} // namespace botmosaic

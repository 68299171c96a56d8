#include "botmosaic/detector.hpp"

#include "botmosaic/error.hpp"

#include <algorithm>

namespace botmosaic {

namespace {

double sync_offset(const WatermarkKey& key, int step) {
    return key.T() * static_cast<double>(step) / kSyncSteps;
}

// Timestamps must be sorted; the walk advances the interval cursor monotonically.
void fill_counts(std::span<const double> timestamps, const WatermarkKey& key, double offset,
                 std::span<std::uint32_t> counts) {
    std::fill(counts.begin(), counts.end(), 0u);
    const int intervals = key.intervals();
    const double first = interval_start(key, offset, 0);
    const double last = interval_start(key, offset, intervals);
    int j = 0;
    double next = interval_start(key, offset, 1);
    for (double t : timestamps) {
        if (t < first) continue;
        if (t >= last) break;
        while (t >= next) {
            ++j;
            next = interval_start(key, offset, j + 1);
        }
        ++counts[static_cast<std::size_t>(j)];
    }
}

int count_detected(std::span<const std::uint32_t> counts, const WatermarkKey& key, int eta) {
    int n_c = 0;
    for (int i = 1; i <= key.pairs(); ++i) {
        const auto hi = static_cast<long long>(counts[static_cast<std::size_t>(key.hi_interval(i))]);
        const auto lo = static_cast<long long>(counts[static_cast<std::size_t>(key.lo_interval(i))]);
        if (hi - lo > eta) ++n_c;
    }
    return n_c;
}

} // namespace

std::vector<std::uint32_t> count_intervals(const FlowTrace& trace, const WatermarkKey& key, double offset) {
    std::vector<std::uint32_t> counts(static_cast<std::size_t>(key.intervals()));
    fill_counts(trace.timestamps, key, offset, counts);
    return counts;
}

PairScore score(std::span<const std::uint32_t> counts, const WatermarkKey& key, int eta) {
    if (static_cast<int>(counts.size()) != key.intervals())
        throw ParameterError("expected " + std::to_string(key.intervals()) + " interval counts");
    PairScore out;
    out.deltas.reserve(static_cast<std::size_t>(key.pairs()));
    for (int i = 1; i <= key.pairs(); ++i) {
        const int d = static_cast<int>(counts[static_cast<std::size_t>(key.hi_interval(i))]) -
                      static_cast<int>(counts[static_cast<std::size_t>(key.lo_interval(i))]);
        out.deltas.push_back(d);
        if (d > eta) ++out.n_c;
    }
    return out;
}

SyncResult synchronize(const FlowTrace& trace, const WatermarkKey& key, int eta) {
    Detector det(key, eta, 1);
    return det.synchronize(trace.timestamps);
}

DetectionResult detect(const FlowTrace& trace, const WatermarkKey& key, int eta, int theta) {
    Detector det(key, eta, theta);
    return det(trace);
}

Detector::Detector(WatermarkKey key, int eta, int theta)
    : key_(std::move(key)), eta_(eta), theta_(theta), counts_(static_cast<std::size_t>(key_.intervals())) {
    if (theta_ < 1 || theta_ > key_.pairs())
        throw ParameterError("theta must lie in [1, " + std::to_string(key_.pairs()) + "]");
}

void Detector::count(std::span<const double> timestamps, double offset) {
    fill_counts(timestamps, key_, offset, counts_);
}

int Detector::detected_pairs() const {
    return count_detected(counts_, key_, eta_);
}

SyncResult Detector::synchronize(std::span<const double> timestamps) {
    SyncResult best{0.0, -1};
    for (int k = 0; k < kSyncSteps; ++k) {
        const double offset = sync_offset(key_, k);
        count(timestamps, offset);
        const int n_c = detected_pairs();
        if (n_c > best.n_c) best = {offset, n_c};
    }
    return best;
}

DetectionResult Detector::operator()(const FlowTrace& trace) {
    const auto sync = synchronize(trace.timestamps);
    count(trace.timestamps, sync.offset);
    auto scored = score(counts_, key_, eta_);
    DetectionResult out;
    out.deltas = std::move(scored.deltas);
    out.n_c = scored.n_c;
    out.offset = sync.offset;
    out.watermarked = out.n_c >= theta_;
    return out;
}

} // namespace botmosaic

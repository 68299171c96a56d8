#pragma once

#include "botmosaic/trace.hpp"
#include "botmosaic/watermark.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace botmosaic {

inline constexpr int kSyncSteps = 100;
static_assert(kEdgeGuard * kSyncSteps == 1.0, "insertion edge guard must equal one synchronization step");

struct PairScore {
    std::vector<int> deltas;  // N(HI_i) - N(LO_i), indexed by pair - 1
    int n_c = 0;              // pairs with delta > eta
};

struct SyncResult {
    double offset = 0.0;
    int n_c = 0;
};

struct DetectionResult {
    std::vector<int> deltas;
    int n_c = 0;
    bool watermarked = false;
    double offset = 0.0;
};

/// N(j) for the half-open intervals [epoch + offset + jT, epoch + offset + (j+1)T).
std::vector<std::uint32_t> count_intervals(const FlowTrace& trace, const WatermarkKey& key, double offset);

PairScore score(std::span<const std::uint32_t> counts, const WatermarkKey& key, int eta);

/// Scans offsets k*T/100 for k in [0, 100); ties go to the smaller offset.
SyncResult synchronize(const FlowTrace& trace, const WatermarkKey& key, int eta);

DetectionResult detect(const FlowTrace& trace, const WatermarkKey& key, int eta, int theta);

/// Reusable detector holding only the 2l interval counters between flows.
class Detector {
public:
    Detector(WatermarkKey key, int eta, int theta);

    DetectionResult operator()(const FlowTrace& trace);
    SyncResult synchronize(std::span<const double> timestamps);

    /// Bytes of mutable per-flow state (the interval counters).
    std::size_t state_bytes() const noexcept { return counts_.size() * sizeof(std::uint32_t); }
    const WatermarkKey& key() const noexcept { return key_; }

private:
    void count(std::span<const double> timestamps, double offset);
    int detected_pairs() const;

    WatermarkKey key_;
    int eta_;
    int theta_;
    std::vector<std::uint32_t> counts_;
};

} // namespace botmosaic

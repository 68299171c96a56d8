#pragma once

#include "botmosaic/rng.hpp"
#include "botmosaic/trace.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace botmosaic {

enum class Role : std::uint8_t { Hi, Lo };

/// Insertion and detection parameters shared by the watermarker and detector.
struct WatermarkParams {
    double T = 0.5;          // interval length, seconds
    int l = 64;              // HI/LO pair count
    int eta = 1;             // detection threshold, packets
    int psi = 1;             // confidence threshold, packets
    int R = 10;              // captured flows
    double rate_cap = 0.5;   // per-flow packets/second

    /// Most packets one captured flow may place in a single interval: ceil(T * rate_cap).
    int per_flow_interval_cap() const;
    /// Integer range for the HI count of each pair: [ceil(T*R*cap/2), floor(T*R*cap)].
    int hi_count_min() const;
    int hi_count_max() const;

    /// Throws ParameterError on out-of-range fields, FeasibilityError when
    /// the HI range is empty or a LO count could go negative.
    void validate() const;
    bool feasible() const noexcept;
};

struct IntervalLabel {
    int pair = 0;  // 1-based pair index
    Role role = Role::Hi;

    friend bool operator==(const IntervalLabel&, const IntervalLabel&) = default;
};

/// The secret labeling: interval j in [0, 2l) -> (pair, role).
class WatermarkKey {
public:
    WatermarkKey() = default;
    /// Throws ParameterError unless labels form a bijection onto {1..l} x {HI, LO}.
    WatermarkKey(double T, double epoch, std::vector<IntervalLabel> labels);

    double T() const noexcept { return T_; }
    double epoch() const noexcept { return epoch_; }
    int pairs() const noexcept { return static_cast<int>(labels_.size() / 2); }
    int intervals() const noexcept { return static_cast<int>(labels_.size()); }
    double span() const noexcept { return T_ * static_cast<double>(labels_.size()); }

    const std::vector<IntervalLabel>& labels() const noexcept { return labels_; }
    const IntervalLabel& label(int interval) const { return labels_.at(static_cast<std::size_t>(interval)); }

    /// Interval index holding the HI (LO) member of 1-based pair i.
    int hi_interval(int pair) const { return hi_.at(static_cast<std::size_t>(pair - 1)); }
    int lo_interval(int pair) const { return lo_.at(static_cast<std::size_t>(pair - 1)); }

    friend bool operator==(const WatermarkKey& a, const WatermarkKey& b) {
        return a.T_ == b.T_ && a.epoch_ == b.epoch_ && a.labels_ == b.labels_;
    }

private:
    double T_ = 0.0;
    double epoch_ = 0.0;
    std::vector<IntervalLabel> labels_;
    std::vector<int> hi_;
    std::vector<int> lo_;
};

/// Start of interval j when the key grid is shifted by `offset`: epoch + offset + j*T.
inline double interval_start(const WatermarkKey& key, double offset, int j) {
    return key.epoch() + offset + static_cast<double>(j) * key.T();
}

WatermarkKey generate_key(std::uint64_t seed, int l, double T, double epoch = 0.0);

/// Key file: `T=<s> l=<n> epoch=<s>` then one `<interval> <pair> <HI|LO>` line per interval.
std::string format_key(const WatermarkKey& key);
WatermarkKey parse_key(const std::string& text, const std::string& source = "<key>");
void save_key(const std::string& path, const WatermarkKey& key);
WatermarkKey load_key(const std::string& path);

struct PairCounts {
    std::vector<int> n_hi;  // indexed by pair - 1
    std::vector<int> n_lo;
};

PairCounts plan_counts(const WatermarkKey& key, const WatermarkParams& params, std::uint64_t rng_seed);

/// Share matrix shares[f][j]: packets captured flow f sends in interval j.
struct InsertionPlan {
    PairCounts counts;
    std::vector<int> hi_interval;            // per pair (index pair - 1)
    std::vector<int> lo_interval;
    std::vector<int> column_totals;          // planned N(j)
    std::vector<std::vector<int>> shares;    // R rows x 2l columns

    int flows() const noexcept { return static_cast<int>(shares.size()); }
    int intervals() const noexcept { return static_cast<int>(column_totals.size()); }
    int column_sum(int interval) const;
};

/// Spreads each interval total over R flows one packet at a time, each packet
/// going to a uniformly chosen flow that still has capacity.
InsertionPlan allocate_shares(const WatermarkKey& key, const PairCounts& counts,
                              const WatermarkParams& params, std::uint64_t rng_seed);

/// Column-level form: distributes `total` packets over `flows` flows capped at `cap` each.
std::vector<int> allocate_column(int total, int flows, int cap, Rng& rng);

/// Fraction of T kept free of watermark packets at each interval edge. Equal
/// to the detector's synchronization step, so a grid-aligned offset never
/// splits a packet away from its interval.
inline constexpr double kEdgeGuard = 1.0 / 100;

/// One trace per captured flow, each S[f][j] timestamps uniform in
/// [epoch + (j + g)T, epoch + (j + 1 - g)T) with g = kEdgeGuard.
std::vector<FlowTrace> emit_watermarked_flows(const InsertionPlan& plan, const WatermarkKey& key,
                                              std::uint64_t rng_seed);

/// True iff every pair's mixture excess reaches eta and every cell respects the per-flow cap.
bool verify_plan(const InsertionPlan& plan, const WatermarkParams& params);

/// plan_counts -> allocate_shares -> emit, with sub-seeds derived from `seed`.
std::vector<FlowTrace> insert_watermark(const WatermarkKey& key, const WatermarkParams& params,
                                        std::uint64_t seed);

} // namespace botmosaic

#include "botmosaic/watermark.hpp"

#include "botmosaic/error.hpp"
#include "io_util.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace botmosaic {

namespace {
// Absorbs representation error in products like 0.5 * 10 * 0.5 before rounding.
constexpr double kRoundSlack = 1e-9;
} // namespace

int WatermarkParams::per_flow_interval_cap() const {
    return static_cast<int>(std::ceil(T * rate_cap - kRoundSlack));
}

int WatermarkParams::hi_count_min() const {
    return static_cast<int>(std::ceil(T * R * rate_cap / 2.0 - kRoundSlack));
}

int WatermarkParams::hi_count_max() const {
    return static_cast<int>(std::floor(T * R * rate_cap + kRoundSlack));
}

void WatermarkParams::validate() const {
    if (!(T > 0.0) || !std::isfinite(T)) throw ParameterError("T must be a positive number of seconds");
    if (l < 1) throw ParameterError("l must be at least 1");
    if (eta < 1) throw ParameterError("eta must be at least 1");
    if (psi < 1) throw ParameterError("psi must be at least 1");
    if (R < 1) throw ParameterError("R must be at least 1");
    if (!(rate_cap > 0.0) || !std::isfinite(rate_cap)) throw ParameterError("rate_cap must be positive");

    const int lo = hi_count_min();
    const int hi = hi_count_max();
    if (lo > hi)
        throw FeasibilityError("empty HI count range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    if (eta + psi > lo)
        throw FeasibilityError("eta + psi = " + std::to_string(eta + psi) +
                               " exceeds the smallest HI count " + std::to_string(lo) +
                               "; LO counts would go negative");
}

bool WatermarkParams::feasible() const noexcept {
    try {
        validate();
        return true;
    } catch (const Error&) {
        return false;
    }
}

WatermarkKey::WatermarkKey(double T, double epoch, std::vector<IntervalLabel> labels)
    : T_(T), epoch_(epoch), labels_(std::move(labels)) {
    if (!(T_ > 0.0) || !std::isfinite(T_)) throw ParameterError("key T must be positive");
    if (!std::isfinite(epoch_)) throw ParameterError("key epoch must be finite");
    if (labels_.empty() || labels_.size() % 2 != 0) throw ParameterError("key needs 2l intervals");

    const int l = pairs();
    hi_.assign(static_cast<std::size_t>(l), -1);
    lo_.assign(static_cast<std::size_t>(l), -1);
    for (int j = 0; j < intervals(); ++j) {
        const auto& lab = labels_[static_cast<std::size_t>(j)];
        if (lab.pair < 1 || lab.pair > l)
            throw ParameterError("interval " + std::to_string(j) + " names pair " + std::to_string(lab.pair) +
                                 " outside 1.." + std::to_string(l));
        auto& slot = (lab.role == Role::Hi ? hi_ : lo_)[static_cast<std::size_t>(lab.pair - 1)];
        if (slot != -1)
            throw ParameterError("pair " + std::to_string(lab.pair) + " has two " +
                                 (lab.role == Role::Hi ? "HI" : "LO") + " intervals");
        slot = j;
    }
}

WatermarkKey generate_key(std::uint64_t seed, int l, double T, double epoch) {
    if (l < 1) throw ParameterError("l must be at least 1");
    if (!(T > 0.0) || !std::isfinite(T)) throw ParameterError("T must be a positive number of seconds");

    std::vector<IntervalLabel> labels;
    labels.reserve(2 * static_cast<std::size_t>(l));
    for (int i = 1; i <= l; ++i) {
        labels.push_back({i, Role::Hi});
        labels.push_back({i, Role::Lo});
    }
    auto rng = make_rng(seed);
    std::shuffle(labels.begin(), labels.end(), rng);
    return WatermarkKey(T, epoch, std::move(labels));
}

std::string format_key(const WatermarkKey& key) {
    std::string out = "T=" + format_seconds(key.T()) + " l=" + std::to_string(key.pairs()) +
                      " epoch=" + format_seconds(key.epoch()) + "\n";
    for (int j = 0; j < key.intervals(); ++j) {
        const auto& lab = key.label(j);
        out += std::to_string(j) + ' ' + std::to_string(lab.pair) + ' ' + (lab.role == Role::Hi ? "HI" : "LO") + '\n';
    }
    return out;
}

WatermarkKey parse_key(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    double T = 0.0, epoch = 0.0;
    int l = 0;
    bool have_T = false, have_l = false, have_epoch = false;
    if (!std::getline(in, line)) throw ParseError(source, 1, "empty key file");
    ++line_no;
    {
        std::istringstream head(line);
        std::string field;
        while (head >> field) {
            auto eq = field.find('=');
            if (eq == std::string::npos) throw ParseError(source, line_no, "expected name=value, got '" + field + "'");
            auto name = field.substr(0, eq);
            auto value = std::string_view(field).substr(eq + 1);
            bool ok = false;
            if (name == "T") ok = have_T = detail::parse_number(value, T);
            else if (name == "l") ok = have_l = detail::parse_number(value, l);
            else if (name == "epoch") ok = have_epoch = detail::parse_number(value, epoch);
            else throw ParseError(source, line_no, "unknown header field '" + name + "'");
            if (!ok) throw ParseError(source, line_no, "bad value for " + name);
        }
        if (!have_T || !have_l || !have_epoch) throw ParseError(source, line_no, "header needs T, l and epoch");
        if (l < 1) throw ParseError(source, line_no, "l must be at least 1");
    }

    std::vector<IntervalLabel> labels;
    labels.reserve(2 * static_cast<std::size_t>(l));
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        std::istringstream row(line);
        int j = -1, pair = 0;
        std::string role, extra;
        if (!(row >> j >> pair >> role) || (row >> extra))
            throw ParseError(source, line_no, "expected '<interval> <pair> <HI|LO>'");
        if (j != static_cast<int>(labels.size()))
            throw ParseError(source, line_no, "intervals must be listed in ascending order from 0");
        if (role != "HI" && role != "LO") throw ParseError(source, line_no, "role must be HI or LO");
        labels.push_back({pair, role == "HI" ? Role::Hi : Role::Lo});
    }
    if (labels.size() != 2 * static_cast<std::size_t>(l))
        throw ParseError(source, line_no, "expected " + std::to_string(2 * l) + " interval lines, found " +
                                              std::to_string(labels.size()));
    try {
        return WatermarkKey(T, epoch, std::move(labels));
    } catch (const ParameterError& e) {
        throw ParseError(source, 0, e.what());
    }
}

void save_key(const std::string& path, const WatermarkKey& key) {
    detail::write_file(path, format_key(key));
}

WatermarkKey load_key(const std::string& path) {
    return parse_key(detail::read_file(path), path);
}

PairCounts plan_counts(const WatermarkKey& key, const WatermarkParams& params, std::uint64_t rng_seed) {
    params.validate();
    if (key.pairs() != params.l) throw ParameterError("key has " + std::to_string(key.pairs()) + " pairs, params.l is " + std::to_string(params.l));

    auto rng = make_rng(rng_seed);
    std::uniform_int_distribution<int> hi_dist(params.hi_count_min(), params.hi_count_max());
    PairCounts counts;
    counts.n_hi.reserve(static_cast<std::size_t>(params.l));
    counts.n_lo.reserve(static_cast<std::size_t>(params.l));
    for (int i = 0; i < params.l; ++i) {
        const int hi = hi_dist(rng);
        counts.n_hi.push_back(hi);
        counts.n_lo.push_back(hi - params.eta - params.psi);
    }
    return counts;
}

int InsertionPlan::column_sum(int interval) const {
    int sum = 0;
    for (const auto& row : shares) sum += row.at(static_cast<std::size_t>(interval));
    return sum;
}

std::vector<int> allocate_column(int total, int flows, int cap, Rng& rng) {
    if (total < 0) throw AllocationError("negative interval total");
    if (static_cast<long long>(flows) * cap < total)
        throw AllocationError(std::to_string(total) + " packets exceed capacity of " + std::to_string(flows) +
                              " flows x " + std::to_string(cap));
    std::vector<int> column(static_cast<std::size_t>(flows), 0);
    std::vector<int> open(static_cast<std::size_t>(flows));
    for (int f = 0; f < flows; ++f) open[static_cast<std::size_t>(f)] = f;
    for (int p = 0; p < total; ++p) {
        std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
        const auto k = pick(rng);
        const int f = open[k];
        if (++column[static_cast<std::size_t>(f)] == cap) {
            open[k] = open.back();
            open.pop_back();
        }
    }
    return column;
}

InsertionPlan allocate_shares(const WatermarkKey& key, const PairCounts& counts, const WatermarkParams& params,
                              std::uint64_t rng_seed) {
    params.validate();
    const int l = key.pairs();
    if (static_cast<int>(counts.n_hi.size()) != l || static_cast<int>(counts.n_lo.size()) != l)
        throw ParameterError("pair counts do not match key length");

    InsertionPlan plan;
    plan.counts = counts;
    plan.column_totals.resize(static_cast<std::size_t>(key.intervals()));
    for (int i = 1; i <= l; ++i) {
        plan.hi_interval.push_back(key.hi_interval(i));
        plan.lo_interval.push_back(key.lo_interval(i));
        plan.column_totals[static_cast<std::size_t>(key.hi_interval(i))] = counts.n_hi[static_cast<std::size_t>(i - 1)];
        plan.column_totals[static_cast<std::size_t>(key.lo_interval(i))] = counts.n_lo[static_cast<std::size_t>(i - 1)];
    }

    const int cap = params.per_flow_interval_cap();
    plan.shares.assign(static_cast<std::size_t>(params.R), std::vector<int>(plan.column_totals.size(), 0));
    auto rng = make_rng(rng_seed);
    for (std::size_t j = 0; j < plan.column_totals.size(); ++j) {
        const auto column = allocate_column(plan.column_totals[j], params.R, cap, rng);
        for (std::size_t f = 0; f < column.size(); ++f) plan.shares[f][j] = column[f];
    }
    return plan;
}

std::vector<FlowTrace> emit_watermarked_flows(const InsertionPlan& plan, const WatermarkKey& key,
                                              std::uint64_t rng_seed) {
    if (plan.intervals() != key.intervals())
        throw ParameterError("plan has " + std::to_string(plan.intervals()) + " intervals, key has " +
                             std::to_string(key.intervals()));

    auto rng = make_rng(rng_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double guard = kEdgeGuard * key.T();
    std::vector<FlowTrace> flows;
    flows.reserve(plan.shares.size());
    for (std::size_t f = 0; f < plan.shares.size(); ++f) {
        const auto& row = plan.shares[f];
        if (static_cast<int>(row.size()) != key.intervals()) throw ParameterError("ragged share matrix");
        std::vector<double> ts;
        for (int j = 0; j < key.intervals(); ++j) {
            const double start = interval_start(key, 0.0, j) + guard;
            const double end = interval_start(key, 0.0, j + 1) - guard;
            for (int p = 0; p < row[static_cast<std::size_t>(j)]; ++p) {
                double t = start + unit(rng) * (end - start);
                if (t >= end) t = std::nextafter(end, start);
                if (t < start) t = start;
                ts.push_back(t);
            }
        }
        flows.emplace_back("captured-" + std::to_string(f), std::move(ts));
    }
    return flows;
}

bool verify_plan(const InsertionPlan& plan, const WatermarkParams& params) {
    const int cap = params.per_flow_interval_cap();
    const auto intervals = plan.column_totals.size();
    if (plan.hi_interval.size() != plan.lo_interval.size()) return false;
    for (const auto& row : plan.shares) {
        if (row.size() != intervals) return false;
        for (int cell : row)
            if (cell < 0 || cell > cap) return false;
    }
    for (std::size_t i = 0; i < plan.hi_interval.size(); ++i) {
        const int hi = plan.hi_interval[i];
        const int lo = plan.lo_interval[i];
        if (hi < 0 || lo < 0 || static_cast<std::size_t>(hi) >= intervals || static_cast<std::size_t>(lo) >= intervals)
            return false;
        if (plan.column_sum(hi) - plan.column_sum(lo) < params.eta) return false;
    }
    return true;
}

std::vector<FlowTrace> insert_watermark(const WatermarkKey& key, const WatermarkParams& params, std::uint64_t seed) {
    const auto counts = plan_counts(key, params, derive_seed(seed, 0));
    const auto plan = allocate_shares(key, counts, params, derive_seed(seed, 1));
    return emit_watermarked_flows(plan, key, derive_seed(seed, 2));
}

} // namespace botmosaic

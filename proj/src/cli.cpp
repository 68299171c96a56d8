#include "botmosaic/cli.hpp"

#include "botmosaic/botnet.hpp"
#include "botmosaic/channel.hpp"
#include "botmosaic/config.hpp"
#include "botmosaic/detector.hpp"
#include "botmosaic/error.hpp"
#include "botmosaic/eval.hpp"
#include "botmosaic/rng.hpp"
#include "botmosaic/trace.hpp"
#include "botmosaic/watermark.hpp"
#include "io_util.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>

namespace botmosaic::cli {

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

struct Options {
    std::uint64_t seed = 0;
    std::string out;
    std::string key;
    std::string config;
    std::vector<std::string> traces;
    std::string trace;
    std::string out_id = "mixture";

    int l = 0;
    double T = 0.0;
    double epoch = 0.0;

    WatermarkParams wm;
    int theta = 0;
    BotnetConfig botnet;
    ChannelModel channel;

    int trials = 0;
    unsigned threads = 0;
    std::vector<int> sweep_l;
    std::vector<double> sweep_T;
    std::vector<double> sweep_ratio;

    int flows = 20000;
    bool identical = false;
};

void add_channel_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--base-delay", o.channel.base_delay, "per-stage delay, seconds")->capture_default_str();
    cmd->add_option("--jitter-sigma", o.channel.jitter_sigma, "per-stage jitter std. dev., seconds")->capture_default_str();
    cmd->add_option("--drop-prob", o.channel.drop_prob, "per-stage drop probability")->capture_default_str();
    cmd->add_option("--stages", o.channel.stages, "number of composed hops")->capture_default_str();
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Collaborative network-flow watermark toolkit", "botmosaic"};
    app.require_subcommand(1);
    Options o;
    o.botnet.duration = 0.0;

    auto* keygen = app.add_subcommand("keygen", "generate a random watermark key");
    keygen->add_option("--seed", o.seed)->required();
    keygen->add_option("--l", o.l, "HI/LO pair count")->required();
    keygen->add_option("--T", o.T, "interval length, seconds")->required();
    keygen->add_option("--epoch", o.epoch, "watermark start, seconds")->capture_default_str();
    keygen->add_option("--out", o.out, "key file to write")->required();

    auto* inject = app.add_subcommand("inject", "emit R captured-flow traces carrying watermark shares");
    inject->add_option("--key", o.key)->required()->check(CLI::ExistingFile);
    inject->add_option("--seed", o.seed)->required();
    inject->add_option("--R", o.wm.R, "captured flows")->capture_default_str();
    inject->add_option("--eta", o.wm.eta)->capture_default_str();
    inject->add_option("--psi", o.wm.psi)->capture_default_str();
    inject->add_option("--rate-cap", o.wm.rate_cap, "per-flow packets/second")->capture_default_str();
    inject->add_option("--out", o.out, "trace CSV to write")->required();

    auto* simulate = app.add_subcommand("simulate", "generate background bot traffic");
    simulate->add_option("--seed", o.seed)->required();
    simulate->add_option("--config", o.config, "experiment config supplying generator keys")->check(CLI::ExistingFile);
    simulate->add_option("--bots", o.botnet.bots);
    simulate->add_option("--duration", o.botnet.duration, "seconds of command arrivals");
    simulate->add_option("--command-rate", o.botnet.command_rate);
    simulate->add_option("--response-delay-lo", o.botnet.response_delay_lo);
    simulate->add_option("--response-delay-hi", o.botnet.response_delay_hi);
    simulate->add_option("--response-prob", o.botnet.response_prob);
    simulate->add_option("--rate-cap", o.botnet.per_bot_rate_cap);
    simulate->add_option("--cap-interval", o.botnet.cap_interval, "interval the per-bot cap applies to, seconds");
    simulate->add_option("--out", o.out)->required();

    auto* mixcmd = app.add_subcommand("mix", "merge every flow of the input traces into one flow");
    mixcmd->add_option("--trace", o.traces)->required()->check(CLI::ExistingFile);
    mixcmd->add_option("--out-id", o.out_id)->capture_default_str();
    mixcmd->add_option("--out", o.out)->required();

    auto* channel = app.add_subcommand("channel", "apply delay, jitter and drop to every flow");
    channel->add_option("--trace", o.trace)->required()->check(CLI::ExistingFile);
    channel->add_option("--seed", o.seed)->required();
    add_channel_flags(channel, o);
    channel->add_option("--out", o.out)->required();

    auto* detectcmd = app.add_subcommand("detect", "detect the watermark in every flow of a trace");
    detectcmd->add_option("--key", o.key)->required()->check(CLI::ExistingFile);
    detectcmd->add_option("--trace", o.trace)->required()->check(CLI::ExistingFile);
    detectcmd->add_option("--eta", o.wm.eta)->required();
    detectcmd->add_option("--theta", o.theta)->required();

    auto* eval = app.add_subcommand("eval", "Monte-Carlo COER estimate for one configuration");
    eval->add_option("--config", o.config)->required()->check(CLI::ExistingFile);
    eval->add_option("--seed", o.seed, "master seed (overrides master_seed)")->required();
    eval->add_option("--trials", o.trials, "overrides the config's trials");
    eval->add_option("--threads", o.threads, "worker threads, 0 = all cores");

    auto* sweepcmd = app.add_subcommand("sweep", "COER over a grid of l, T and R/B");
    sweepcmd->add_option("--config", o.config, "base configuration")->check(CLI::ExistingFile);
    sweepcmd->add_option("--seed", o.seed)->required();
    sweepcmd->add_option("--l", o.sweep_l)->delimiter(',');
    sweepcmd->add_option("--T", o.sweep_T)->delimiter(',');
    sweepcmd->add_option("--r-over-b", o.sweep_ratio)->delimiter(',');
    sweepcmd->add_option("--trials", o.trials);
    sweepcmd->add_option("--out", o.out, "CSV path (stdout when omitted)");

    auto* bench = app.add_subcommand("bench", "time the detector over a synthetic corpus");
    bench->add_option("--flows", o.flows)->capture_default_str()->check(CLI::Range(1000, 100000000));
    bench->add_option("--l", o.l)->default_val(128);
    bench->add_option("--seed", o.seed)->default_val(1);
    bench->add_flag("--identical", o.identical, "detect one flow repeatedly");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (keygen->parsed()) {
            save_key(o.out, generate_key(o.seed, o.l, o.T, o.epoch));
        } else if (inject->parsed()) {
            const auto key = load_key(o.key);
            o.wm.l = key.pairs();
            o.wm.T = key.T();
            save_traces(o.out, insert_watermark(key, o.wm, o.seed));
        } else if (simulate->parsed()) {
            BotnetConfig bn = o.botnet;
            if (!o.config.empty()) {
                // Config supplies the baseline; explicit flags still win.
                auto cfg = parse_config(o.config).botnet;
                auto pick = [&](const char* flag, auto& field, const auto& from_cfg) {
                    if (simulate->count(flag) == 0) field = from_cfg;
                };
                pick("--bots", bn.bots, cfg.bots);
                pick("--duration", bn.duration, cfg.duration);
                pick("--command-rate", bn.command_rate, cfg.command_rate);
                pick("--response-delay-lo", bn.response_delay_lo, cfg.response_delay_lo);
                pick("--response-delay-hi", bn.response_delay_hi, cfg.response_delay_hi);
                pick("--response-prob", bn.response_prob, cfg.response_prob);
                pick("--rate-cap", bn.per_bot_rate_cap, cfg.per_bot_rate_cap);
                pick("--cap-interval", bn.cap_interval, cfg.cap_interval);
            }
            if (bn.duration <= 0.0) throw ParameterError("--duration must be positive");
            save_trace(o.out, simulate_background(bn, o.seed));
        } else if (mixcmd->parsed()) {
            std::vector<FlowTrace> all;
            for (const auto& path : o.traces) {
                auto flows = load_traces(path);
                all.insert(all.end(), std::make_move_iterator(flows.begin()), std::make_move_iterator(flows.end()));
            }
            save_trace(o.out, mix(all, o.out_id));
        } else if (channel->parsed()) {
            auto flows = load_traces(o.trace);
            for (std::size_t i = 0; i < flows.size(); ++i)
                flows[i] = apply_channel(flows[i], o.channel, derive_seed(o.seed, i));
            save_traces(o.out, flows);
        } else if (detectcmd->parsed()) {
            const auto key = load_key(o.key);
            if (o.theta < 1 || o.theta > key.pairs())
                throw ParameterError("--theta must lie in [1, " + std::to_string(key.pairs()) + "]");
            Detector det(key, o.wm.eta, o.theta);
            for (const auto& flow : load_traces(o.trace)) {
                const auto r = det(flow);
                out << flow.flow_id << ' ' << r.n_c << ' ' << fixed6(r.offset) << ' '
                    << (r.watermarked ? "WATERMARKED" : "CLEAN") << '\n';
            }
        } else if (eval->parsed()) {
            auto cfg = parse_config(o.config);
            cfg.master_seed = o.seed;
            if (o.trials > 0) cfg.trials = o.trials;
            const auto trials =
                run_trials(cfg.watermark, cfg.botnet, cfg.channel, cfg.trials, cfg.master_seed, o.threads);
            out << format_report(estimate_coer(trials));
        } else if (sweepcmd->parsed()) {
            ExperimentConfig cfg = o.config.empty() ? parse_config_text("") : parse_config(o.config);
            SweepGrid grid;
            grid.l = o.sweep_l.empty() ? std::vector<int>{cfg.watermark.l} : o.sweep_l;
            grid.T = o.sweep_T.empty() ? std::vector<double>{cfg.watermark.T} : o.sweep_T;
            grid.r_over_b = o.sweep_ratio.empty()
                                ? std::vector<double>{static_cast<double>(cfg.watermark.R) / std::max(cfg.botnet.bots, 1)}
                                : o.sweep_ratio;
            const auto rows = sweep(cfg, grid, o.trials > 0 ? o.trials : cfg.trials, o.seed);
            const auto csv = format_sweep_csv(rows);
            if (o.out.empty()) out << csv;
            else detail::write_file(o.out, csv);
            for (const auto& row : rows)
                if (!row.report) err << "warning: l=" << row.l << " T=" << row.T << " R/B=" << row.r_over_b << ": " << row.error << '\n';
        } else if (bench->parsed()) {
            const auto r = bench_detector(o.flows, o.l, o.seed, o.identical);
            out << "flows " << r.flows << "\nl " << r.l << "\nmean_us_per_flow " << fixed6(r.mean_us) << "\ncv "
                << fixed6(r.cv) << "\nstate_bytes_per_flow " << r.state_bytes << '\n';
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace botmosaic::cli

// Command-line front end: sweep, plan, calibrate, campaign, report.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fastswitch/campaign.hpp"
#include "fastswitch/channels.hpp"
#include "fastswitch/config.hpp"
#include "fastswitch/io.hpp"
#include "fastswitch/report.hpp"

namespace fs = std::filesystem;
using namespace fastswitch;

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string run_dir;  // exact output directory, bypassing the stamp
    std::string map_path;
    std::string channels_path;
    bool all_channels = false;
    int from = -1;
    int to = -1;
    std::vector<std::string> record_paths;
    bool quiet = false;
};

RunConfig load(const Options& o)
{
    RunConfig c = o.config_path.empty() ? RunConfig{} : load_run_config(o.config_path);
    if (o.seed) c.plant.rng_seed = *o.seed;
    c.validate();
    return c;
}

// <output_dir>/<command>-<UTC stamp>-s<seed>, with a counter if that exists already.
fs::path make_run_dir(const Options& o, const RunConfig& c, const std::string& command)
{
    fs::path dir;
    if (!o.run_dir.empty()) {
        dir = o.run_dir;
    } else {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
        const std::string base = command + "-" + stamp + "-s" + std::to_string(c.plant.rng_seed);
        dir = c.output_dir / base;
        for (int n = 2; fs::exists(dir); ++n) dir = c.output_dir / (base + "-" + std::to_string(n));
    }
    fs::create_directories(dir);
    write_text_file(dir / "config.json", run_config_to_json(c));
    return dir;
}

void note(const Options& o, const std::string& msg)
{
    if (!o.quiet) std::cerr << msg << "\n";
}

TuningMap obtain_map(const Options& o, const RunConfig& c)
{
    if (!o.map_path.empty()) {
        std::istringstream in(read_text_file(o.map_path));
        return read_map_csv(in, c.map);
    }
    note(o, "sweeping tuning map");
    SimulatedTestbed testbed(c.plant, c.testbed);
    return sweep_map(testbed, c.plant, c.map);
}

std::vector<ChannelPoint> place(const Options& o, const RunConfig& c, const TuningMap& map)
{
    note(o, "placing channels");
    SimulatedTestbed testbed(c.plant, c.testbed);
    return place_itu_channels(map, testbed, c.plant, c.placement);
}

std::vector<ChannelPoint> obtain_channels(const Options& o, const RunConfig& c)
{
    if (!o.channels_path.empty()) return channels_from_json(read_text_file(o.channels_path));
    return place(o, c, obtain_map(o, c));
}

const ChannelPoint& channel_by_index(const std::vector<ChannelPoint>& channels, int index)
{
    for (const auto& ch : channels)
        if (ch.index == index) return ch;
    throw std::invalid_argument("no channel with index " + std::to_string(index));
}

int cmd_sweep(const Options& o)
{
    const auto c = load(o);
    const auto dir = make_run_dir(o, c, "sweep");
    SimulatedTestbed testbed(c.plant, c.testbed);
    const auto map = sweep_map(testbed, c.plant, c.map);
    std::ostringstream os;
    write_map_csv(os, map);
    write_text_file(dir / "map.csv", os.str());
    std::cout << dir.string() << "\n";
    return 0;
}

int cmd_plan(const Options& o)
{
    const auto c = load(o);
    const auto dir = make_run_dir(o, c, "plan");
    const auto map = obtain_map(o, c);
    std::ostringstream os;
    write_map_csv(os, map);
    write_text_file(dir / "map.csv", os.str());
    const auto channels = place(o, c, map);
    write_text_file(dir / "channels.json", channels_to_json(channels));
    write_text_file(dir / "worst_case.json", channels_to_json(select_worst_case(c.plant, channels, c.worst_case)));
    std::cout << dir.string() << "\n";
    return 0;
}

int cmd_calibrate(const Options& o)
{
    const auto c = load(o);
    const auto channels = obtain_channels(o, c);
    const auto& origin = channel_by_index(channels, o.from);
    const auto& target = channel_by_index(channels, o.to);
    const auto dir = make_run_dir(o, c, "calibrate");

    SwitchTraces traces;
    const auto result =
        calibrate_switch(c.plant, origin, target, simulated_testbed_factory(c.testbed), c.optimizer, &traces);
    write_text_file(dir / "record.json", switch_result_to_json(result));
    if (!result.ok()) {
        std::cerr << "calibration failed: " << result.error << "\n";
        return 1;
    }
    for (const auto& [name, trace] : {std::pair{"trace_rear_only.csv", &traces.rear_only},
                                      std::pair{"trace_final.csv", &traces.final_stage}}) {
        std::ostringstream os;
        write_trace_csv(os, *trace);
        write_text_file(dir / name, os.str());
    }
    const auto drive = calibrated_drive(c.plant, origin, target, result.record);
    write_waveform_files(drive, dir);
    std::ostringstream os;
    write_trajectory_csv(os, target_burst_trajectory(c.plant, target, drive));
    write_text_file(dir / "trajectory.csv", os.str());

    const auto& r = result.record;
    const auto show = [](const SwitchTime& t) { return t.settled ? std::to_string(t.time_ns) + " ns" : "unsettled"; };
    std::cout << dir.string() << "\n"
              << "baseline " << show(r.baseline_switch) << ", rear-only " << show(r.rear_only_switch) << ", final "
              << show(r.final_switch) << (r.mode_hop_detected ? ", mode hop " : "")
              << (r.mode_hop_detected ? (r.mode_hop_corrected ? "corrected" : "unresolved") : "") << "\n";
    return 0;
}

int cmd_campaign(const Options& o)
{
    const auto c = load(o);
    std::vector<ChannelPoint> test_set;
    if (!o.channels_path.empty()) {
        test_set = channels_from_json(read_text_file(o.channels_path));
        if (!o.all_channels) test_set = select_worst_case(c.plant, test_set, c.worst_case);
    } else {
        test_set = select_worst_case(c.plant, place(o, c, obtain_map(o, c)), c.worst_case);
    }
    const auto dir = make_run_dir(o, c, "campaign");
    write_text_file(dir / "test_set.json", channels_to_json(test_set));

    CampaignConfig cc;
    cc.optimizer = c.optimizer;
    cc.parallelism = c.parallelism;
    if (!o.quiet)
        cc.progress = [](std::size_t done, std::size_t total) {
            if (done % 20 == 0 || done == total) std::fprintf(stderr, "  %zu / %zu pairs\n", done, total);
        };
    const auto report = run_campaign(c.plant, test_set, simulated_testbed_factory(c.testbed), cc);
    write_report(report, dir);
    std::cout << dir.string() << "\n" << summary_json(report);
    for (const auto& f : report.summary.failures) std::cerr << "pair failed: " << f << "\n";
    return 0;
}

int cmd_report(const Options& o)
{
    std::vector<SwitchResult> records;
    for (const auto& path : o.record_paths) {
        const auto text = read_text_file(path);
        const auto first = text.find_first_not_of(" \t\r\n");
        if (first != std::string::npos && text[first] == '[') {
            auto more = records_from_json(text);
            records.insert(records.end(), more.begin(), more.end());
        } else {
            records.push_back(switch_result_from_json(text));
        }
    }
    const auto c = load(o);
    const auto dir = make_run_dir(o, c, "report");
    const auto report = build_report(std::move(records));
    write_report(report, dir);
    std::cout << dir.string() << "\n" << summary_json(report);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    Options o;
    CLI::App app{"Pre-emphasis calibration of a simulated fast-switching tunable laser"};
    app.require_subcommand(1);
    app.add_option("-c,--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", o.seed, "Override plant.rng_seed");
    app.add_option("--run-dir", o.run_dir, "Write outputs here instead of a stamped directory under output_dir");
    app.add_flag("-q,--quiet", o.quiet, "No progress on stderr");

    auto* sweep = app.add_subcommand("sweep", "Measure the static tuning map");
    auto* plan = app.add_subcommand("plan", "Place the ITU channel plan and pick the worst-case test set");
    plan->add_option("--map", o.map_path, "Reuse a tuning map CSV")->check(CLI::ExistingFile);

    auto* calibrate = app.add_subcommand("calibrate", "Optimise one ordered channel switch");
    calibrate->add_option("--from", o.from, "Origin channel index")->required();
    calibrate->add_option("--to", o.to, "Target channel index")->required();
    calibrate->add_option("--channels", o.channels_path, "Channel table JSON (default: plan from scratch)")
        ->check(CLI::ExistingFile);
    calibrate->add_option("--map", o.map_path, "Tuning map CSV used when planning")->check(CLI::ExistingFile);

    auto* campaign = app.add_subcommand("campaign", "Calibrate every ordered pair of the worst-case set");
    campaign->add_option("--channels", o.channels_path, "Channel table JSON (default: plan from scratch)")
        ->check(CLI::ExistingFile);
    campaign->add_flag("--all", o.all_channels, "Use the channel table as the test set as given");
    campaign->add_option("--map", o.map_path, "Tuning map CSV used when planning")->check(CLI::ExistingFile);

    auto* report = app.add_subcommand("report", "Aggregate calibration records");
    report->add_option("records", o.record_paths, "records.json or record.json files")
        ->required()
        ->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);
    try {
        if (sweep->parsed()) return cmd_sweep(o);
        if (plan->parsed()) return cmd_plan(o);
        if (calibrate->parsed()) return cmd_calibrate(o);
        if (campaign->parsed()) return cmd_campaign(o);
        if (report->parsed()) return cmd_report(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

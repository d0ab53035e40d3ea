#include "fastswitch/campaign.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "fastswitch/channels.hpp"

namespace fastswitch {

namespace {

double max_offset_after(const FrequencyTrace& trace, double from_ns)
{
    if (trace.empty()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    const double t0 = trace.time_ns.front();
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace.time_ns[i] - t0 < from_ns - 1e-9) continue;
        if (!trace.valid[i]) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, std::abs(trace.offset_ghz[i]));
    }
    return worst;
}

}  // namespace

SwitchResult summarise(const ChannelPoint& origin, const ChannelPoint& target, CalibrationRecord record)
{
    SwitchResult r;
    r.from = origin.index;
    r.to = target.index;
    r.delta_rear_ma = std::abs(target.rear_ma - origin.rear_ma);
    r.rear_only_switch_5ghz = measure_switch_time(record.rear_only_trace, 5.0);
    r.offset_after_15ns_ghz = max_offset_after(record.final_trace, 15.0);
    record.final_trace = {};
    record.rear_only_trace = {};
    r.record = std::move(record);
    return r;
}

std::uint64_t pair_seed(std::uint64_t run_seed, int from, int to)
{
    std::seed_seq seq{static_cast<std::uint32_t>(run_seed), static_cast<std::uint32_t>(run_seed >> 32),
                      static_cast<std::uint32_t>(from), static_cast<std::uint32_t>(to)};
    std::array<std::uint32_t, 2> words{};
    seq.generate(words.begin(), words.end());
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

TestbedFactory simulated_testbed_factory(SimulatedTestbedConfig config)
{
    return [config](const PlantParams& params) -> std::unique_ptr<Testbed> {
        return std::make_unique<SimulatedTestbed>(params, config);
    };
}

SwitchResult calibrate_switch(const PlantParams& params, const ChannelPoint& origin, const ChannelPoint& target,
                              const TestbedFactory& factory, const OptimizerConfig& optimizer, SwitchTraces* traces)
{
    PlantParams p = params;
    p.rng_seed = pair_seed(params.rng_seed, origin.index, target.index);
    try {
        const auto testbed = factory(p);
        auto record = calibrate_pair(p, origin, target, *testbed, optimizer);
        if (traces) *traces = {record.rear_only_trace, record.final_trace};
        return summarise(origin, target, std::move(record));
    } catch (const std::exception& ex) {
        SwitchResult r;
        r.from = origin.index;
        r.to = target.index;
        r.delta_rear_ma = std::abs(target.rear_ma - origin.rear_ma);
        r.error = ex.what();
        if (r.error.empty()) r.error = "unknown error";
        return r;
    }
}

ReferenceSwitch large_rear_swing(const PlantParams& params)
{
    return {mode_centred_channel(params, 0, 4, 0.0, 47.0), mode_centred_channel(params, 1, 4, 0.0, 2.0)};
}

ReferenceSwitch mode_hop_swing(const PlantParams& params)
{
    return {mode_centred_channel(params, 0, 4, 5.0, 37.5), mode_centred_channel(params, 1, 4, 5.0, 12.5)};
}

DriveWaveform calibrated_drive(const PlantParams& params, const ChannelPoint& origin, const ChannelPoint& target,
                               const CalibrationRecord& record)
{
    if (record.phase) return synthesize(params, origin, target, record.rear_weights, record.phase->final_weights);
    return synthesize(params, origin, target, record.rear_weights);
}

FrequencyTrajectory target_burst_trajectory(const PlantParams& params, const ChannelPoint& target,
                                            const DriveWaveform& drive)
{
    LaserPlant plant(params);
    const auto full = plant.simulate(drive, 2);
    const std::size_t per_burst = full.size() / 2;
    const double target_ghz = (target.itu_frequency_thz - params.base_frequency_thz) * 1e3;
    FrequencyTrajectory out;
    out.dt_ns = full.dt_ns;
    for (std::size_t i = per_burst; i < full.size(); ++i) {
        out.offset_ghz.push_back(full.offset_ghz[i] - target_ghz);
        out.cavity_mode.push_back(full.cavity_mode[i]);
        out.front_pair.push_back(full.front_pair[i]);
    }
    return out;
}

std::vector<SwitchResult> run_pairs(const PlantParams& params, const std::vector<ChannelPoint>& test_set,
                                    const TestbedFactory& factory, const CampaignConfig& config)
{
    if (test_set.empty()) throw std::invalid_argument("campaign: empty test set");
    params.validate();
    config.optimizer.validate();

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < test_set.size(); ++i)
        for (std::size_t j = 0; j < test_set.size(); ++j)
            if (i != j) pairs.emplace_back(i, j);

    std::vector<SwitchResult> out(pairs.size());
    std::atomic<std::size_t> next{0};
    std::size_t done = 0;
    std::mutex progress_mutex;

    auto worker = [&] {
        for (std::size_t k = next++; k < pairs.size(); k = next++) {
            const auto [i, j] = pairs[k];
            out[k] = calibrate_switch(params, test_set[i], test_set[j], factory, config.optimizer);
            if (config.progress) {
                std::lock_guard lock(progress_mutex);
                config.progress(++done, pairs.size());
            }
        }
    };

    unsigned threads = config.parallelism > 0 ? static_cast<unsigned>(config.parallelism)
                                              : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(pairs.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return out;
}

}  // namespace fastswitch

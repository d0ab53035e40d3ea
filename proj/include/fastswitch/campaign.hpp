#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fastswitch/channel_point.hpp"
#include "fastswitch/optimizer.hpp"
#include "fastswitch/testbed.hpp"

namespace fastswitch {

/// Outcome of calibrating one ordered channel pair. Traces are dropped; everything the
/// report needs is kept.
struct SwitchResult {
    int from = 0;
    int to = 0;
    double delta_rear_ma = 0.0;  // |I_rear(to) - I_rear(from)|
    std::string error;           // empty unless calibration threw
    CalibrationRecord record;    // final_trace and rear_only_trace left empty
    SwitchTime rear_only_switch_5ghz;
    /// Largest |offset| from 15 ns to the end of the final averaged trace; infinite when
    /// any sample there is out of band.
    double offset_after_15ns_ghz = 0.0;

    bool ok() const { return error.empty(); }
};

/// Fill a SwitchResult from a finished record and release its traces.
SwitchResult summarise(const ChannelPoint& origin, const ChannelPoint& target, CalibrationRecord record);

/// Per-pair plant seed, a function of the run seed and the two channel indices only, so a
/// pair calibrated alone sees the same noise as inside a campaign.
std::uint64_t pair_seed(std::uint64_t run_seed, int from, int to);

using TestbedFactory = std::function<std::unique_ptr<Testbed>(const PlantParams&)>;

TestbedFactory simulated_testbed_factory(SimulatedTestbedConfig config = {});

/// Averaged traces a SwitchResult drops.
struct SwitchTraces {
    FrequencyTrace rear_only;
    FrequencyTrace final_stage;
};

/// calibrate_pair on a fresh testbed seeded with pair_seed. Exceptions become
/// SwitchResult::error. `traces`, when given, receives the averaged traces.
SwitchResult calibrate_switch(const PlantParams& params, const ChannelPoint& origin, const ChannelPoint& target,
                              const TestbedFactory& factory, const OptimizerConfig& optimizer,
                              SwitchTraces* traces = nullptr);

/// Drive for the calibrated switch: rear weights plus phase weights when the phase stage ran.
DriveWaveform calibrated_drive(const PlantParams& params, const ChannelPoint& origin, const ChannelPoint& target,
                               const CalibrationRecord& record);

/// Noise-free laser offset from the target ITU frequency over the target burst of `drive`,
/// time from the target edge.
FrequencyTrajectory target_burst_trajectory(const PlantParams& params, const ChannelPoint& target,
                                            const DriveWaveform& drive);

/// A single switch used to anchor the plant against measured traces.
struct ReferenceSwitch {
    ChannelPoint origin;
    ChannelPoint target;
};

/// 45 mA rear swing (47 -> 2 mA) on front pair 4 with no front scaling, both ends mode-centred.
ReferenceSwitch large_rear_swing(const PlantParams& params);

/// 25 mA rear swing that hops to a neighbouring cavity mode during settling once the rear
/// section alone is optimised.
ReferenceSwitch mode_hop_swing(const PlantParams& params);

struct CampaignConfig {
    OptimizerConfig optimizer;
    int parallelism = 0;  // worker threads; 0 = hardware concurrency
    /// Called after each pair completes with (completed, total). May be called from worker
    /// threads, never concurrently.
    std::function<void(std::size_t, std::size_t)> progress;
};

/// Every ordered pair (i, j), i != j, of the test set. Results come back in pair order
/// (i major) whatever the thread count.
std::vector<SwitchResult> run_pairs(const PlantParams& params, const std::vector<ChannelPoint>& test_set,
                                    const TestbedFactory& factory, const CampaignConfig& config);

}  // namespace fastswitch

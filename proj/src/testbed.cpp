#include "fastswitch/testbed.hpp"

#include <stdexcept>

namespace fastswitch {

SimulatedTestbed::SimulatedTestbed(PlantParams params, SimulatedTestbedConfig config)
    : plant_(std::move(params)), config_(config)
{
}

Observation SimulatedTestbed::apply(const DriveWaveform& drive, double target_frequency_thz)
{
    ++apply_count_;
    const PlantParams& p = plant_.params();
    if (2 * config_.n_average > p.capture_bursts)
        throw std::invalid_argument("testbed: capture holds fewer target bursts than n_average");
    last_trajectory_ = plant_.simulate(drive, p.capture_bursts);
    const double ecl_offset_ghz = (target_frequency_thz - p.base_frequency_thz) * 1e3;
    CaptureOptions options;
    options.target_bursts_only = true;
    const IQCapture capture = plant_.capture_iq(last_trajectory_, ecl_offset_ghz, options);
    const std::size_t per_burst = capture.samples_per_burst();

    Observation obs;
    obs.bursts.reserve(static_cast<std::size_t>(config_.n_average));
    for (int k = 0; k < config_.n_average; ++k) {
        const std::size_t begin = (1 + 2 * static_cast<std::size_t>(k)) * per_burst;
        FrequencyTrace b = estimate_instantaneous_frequency(capture, config_.estimator, begin, begin + per_burst);
        for (std::size_t i = 0; i < b.size(); ++i) b.time_ns[i] = static_cast<double>(i) / capture.sample_rate_gsps;
        obs.bursts.push_back(std::move(b));
    }
    obs.averaged = average_bursts(obs.bursts);
    return obs;
}

double SimulatedTestbed::measure_static_thz(const SectionCurrents& currents, int front_pair)
{
    return plant_.static_frequency_thz(currents, front_pair);
}

}  // namespace fastswitch

#pragma once

#include <cstddef>
#include <vector>

#include "fastswitch/dsp.hpp"
#include "fastswitch/plant.hpp"
#include "fastswitch/waveform.hpp"

namespace fastswitch {

/// What one upload-and-measure cycle returns: the burst-averaged trace the optimiser works
/// on, plus the individual target bursts it was built from.
struct Observation {
    FrequencyTrace averaged;
    std::vector<FrequencyTrace> bursts;
};

/// The measurement loop the optimiser drives: upload a drive waveform, capture the beat
/// against a reference laser parked on the target frequency, return the averaged trace.
/// A hardware backend would implement the same two calls.
class Testbed {
public:
    virtual ~Testbed() = default;

    virtual Observation apply(const DriveWaveform& drive, double target_frequency_thz) = 0;

    /// Steady-state lasing frequency for a static drive (an OSA reading).
    virtual double measure_static_thz(const SectionCurrents& currents, int front_pair) = 0;
};

struct SimulatedTestbedConfig {
    int n_average = 16;
    EstimatorConfig estimator{};
};

/// Testbed backed by LaserPlant: simulate the full capture, estimate, average the target
/// bursts.
class SimulatedTestbed final : public Testbed {
public:
    explicit SimulatedTestbed(PlantParams params, SimulatedTestbedConfig config = {});

    Observation apply(const DriveWaveform& drive, double target_frequency_thz) override;
    double measure_static_thz(const SectionCurrents& currents, int front_pair) override;

    LaserPlant& plant() { return plant_; }
    std::size_t apply_count() const { return apply_count_; }
    const FrequencyTrajectory& last_trajectory() const { return last_trajectory_; }

private:
    LaserPlant plant_;
    SimulatedTestbedConfig config_;
    std::size_t apply_count_ = 0;
    FrequencyTrajectory last_trajectory_;
};

}  // namespace fastswitch

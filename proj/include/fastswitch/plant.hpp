#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "fastswitch/params.hpp"
#include "fastswitch/waveform.hpp"

namespace fastswitch {

/// Dynamic state of the simulated laser.
struct LaserState {
    SectionCurrents effective_currents{};  // clamped to [0, AWG ceiling]
    SectionCurrents slow_components{};
    SectionCurrents drive_filtered{};       // drive after the analog low-pass
    SectionCurrents heat{};       // in the section, mA-equivalent
    SectionCurrents heat_sink{};
    int active_front_pair = 1;
    int cavity_mode = 0;
    double time_ns = 0.0;
};

/// Lasing frequency against time, as an offset from PlantParams::base_frequency_thz.
struct FrequencyTrajectory {
    double dt_ns = 0.02;
    std::vector<double> offset_ghz;
    std::vector<std::int32_t> cavity_mode;
    std::vector<std::int8_t> front_pair;

    std::size_t size() const { return offset_ghz.size(); }
};

struct IQCapture {
    std::vector<std::complex<double>> samples;
    double sample_rate_gsps = 50.0;
    double burst_period_ns = 100.0;
    int n_bursts = 0;

    std::size_t samples_per_burst() const;
};

struct CaptureOptions {
    bool receiver_filter = true;
    bool phase_noise = true;
    bool additive_noise = true;
    /// Leave origin bursts (even burst indices) zero apart from `guard_samples` next to each
    /// target burst. Saves the work when only target bursts are analysed.
    bool target_bursts_only = false;
    std::size_t guard_samples = 64;
};

/// Quasi-static amplitude response of the receiver front end to a beat at `offset_ghz`
/// (Butterworth magnitude of the configured order).
double receiver_response(const PlantParams& params, double offset_ghz);

/// Result of resolving the lasing line for a set of section currents.
struct LasingPoint {
    double offset_ghz = 0.0;   // lasing frequency relative to base
    double mirror_ghz = 0.0;   // mirror reflection peak relative to base
    double comb_ghz = 0.0;     // position of cavity mode 0 relative to base
    int cavity_mode = 0;
    double detuning_ghz = 0.0; // mirror peak minus the lasing mode
};

/// Phenomenological multi-section tunable laser plus coherent measurement chain.
///
/// The mirror peak follows the rear, front and held grating currents; the cavity comb
/// follows the phase current and a fraction of the mirror shift. The laser sits on the
/// comb line nearest the mirror, switching lines only when the detuning exceeds half a
/// mode spacing by the hysteresis margin.
///
/// Each instance owns its RNG (mux delays, phase noise, receiver noise) and is not
/// thread-safe; run one instance per worker.
class LaserPlant {
public:
    explicit LaserPlant(PlantParams params);

    const PlantParams& params() const { return params_; }

    /// Steady-state lasing frequency. Throws RangeError for currents outside a section range
    /// and std::out_of_range for a bad front pair.
    double static_frequency_thz(const SectionCurrents& currents, int front_pair) const;

    /// Steady-state lasing line for arbitrary in-range currents (nearest comb line).
    LasingPoint resolve(const SectionCurrents& currents, int front_pair) const;

    /// Lasing line given a current mode index, applying the hop hysteresis.
    LasingPoint resolve_from(const SectionCurrents& currents, int front_pair, int current_mode,
                             double comb_shift_ghz = 0.0) const;

    /// Play `n_bursts` bursts of the periodic drive (origin burst first) starting from the
    /// steady state of the target channel, sampled at the receiver rate.
    FrequencyTrajectory simulate(const DriveWaveform& drive, int n_bursts);

    /// Beat the trajectory against a reference laser at `ecl_offset_ghz` (relative to base).
    IQCapture capture_iq(const FrequencyTrajectory& trajectory, double ecl_offset_ghz,
                         const CaptureOptions& options = {});

    /// State at the end of the last simulate() call.
    const LaserState& state() const { return state_; }

    /// Mux delays drawn during the last simulate() call, one per select-line change.
    const std::vector<double>& last_mux_delays() const { return mux_delays_; }

private:
    PlantParams params_;
    std::mt19937_64 rng_;
    LaserState state_{};
    std::vector<double> mux_delays_;
    double band_step_ghz_ = 0.0;
    std::vector<bool> scaled_on_even_;  // by front pair
};

}  // namespace fastswitch

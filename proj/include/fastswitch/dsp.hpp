#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fastswitch/plant.hpp"

namespace fastswitch {

/// Instantaneous frequency offset from the target, on a uniform time grid.
struct FrequencyTrace {
    std::vector<double> time_ns;
    std::vector<double> offset_ghz;  // meaningful only where valid
    std::vector<std::uint8_t> valid;

    std::size_t size() const { return time_ns.size(); }
    bool empty() const { return time_ns.empty(); }
    double dt_ns() const { return time_ns.size() > 1 ? time_ns[1] - time_ns[0] : 0.0; }

    /// Throws std::invalid_argument when the grid is not strictly increasing and uniform
    /// or the column lengths differ.
    void check() const;
};

struct EstimatorConfig {
    double window_ns = 1.0;         // moving-average length
    double power_threshold = 0.1;   // fraction of the in-band reference power (-10 dB)
    double reference_power = 1.0;
};

/// Phase-increment estimator: offset(n) = fs/(2 pi) * arg(z(n) conj z(n-1)), smoothed by a
/// centred moving average; samples whose windowed power is below threshold are invalid.
/// The time axis starts at 0 at the first capture sample.
FrequencyTrace estimate_instantaneous_frequency(const IQCapture& capture, const EstimatorConfig& config = {});

/// Same estimate restricted to capture samples [begin, end); the time axis starts at
/// begin / fs. Windows near the edges still draw on samples outside the range.
FrequencyTrace estimate_instantaneous_frequency(const IQCapture& capture, const EstimatorConfig& config,
                                               std::size_t begin, std::size_t end);

/// Cut out burst `index` (0-based) with its time axis restarted at 0.
FrequencyTrace burst_slice(const FrequencyTrace& trace, double burst_period_ns, std::size_t index);

/// Pointwise average of `n_average` target bursts. Target bursts are those with index
/// first_target, first_target + 2, ...; a point is valid when valid in at least half the
/// bursts and its offset is the mean over the valid ones.
FrequencyTrace segment_and_average(const FrequencyTrace& trace, double burst_period_ns, int n_average,
                                   std::size_t first_target = 1);

/// Average of already-aligned, equal-length burst traces.
FrequencyTrace average_bursts(const std::vector<FrequencyTrace>& bursts);

inline constexpr double kFallbackErrorGhz = 25.0;

struct BinnedError {
    std::vector<double> e;          // GHz, one per tap
    double bin_width_ns = 4.0;
    std::vector<std::uint8_t> filled;  // false where the fallback value was used
};

/// Mean offset over the valid samples of each of the first K bins after t = 0. Empty bins
/// take +/-25 GHz, signed like the first later bin with signal (searching to the end of the
/// trace), else like the nearest earlier one, else positive.
BinnedError bin_errors(const FrequencyTrace& trace, int K, double bin_width_ns = 4.0);

struct SwitchTime {
    bool settled = false;
    double time_ns = 0.0;  // valid only when settled
};

/// Earliest T with every sample in [T, end] valid and within +/-threshold.
SwitchTime measure_switch_time(const FrequencyTrace& trace, double threshold_ghz = 10.0);

struct HopRule {
    double threshold_ghz = 10.0;
    double mode_spacing_ghz = 45.0;
    double min_dwell_ns = 2.0;
};

struct ModeHop {
    bool detected = false;
    double start_ns = 0.0;
    double end_ns = 0.0;
};

/// After the first in-band sample, an excursion that is invalid or beyond threshold plus
/// half a mode spacing, lasting at least min_dwell and followed by a return to band.
ModeHop detect_mode_hop(const FrequencyTrace& trace, const HopRule& rule = {});

}  // namespace fastswitch

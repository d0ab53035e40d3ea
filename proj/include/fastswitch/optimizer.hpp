#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fastswitch/channel_point.hpp"
#include "fastswitch/dsp.hpp"
#include "fastswitch/testbed.hpp"
#include "fastswitch/waveform.hpp"

namespace fastswitch {

struct OptimizerConfig {
    double mu = 0.02;           // (GHz V)^-1, rear additive update
    double mu_phase = 0.01;     // (GHz V)^-1, phase multiplicative update
    int n_updates = 10;
    int n_seeds = 10;
    double seed_step = 0.2;     // first-tap grid: 0, step, 2*step, ...
    int k_rising = kRisingTaps;
    int k_falling = kFallingTaps;
    double bin_width_ns = 4.0;
    double settle_threshold_ghz = 10.0;
    double weight_limit = 3.0;  // |h(k)| bound for additive taps
    double phase_weight_min = 0.05;
    double phase_weight_max = 3.0;
    double mode_spacing_ghz = 45.0;  // for the mode-hop rule
    /// Finish on the measured iterate with the shortest switch time rather than the last one.
    /// Every iterate is measured anyway, so this costs no extra captures.
    bool keep_best = true;

    void validate() const;
    HopRule hop_rule() const { return HopRule{settle_threshold_ghz, mode_spacing_ghz, 2.0}; }
};

/// h'(k) = h(k) - mu e(k) x(k), elementwise.
std::vector<double> update_step(std::span<const double> h, std::span<const double> e,
                                std::span<const double> x, double mu);

/// Raised when no seed brings the target into the receiver band.
class SeedSearchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SeedResult {
    std::vector<double> h;
    double first_tap = 0.0;
    double entry_ns = 0.0;  // start of the first valid run of at least one bin
    int evaluations = 0;
};

/// Try first taps 0, step, ..., (n_seeds-1)*step with the other taps at zero; keep the one
/// whose averaged trace enters the receiver band earliest (smaller tap on ties).
SeedResult seed_search(const PlantParams& params, const ChannelPoint& origin, const ChannelPoint& target,
                       Testbed& testbed, const OptimizerConfig& config);

struct PhaseCalibration {
    std::vector<std::vector<double>> history;  // n_updates + 1 snapshots
    std::vector<BinnedError> errors;
    std::size_t chosen = 0;  // index into history of final_weights
    PreEmphasisWeights final_weights;
    bool hop_before = false;
    bool hop_after = false;
    bool unresolved = false;
};

struct CalibrationRecord {
    int from = 0;
    int to = 0;
    Edge rear_edge = Edge::Rising;
    double seed_first_tap = 0.0;
    std::vector<std::vector<double>> rear_history;  // n_updates + 1 snapshots, seed first
    std::vector<BinnedError> rear_errors;            // n_updates
    std::size_t rear_chosen = 0;                     // index into rear_history of rear_weights
    PreEmphasisWeights rear_weights;
    std::optional<PhaseCalibration> phase;
    int clamp_events = 0;
    SwitchTime baseline_switch;       // no pre-emphasis
    SwitchTime rear_only_switch;      // after the rear loop
    SwitchTime final_switch;          // 10 GHz, after any phase stage
    SwitchTime final_switch_5ghz;
    std::vector<double> burst_switch_ns;  // final stage, per burst (unsettled bursts omitted)
    bool mode_hop_detected = false;   // on the rear-only trace
    bool mode_hop_corrected = false;
    FrequencyTrace final_trace;
    FrequencyTrace rear_only_trace;

    double mean_burst_switch_ns() const;
};

/// Seed search then n_updates of synthesize -> apply -> bin -> update on the rear section.
CalibrationRecord optimize_rear(const PlantParams& params, const ChannelPoint& origin, const ChannelPoint& target,
                                Testbed& testbed, const OptimizerConfig& config);

/// Multiplicative 4-tap loop on the phase section with the rear weights held. Fills
/// record.phase and refreshes the final metrics. Does nothing unless the rear-only trace
/// shows a mode hop.
void optimize_phase(const PlantParams& params, const ChannelPoint& origin, const ChannelPoint& target,
                    Testbed& testbed, const OptimizerConfig& config, CalibrationRecord& record);

/// optimize_rear followed by optimize_phase when a hop is detected.
CalibrationRecord calibrate_pair(const PlantParams& params, const ChannelPoint& origin, const ChannelPoint& target,
                                 Testbed& testbed, const OptimizerConfig& config);

}  // namespace fastswitch

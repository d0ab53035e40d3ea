#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fastswitch/channel_point.hpp"
#include "fastswitch/params.hpp"

namespace fastswitch {

// ---------------------------------------------------------------------------
// IV map

/// Supply voltage needed for `current_ma` on `section`. Throws RangeError outside
/// [0, range].
double current_to_voltage(const PlantParams& params, Section section, double current_ma);

/// Exact inverse of current_to_voltage on [V(0), V(range)]. Throws RangeError outside.
double voltage_to_current(const PlantParams& params, Section section, double volts);

/// Drive current the supply delivers for an arbitrary AWG voltage. Above the section range
/// the diode curve continues; below zero bias the supply sinks current (carrier extraction)
/// with the small-signal slope of the curve at 0 mA.
double drive_current(const IvCurve& iv, double volts);

// ---------------------------------------------------------------------------
// Front grating routing

/// D1-D4 select levels plus which physical gratings the even/odd AWG channels reach.
struct FrontRouting {
    std::array<std::uint8_t, 4> d{};  // D1, D2, D3, D4
    int even_grating = 2;            // 2, 4, 6 or 8
    int odd_grating = 1;             // 1, 3, 5 or 7
    bool scaled_on_even = true;      // grating i+1 (the scaled one) sits on the even path

    bool operator==(const FrontRouting&) const = default;
};

/// Pair i drives gratings i and i+1. Throws std::out_of_range unless 1 <= pair <= 7.
FrontRouting front_pair_encoding(int front_pair);

/// Inverse of front_pair_encoding on the select levels; returns 0 for codes that do not
/// address two adjacent gratings.
int decode_front_pair(const std::array<std::uint8_t, 4>& d);

/// Held grating current for the lower grating of a pair.
inline constexpr double kHeldGratingMa = 5.0;

/// Section currents (rear, phase, front even, front odd) that realise a channel point.
SectionCurrents channel_currents(const PlantParams& params, const ChannelPoint& point);

// ---------------------------------------------------------------------------
// Pre-emphasis

enum class WeightMode : std::uint8_t { Additive, Multiplicative };
enum class Edge : std::uint8_t { Rising, Falling };

std::string to_string(WeightMode m);
std::string to_string(Edge e);

struct PreEmphasisWeights {
    std::vector<double> h;
    WeightMode mode = WeightMode::Additive;
    Section section = Section::Rear;
    Edge edge = Edge::Rising;
    double bin_width_ns = 4.0;

    std::size_t size() const { return h.size(); }

    /// Checks the tap-count and sign rules for the mode; throws std::invalid_argument.
    void validate() const;

    static PreEmphasisWeights additive(Section section, Edge edge, std::vector<double> h);
    static PreEmphasisWeights multiplicative(Section section, Edge edge, std::vector<double> h);
};

inline constexpr int kRisingTaps = 2;
inline constexpr int kFallingTaps = 4;
inline constexpr int kPhaseTaps = 4;

/// Rising when the section voltage increases from `from` to `to`.
Edge classify_edge(const PlantParams& params, Section section, const ChannelPoint& from,
                   const ChannelPoint& to);

// ---------------------------------------------------------------------------
// Drive waveform

/// One period of the square drive pattern: a burst on the origin channel followed by a
/// burst on the target channel. The AWG replays it for as long as the capture runs.
struct DriveWaveform {
    double sample_rate_msps = 250.0;
    double burst_period_ns = 100.0;
    int awg_bits = 12;
    PerSection<std::vector<double>> volts;        // quantised samples
    PerSection<std::vector<std::uint16_t>> codes;  // DAC codes behind `volts`
    std::array<std::vector<std::uint8_t>, 4> select;  // D1-D4 per sample
    PerSection<double> delta_v{};                  // V(target) - V(origin), before emphasis
    PerSection<double> base_volts_from{};          // plateau voltages, unquantised
    PerSection<double> base_volts_to{};
    bool clamped = false;                          // some emphasised sample hit the AWG window
    std::vector<std::string> clamp_notes;

    std::size_t samples_per_burst() const;
    std::size_t size() const { return volts[Section::Rear].size(); }
    double sample_period_ns() const { return 1e3 / sample_rate_msps; }
};

/// Build one period of drive for origin -> target. Rear weights are added as dV*h(k) on the
/// first K samples after the target edge; phase weights scale the first K phase samples.
DriveWaveform synthesize(const PlantParams& params, const ChannelPoint& origin,
                         const ChannelPoint& target, const PreEmphasisWeights& rear,
                         const std::optional<PreEmphasisWeights>& phase = std::nullopt);

/// Midpoint-referenced drive samples x(k) of `section` for the K samples after the target
/// edge, without emphasis. This is the regressor used by the additive update.
std::vector<double> centred_drive_samples(const DriveWaveform& drive, Section section, std::size_t k);

/// Raw (unemphasised) target-plateau voltages, the regressor used by the multiplicative update.
std::vector<double> plateau_drive_samples(const DriveWaveform& drive, Section section, std::size_t k);

/// Quantise to the section's AWG window. Returns the DAC code; `clamped` is set when the
/// requested voltage fell outside the window.
std::uint16_t quantise(const IvCurve& iv, int bits, double volts, bool& clamped);
double code_to_volts(const IvCurve& iv, int bits, std::uint16_t code);

}  // namespace fastswitch

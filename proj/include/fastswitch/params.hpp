#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fastswitch {

/// The four fast-driven laser sections. The SOA and gain sections run from
/// constant supplies and are not modelled dynamically.
enum class Section : std::uint8_t { Rear = 0, Phase = 1, FrontEven = 2, FrontOdd = 3 };

inline constexpr std::array<Section, 4> kDynamicSections = {Section::Rear, Section::Phase,
                                                            Section::FrontEven, Section::FrontOdd};

constexpr std::size_t index_of(Section s) { return static_cast<std::size_t>(s); }

std::string_view to_string(Section s);
Section section_from_string(std::string_view name);

/// A current or voltage outside the permitted window of a section.
class RangeError : public std::out_of_range {
public:
    RangeError(Section section, const std::string& what)
        : std::out_of_range(std::string(to_string(section)) + ": " + what), section_(section) {}

    Section section() const { return section_; }

private:
    Section section_;
};

/// Per-section quantity, indexed by Section.
template <typename T>
struct PerSection {
    std::array<T, 4> values{};

    T& operator[](Section s) { return values[index_of(s)]; }
    const T& operator[](Section s) const { return values[index_of(s)]; }

    bool operator==(const PerSection&) const = default;
};

using SectionCurrents = PerSection<double>;  // mA

/// Diode-like supply map V = v0 + a*ln(1 + I/b) + c*I, plus the AWG output window
/// [v_min, v_max] that the 12-bit DAC spans for this section.
struct IvCurve {
    double v0 = 0.8;   // V at zero bias
    double a = 0.15;   // V
    double b = 10.0;   // mA
    double c = 0.02;   // V/mA
    double v_min = -1.0;
    double v_max = 3.0;
};

struct PlantParams {
    // Static tuning map.
    double base_frequency_thz = 190.65;
    double tuning_span_thz = 6.15;
    double rear_range_ma = 60.0;
    double phase_range_ma = 12.0;
    double front_range_ma = 5.0;
    int n_front_pairs = 7;
    double rear_tuning_ghz = 1000.0;        // mirror shift as rear current saturates
    double rear_saturation_ma = 40.0;       // e-folding current of the rear tuning curve
    double front_tuning_ghz = 200.0;        // mirror shift over the full front scaling range
    double cavity_mode_spacing_ghz = 45.0;
    double hop_hysteresis = 0.1;            // fraction of the mode spacing
    double phase_anchor_ma = 6.0;           // phase current at which the comb sits on its anchor
    double comb_rear_coupling = 0.12;       // fraction of the mirror shift that also moves the comb
    double mode_pulling = 0.03;             // fraction of the mirror detuning seen in the lasing line

    // Fixed sections (constant supplies).
    double soa_current_ma = 85.0;
    double gain_current_ma = 140.0;

    // Dynamics.
    double carrier_time_constant_ns = 1.5;
    PerSection<double> slow_time_constant_ns{{20.0, 20.0, 20.0, 20.0}};
    PerSection<double> slow_fraction{{0.08, 0.05, 0.02, 0.02}};
    // Transient self-heating opposes carrier tuning. Heat builds in the section with the rise
    // time and drains to the heatsink with the decay time, so a current step leaves a delayed
    // dip of thermal_gain times the built-up heat and no static shift.
    PerSection<double> thermal_gain{{0.0, 0.4, 0.0, 0.0}};
    PerSection<double> thermal_rise_ns{{4.0, 1.0, 4.0, 4.0}};
    PerSection<double> thermal_decay_ns{{8.0, 2.0, 8.0, 8.0}};
    // Transient rear heating red-shifts the cavity comb, GHz per mA of built-up heat.
    double rear_heat_comb_ghz_per_ma = 0.0;
    double drive_bandwidth_mhz = 125.0;
    double awg_sample_rate_msps = 250.0;
    int awg_bits = 12;
    double mux_delay_min_ns = 3.0;
    double mux_delay_max_ns = 7.0;
    PerSection<IvCurve> iv_curves{{IvCurve{0.80, 0.15, 10.0, 0.020, -2.0, 3.0},
                                   IvCurve{0.70, 0.10, 2.0, 0.030, 0.0, 1.5},
                                   IvCurve{0.70, 0.10, 1.0, 0.050, 0.2, 1.2},
                                   IvCurve{0.70, 0.10, 1.0, 0.050, 0.2, 1.2}}};

    // Measurement chain.
    double combined_linewidth_mhz = 1.0;
    double rx_bandwidth_ghz = 22.0;
    int rx_filter_order = 10;
    double rx_sample_rate_gsps = 50.0;
    double capture_snr_db = 20.0;
    double burst_period_ns = 100.0;
    int capture_bursts = 32;

    std::uint64_t rng_seed = 1;

    double range_ma(Section s) const;
    /// Mirror shift produced by a rear current, in GHz.
    double rear_tuning(double rear_ma) const;
    double band_step_ghz() const;

    /// Throws std::invalid_argument describing the first violated constraint.
    void validate() const;
};

}  // namespace fastswitch

#include "fastswitch/params.hpp"

#include <cmath>

namespace fastswitch {

std::string_view to_string(Section s)
{
    switch (s) {
        case Section::Rear: return "rear";
        case Section::Phase: return "phase";
        case Section::FrontEven: return "front_even";
        case Section::FrontOdd: return "front_odd";
    }
    return "unknown";
}

Section section_from_string(std::string_view name)
{
    for (Section s : kDynamicSections)
        if (to_string(s) == name) return s;
    throw std::invalid_argument("unknown section '" + std::string(name) + "'");
}

double PlantParams::range_ma(Section s) const
{
    switch (s) {
        case Section::Rear: return rear_range_ma;
        case Section::Phase: return phase_range_ma;
        case Section::FrontEven:
        case Section::FrontOdd: return front_range_ma;
    }
    return 0.0;
}

double PlantParams::rear_tuning(double rear_ma) const
{
    return rear_tuning_ghz * (1.0 - std::exp(-rear_ma / rear_saturation_ma));
}

double PlantParams::band_step_ghz() const
{
    return (tuning_span_thz * 1000.0 - front_tuning_ghz - rear_tuning(rear_range_ma)) /
           static_cast<double>(n_front_pairs - 1);
}

namespace {

void require(bool ok, const char* what)
{
    if (!ok) throw std::invalid_argument(std::string("invalid plant parameters: ") + what);
}

}  // namespace

void PlantParams::validate() const
{
    require(tuning_span_thz > 0.0, "tuning_span must be positive");
    require(rear_range_ma > 0.0 && phase_range_ma > 0.0 && front_range_ma > 0.0,
            "section ranges must be positive");
    require(n_front_pairs >= 2, "need at least two front pairs");
    require(rear_tuning_ghz > 0.0 && rear_saturation_ma > 0.0, "rear tuning curve must be increasing");
    require(front_tuning_ghz >= 0.0, "front_tuning must be non-negative");
    require(band_step_ghz() > 0.0, "tuning span too small for the section tuning ranges");
    require(cavity_mode_spacing_ghz > 0.0, "cavity_mode_spacing must be positive");
    require(hop_hysteresis >= 0.0 && hop_hysteresis < 0.5, "hop_hysteresis must lie in [0, 0.5)");
    require(comb_rear_coupling >= 0.0 && comb_rear_coupling < 1.0, "comb_rear_coupling must lie in [0, 1)");
    require(mode_pulling >= 0.0 && mode_pulling < 1.0, "mode_pulling must lie in [0, 1)");
    require(carrier_time_constant_ns > 0.0, "carrier_time_constant must be positive");
    for (Section s : kDynamicSections) {
        require(slow_fraction[s] >= 0.0 && slow_fraction[s] < 1.0, "slow_fraction must lie in [0, 1)");
        require(carrier_time_constant_ns < slow_time_constant_ns[s],
                "carrier_time_constant must be shorter than slow_time_constant");
        require(thermal_gain[s] >= 0.0, "thermal_gain must be non-negative");
        require(thermal_rise_ns[s] > 0.0 && thermal_decay_ns[s] > thermal_rise_ns[s],
                "thermal decay time must exceed a positive rise time");
        const IvCurve& iv = iv_curves[s];
        require(iv.a >= 0.0 && iv.b > 0.0 && iv.c >= 0.0 && (iv.a > 0.0 || iv.c > 0.0),
                "IV curve must be strictly increasing");
        require(iv.v_min < iv.v_max, "AWG window must be non-empty");
    }
    require(drive_bandwidth_mhz > 0.0 && awg_sample_rate_msps > 0.0, "drive chain rates must be positive");
    require(awg_bits >= 2 && awg_bits <= 24, "awg_bits out of range");
    require(mux_delay_min_ns >= 0.0 && mux_delay_min_ns <= mux_delay_max_ns, "mux delay range invalid");
    require(combined_linewidth_mhz >= 0.0, "linewidth must be non-negative");
    require(rx_bandwidth_ghz > 0.0 && rx_sample_rate_gsps > 0.0, "receiver rates must be positive");
    require(rx_filter_order >= 1, "rx_filter_order must be at least 1");
    require(burst_period_ns > 0.0 && capture_bursts >= 2, "capture must hold at least one burst pair");
    const double awg_per_burst = burst_period_ns * awg_sample_rate_msps * 1e-3;
    require(std::abs(awg_per_burst - std::round(awg_per_burst)) < 1e-9,
            "burst period must be a whole number of AWG samples");
    const double rx_per_awg = rx_sample_rate_gsps * 1e3 / awg_sample_rate_msps;
    require(std::abs(rx_per_awg - std::round(rx_per_awg)) < 1e-9,
            "receiver rate must be a whole multiple of the AWG rate");
}

}  // namespace fastswitch

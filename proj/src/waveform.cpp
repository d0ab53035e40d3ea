#include "fastswitch/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fastswitch {

namespace {

double curve(const IvCurve& iv, double current_ma)
{
    return iv.v0 + iv.a * std::log1p(current_ma / iv.b) + iv.c * current_ma;
}

double curve_slope(const IvCurve& iv, double current_ma)
{
    return iv.a / (iv.b + current_ma) + iv.c;
}

// Newton on the concave increasing curve, started above the root so iterates decrease
// monotonically onto it.
double invert_curve(const IvCurve& iv, double volts)
{
    const double target = volts - iv.v0;
    double i = iv.c > 0.0 ? target / iv.c : iv.b * std::expm1(target / iv.a);
    if (iv.c > 0.0 && iv.a > 0.0) i = std::max(i, 0.0);
    for (int it = 0; it < 100; ++it) {
        const double f = curve(iv, i) - volts;
        const double step = f / curve_slope(iv, i);
        i -= step;
        if (std::abs(step) < 1e-13 * std::max(1.0, std::abs(i))) break;
    }
    return i;
}

std::string format_range(double lo, double hi, const char* unit)
{
    std::ostringstream os;
    os << "[" << lo << ", " << hi << "] " << unit;
    return os.str();
}

}  // namespace

double current_to_voltage(const PlantParams& params, Section section, double current_ma)
{
    const double range = params.range_ma(section);
    if (!(current_ma >= 0.0 && current_ma <= range)) {
        std::ostringstream os;
        os << "current " << current_ma << " mA outside " << format_range(0.0, range, "mA");
        throw RangeError(section, os.str());
    }
    return curve(params.iv_curves[section], current_ma);
}

double voltage_to_current(const PlantParams& params, Section section, double volts)
{
    const IvCurve& iv = params.iv_curves[section];
    const double range = params.range_ma(section);
    const double lo = curve(iv, 0.0);
    const double hi = curve(iv, range);
    if (!(volts >= lo && volts <= hi)) {
        std::ostringstream os;
        os << "voltage " << volts << " V outside " << format_range(lo, hi, "V");
        throw RangeError(section, os.str());
    }
    return std::clamp(invert_curve(iv, volts), 0.0, range);
}

double drive_current(const IvCurve& iv, double volts)
{
    if (volts <= iv.v0) return (volts - iv.v0) / curve_slope(iv, 0.0);
    return invert_curve(iv, volts);
}

FrontRouting front_pair_encoding(int front_pair)
{
    if (front_pair < 1 || front_pair > 7)
        throw std::out_of_range("front pair " + std::to_string(front_pair) + " outside [1, 7]");
    FrontRouting r;
    const int lower = front_pair;
    const int upper = front_pair + 1;
    r.even_grating = (lower % 2 == 0) ? lower : upper;
    r.odd_grating = (lower % 2 == 1) ? lower : upper;
    r.scaled_on_even = (upper % 2 == 0);
    const int even_code = r.even_grating / 2 - 1;  // 2,4,6,8 -> 0..3
    const int odd_code = (r.odd_grating - 1) / 2;  // 1,3,5,7 -> 0..3
    r.d = {static_cast<std::uint8_t>((even_code >> 1) & 1), static_cast<std::uint8_t>(even_code & 1),
           static_cast<std::uint8_t>((odd_code >> 1) & 1), static_cast<std::uint8_t>(odd_code & 1)};
    return r;
}

int decode_front_pair(const std::array<std::uint8_t, 4>& d)
{
    const int even_grating = 2 * ((d[0] << 1 | d[1]) + 1);
    const int odd_grating = 2 * (d[2] << 1 | d[3]) + 1;
    if (std::abs(even_grating - odd_grating) != 1) return 0;
    return std::min(even_grating, odd_grating);
}

SectionCurrents channel_currents(const PlantParams& params, const ChannelPoint& point)
{
    const FrontRouting route = front_pair_encoding(point.front_pair);
    SectionCurrents c;
    c[Section::Rear] = point.rear_ma;
    c[Section::Phase] = point.phase_ma;
    const double held = std::min(kHeldGratingMa, params.front_range_ma);
    c[Section::FrontEven] = route.scaled_on_even ? point.front_scaling_ma : held;
    c[Section::FrontOdd] = route.scaled_on_even ? held : point.front_scaling_ma;
    return c;
}

std::string to_string(WeightMode m)
{
    return m == WeightMode::Additive ? "additive" : "multiplicative";
}

std::string to_string(Edge e)
{
    return e == Edge::Rising ? "rising" : "falling";
}

void PreEmphasisWeights::validate() const
{
    if (!(bin_width_ns > 0.0)) throw std::invalid_argument("pre-emphasis bin width must be positive");
    if (mode == WeightMode::Additive) {
        const std::size_t expected = edge == Edge::Rising ? kRisingTaps : kFallingTaps;
        if (h.size() != expected)
            throw std::invalid_argument("additive " + to_string(edge) + " weights need " +
                                        std::to_string(expected) + " taps, got " +
                                        std::to_string(h.size()));
    } else {
        if (h.size() != static_cast<std::size_t>(kPhaseTaps))
            throw std::invalid_argument("multiplicative weights need 4 taps, got " +
                                        std::to_string(h.size()));
        for (double w : h)
            if (!(w > 0.0)) throw std::invalid_argument("multiplicative weights must be positive");
    }
    for (double w : h)
        if (!std::isfinite(w)) throw std::invalid_argument("pre-emphasis weight is not finite");
}

PreEmphasisWeights PreEmphasisWeights::additive(Section section, Edge edge, std::vector<double> h)
{
    PreEmphasisWeights w;
    w.h = std::move(h);
    w.mode = WeightMode::Additive;
    w.section = section;
    w.edge = edge;
    return w;
}

PreEmphasisWeights PreEmphasisWeights::multiplicative(Section section, Edge edge, std::vector<double> h)
{
    PreEmphasisWeights w = additive(section, edge, std::move(h));
    w.mode = WeightMode::Multiplicative;
    return w;
}

Edge classify_edge(const PlantParams& params, Section section, const ChannelPoint& from,
                   const ChannelPoint& to)
{
    const double v_from = current_to_voltage(params, section, channel_currents(params, from)[section]);
    const double v_to = current_to_voltage(params, section, channel_currents(params, to)[section]);
    return v_to >= v_from ? Edge::Rising : Edge::Falling;
}

std::uint16_t quantise(const IvCurve& iv, int bits, double volts, bool& clamped)
{
    const double full = static_cast<double>((1u << bits) - 1u);
    const double pos = (volts - iv.v_min) / (iv.v_max - iv.v_min) * full;
    clamped = !(pos >= -0.5 && pos <= full + 0.5);
    return static_cast<std::uint16_t>(std::clamp(std::round(pos), 0.0, full));
}

double code_to_volts(const IvCurve& iv, int bits, std::uint16_t code)
{
    const double full = static_cast<double>((1u << bits) - 1u);
    return iv.v_min + (iv.v_max - iv.v_min) * static_cast<double>(code) / full;
}

std::size_t DriveWaveform::samples_per_burst() const
{
    return static_cast<std::size_t>(std::llround(burst_period_ns * sample_rate_msps * 1e-3));
}

DriveWaveform synthesize(const PlantParams& params, const ChannelPoint& origin,
                         const ChannelPoint& target, const PreEmphasisWeights& rear,
                         const std::optional<PreEmphasisWeights>& phase)
{
    rear.validate();
    if (rear.mode != WeightMode::Additive || rear.section != Section::Rear)
        throw std::invalid_argument("rear weights must be additive on the rear section");
    if (phase) {
        phase->validate();
        if (phase->mode != WeightMode::Multiplicative || phase->section != Section::Phase)
            throw std::invalid_argument("phase weights must be multiplicative on the phase section");
    }

    DriveWaveform w;
    w.sample_rate_msps = params.awg_sample_rate_msps;
    w.burst_period_ns = params.burst_period_ns;
    w.awg_bits = params.awg_bits;
    const std::size_t n = w.samples_per_burst();

    const SectionCurrents from = channel_currents(params, origin);
    const SectionCurrents to = channel_currents(params, target);

    for (Section s : kDynamicSections) {
        const double v_from = current_to_voltage(params, s, from[s]);
        const double v_to = current_to_voltage(params, s, to[s]);
        w.base_volts_from[s] = v_from;
        w.base_volts_to[s] = v_to;
        w.delta_v[s] = v_to - v_from;

        std::vector<double> y(2 * n);
        std::fill(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n), v_from);
        std::fill(y.begin() + static_cast<std::ptrdiff_t>(n), y.end(), v_to);

        if (s == Section::Rear) {
            for (std::size_t k = 0; k < rear.size() && k < n; ++k) y[n + k] += w.delta_v[s] * rear.h[k];
        } else if (s == Section::Phase && phase) {
            for (std::size_t k = 0; k < phase->size() && k < n; ++k) y[n + k] *= phase->h[k];
        }

        const IvCurve& iv = params.iv_curves[s];
        auto& codes = w.codes[s];
        auto& volts = w.volts[s];
        codes.resize(y.size());
        volts.resize(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            bool clamped = false;
            codes[i] = quantise(iv, params.awg_bits, y[i], clamped);
            volts[i] = code_to_volts(iv, params.awg_bits, codes[i]);
            if (clamped) {
                w.clamped = true;
                std::ostringstream os;
                os << to_string(s) << " sample " << i << " requested " << y[i] << " V, clamped to "
                   << volts[i] << " V";
                w.clamp_notes.push_back(os.str());
            }
        }
    }

    const FrontRouting r_from = front_pair_encoding(origin.front_pair);
    const FrontRouting r_to = front_pair_encoding(target.front_pair);
    for (std::size_t line = 0; line < 4; ++line) {
        auto& sel = w.select[line];
        sel.assign(2 * n, r_to.d[line]);
        std::fill(sel.begin(), sel.begin() + static_cast<std::ptrdiff_t>(n), r_from.d[line]);
    }
    return w;
}

std::vector<double> centred_drive_samples(const DriveWaveform& drive, Section section, std::size_t k)
{
    const double mid = 0.5 * (drive.base_volts_from[section] + drive.base_volts_to[section]);
    return std::vector<double>(k, drive.base_volts_to[section] - mid);
}

std::vector<double> plateau_drive_samples(const DriveWaveform& drive, Section section, std::size_t k)
{
    return std::vector<double>(k, drive.base_volts_to[section]);
}

}  // namespace fastswitch

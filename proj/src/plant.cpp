#include "fastswitch/plant.hpp"

#include <algorithm>

#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fastswitch {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct FrontRoles {
    double scaled_ma;
    double held_ma;
};

FrontRoles front_roles(const SectionCurrents& c, bool scaled_on_even)
{
    return scaled_on_even ? FrontRoles{c[Section::FrontEven], c[Section::FrontOdd]}
                          : FrontRoles{c[Section::FrontOdd], c[Section::FrontEven]};
}

}  // namespace

double receiver_response(const PlantParams& params, double offset_ghz)
{
    const double x2 = (offset_ghz / params.rx_bandwidth_ghz) * (offset_ghz / params.rx_bandwidth_ghz);
    double xn = 1.0;
    for (int k = 0; k < params.rx_filter_order; ++k) xn *= x2;
    return 1.0 / std::sqrt(1.0 + xn);
}

std::size_t IQCapture::samples_per_burst() const
{
    return static_cast<std::size_t>(std::llround(sample_rate_gsps * burst_period_ns));
}

LaserPlant::LaserPlant(PlantParams params) : params_(std::move(params)), rng_(params_.rng_seed)
{
    params_.validate();
    band_step_ghz_ = params_.band_step_ghz();
    scaled_on_even_.assign(static_cast<std::size_t>(params_.n_front_pairs) + 1, true);
    for (int pair = 1; pair <= params_.n_front_pairs; ++pair)
        scaled_on_even_[static_cast<std::size_t>(pair)] = front_pair_encoding(pair).scaled_on_even;
}

namespace {

// Electrical power scales as I^2; normalised so a full-range current gives range mA.
double dissipation(double current_ma, double range_ma)
{
    return current_ma * current_ma / range_ma;
}

}  // namespace

LasingPoint LaserPlant::resolve_from(const SectionCurrents& c, int front_pair, int current_mode,
                                     double comb_shift_ghz) const
{
    const PlantParams& p = params_;
    if (front_pair < 1 || front_pair > p.n_front_pairs)
        throw std::out_of_range("front pair " + std::to_string(front_pair) + " outside [1, " +
                                std::to_string(p.n_front_pairs) + "]");
    const FrontRoles f = front_roles(c, scaled_on_even_[static_cast<std::size_t>(front_pair)]);
    const double held_nominal = std::min(kHeldGratingMa, p.front_range_ma);

    LasingPoint lp;
    lp.mirror_ghz = band_step_ghz_ * (front_pair - 1) +
                    p.front_tuning_ghz * (f.scaled_ma / p.front_range_ma) +
                    0.5 * p.front_tuning_ghz * ((f.held_ma - held_nominal) / p.front_range_ma) +
                    p.rear_tuning(c[Section::Rear]);
    const double spacing = p.cavity_mode_spacing_ghz;
    lp.comb_ghz = spacing * (c[Section::Phase] - p.phase_anchor_ma) / p.phase_range_ma +
                  p.comb_rear_coupling * lp.mirror_ghz + comb_shift_ghz;

    const double rel = lp.mirror_ghz - lp.comb_ghz;
    int mode = current_mode;
    const double hop_at = spacing * (0.5 + 0.5 * p.hop_hysteresis);
    if (std::abs(rel - mode * spacing) > hop_at) mode = static_cast<int>(std::lround(rel / spacing));

    lp.cavity_mode = mode;
    const double line = lp.comb_ghz + mode * spacing;
    lp.detuning_ghz = lp.mirror_ghz - line;
    lp.offset_ghz = line + p.mode_pulling * lp.detuning_ghz;
    return lp;
}

LasingPoint LaserPlant::resolve(const SectionCurrents& c, int front_pair) const
{
    const PlantParams& p = params_;
    // Start from the nearest line: an initial guess far outside the hop window forces it.
    LasingPoint probe = resolve_from(c, front_pair, 0);
    const double rel = probe.mirror_ghz - probe.comb_ghz;
    const int nearest = static_cast<int>(std::lround(rel / p.cavity_mode_spacing_ghz));
    return resolve_from(c, front_pair, nearest);
}

double LaserPlant::static_frequency_thz(const SectionCurrents& currents, int front_pair) const
{
    if (front_pair < 1 || front_pair > params_.n_front_pairs)
        throw std::out_of_range("front pair " + std::to_string(front_pair) + " outside [1, " +
                                std::to_string(params_.n_front_pairs) + "]");
    for (Section s : kDynamicSections) {
        const double range = params_.range_ma(s);
        if (!(currents[s] >= 0.0 && currents[s] <= range)) {
            std::ostringstream os;
            os << "current " << currents[s] << " mA outside [0, " << range << "] mA";
            throw RangeError(s, os.str());
        }
    }
    return params_.base_frequency_thz + resolve(currents, front_pair).offset_ghz * 1e-3;
}

FrequencyTrajectory LaserPlant::simulate(const DriveWaveform& drive, int n_bursts)
{
    const PlantParams& p = params_;
    const std::size_t period = drive.size();
    const std::size_t per_burst = drive.samples_per_burst();
    if (n_bursts < 1 || period < 2 * per_burst || per_burst == 0)
        throw std::invalid_argument("simulate: drive must cover at least one full burst pair");
    if (std::abs(drive.sample_rate_msps - p.awg_sample_rate_msps) > 1e-9)
        throw std::invalid_argument("simulate: drive sample rate does not match the plant AWG rate");

    const double dt = 1.0 / p.rx_sample_rate_gsps;  // ns
    const auto rx_per_awg = static_cast<std::size_t>(std::llround(p.rx_sample_rate_gsps * 1e3 / p.awg_sample_rate_msps));
    const std::size_t total = static_cast<std::size_t>(n_bursts) * per_burst * rx_per_awg;

    // Drive currents per AWG sample and section.
    PerSection<std::vector<double>> drive_ma;
    for (Section s : kDynamicSections) {
        drive_ma[s].resize(period);
        for (std::size_t i = 0; i < period; ++i) drive_ma[s][i] = drive_current(p.iv_curves[s], drive.volts[s][i]);
    }
    std::vector<int> pair_at(period);
    for (std::size_t i = 0; i < period; ++i) {
        pair_at[i] = decode_front_pair({drive.select[0][i], drive.select[1][i], drive.select[2][i], drive.select[3][i]});
        if (pair_at[i] < 1 || pair_at[i] > p.n_front_pairs)
            throw std::invalid_argument("simulate: select lines do not address a valid front pair");
    }

    const double tau_drive = 1e3 / (kTwoPi * p.drive_bandwidth_mhz);
    const double a_drive = -std::expm1(-dt / tau_drive);
    const double a_fast = -std::expm1(-dt / p.carrier_time_constant_ns);
    // Pre-emphasis may overdrive a section past its static tuning range, up to what the AWG
    // window can deliver. Carriers cannot go below zero.
    PerSection<double> a_slow, a_rise, a_decay, ceiling;
    for (Section s : kDynamicSections) {
        ceiling[s] = std::max(p.range_ma(s), drive_current(p.iv_curves[s], p.iv_curves[s].v_max));
        a_slow[s] = -std::expm1(-dt / p.slow_time_constant_ns[s]);
        a_rise[s] = -std::expm1(-dt / p.thermal_rise_ns[s]);
        a_decay[s] = -std::expm1(-dt / p.thermal_decay_ns[s]);
    }

    // Start from the steady state of the final (target) plateau.
    LaserState st;
    PerSection<double> fast;
    for (Section s : kDynamicSections) {
        const double i_ss = drive_ma[s][period - 1];
        st.drive_filtered[s] = i_ss;
        fast[s] = std::clamp(i_ss, 0.0, ceiling[s]);
        st.slow_components[s] = i_ss;
        st.heat[s] = dissipation(fast[s], p.range_ma(s));
        st.heat_sink[s] = st.heat[s];
        st.effective_currents[s] = std::clamp(i_ss, 0.0, ceiling[s]);
    }
    st.active_front_pair = pair_at[period - 1];
    st.cavity_mode = resolve(st.effective_currents, st.active_front_pair).cavity_mode;

    std::uniform_real_distribution<double> mux_delay(p.mux_delay_min_ns, p.mux_delay_max_ns);
    mux_delays_.clear();
    int pending_pair = 0;
    double pending_at = 0.0;
    int commanded_pair = st.active_front_pair;

    FrequencyTrajectory out;
    out.dt_ns = dt;
    out.offset_ghz.resize(total);
    out.cavity_mode.resize(total);
    out.front_pair.resize(total);

    for (std::size_t n = 0; n < total; ++n) {
        const double t = static_cast<double>(n) * dt;
        const std::size_t awg = (n / rx_per_awg) % period;

        if (n % rx_per_awg == 0 && pair_at[awg] != commanded_pair) {
            commanded_pair = pair_at[awg];
            const double delay = mux_delay(rng_);
            mux_delays_.push_back(delay);
            pending_pair = commanded_pair;
            pending_at = t + delay;
        }
        if (pending_pair != 0 && t >= pending_at) {
            st.active_front_pair = pending_pair;
            pending_pair = 0;
        }

        for (Section s : kDynamicSections) {
            const double range = ceiling[s];
            double& z = st.drive_filtered[s];
            z += (drive_ma[s][awg] - z) * a_drive;
            fast[s] = std::clamp(fast[s] + (z - fast[s]) * a_fast, 0.0, range);
            st.slow_components[s] += (z - st.slow_components[s]) * a_slow[s];
            st.heat[s] += (dissipation(fast[s], p.range_ma(s)) - st.heat[s]) * a_rise[s];
            st.heat_sink[s] += (st.heat[s] - st.heat_sink[s]) * a_decay[s];
            const double frac = p.slow_fraction[s];
            const double carriers = (1.0 - frac) * fast[s] + frac * st.slow_components[s];
            st.effective_currents[s] =
                std::clamp(carriers - p.thermal_gain[s] * (st.heat[s] - st.heat_sink[s]), 0.0, range);
        }

        const double heating = st.heat[Section::Rear] - st.heat_sink[Section::Rear];
        const LasingPoint lp = resolve_from(st.effective_currents, st.active_front_pair, st.cavity_mode,
                                            -p.rear_heat_comb_ghz_per_ma * heating);
        st.cavity_mode = lp.cavity_mode;
        out.offset_ghz[n] = lp.offset_ghz;
        out.cavity_mode[n] = lp.cavity_mode;
        out.front_pair[n] = static_cast<std::int8_t>(st.active_front_pair);
    }
    st.time_ns = static_cast<double>(total) * dt;
    state_ = st;
    return out;
}

IQCapture LaserPlant::capture_iq(const FrequencyTrajectory& trajectory, double ecl_offset_ghz,
                                 const CaptureOptions& options)
{
    const PlantParams& p = params_;
    const double dt = 1.0 / p.rx_sample_rate_gsps;
    if (std::abs(trajectory.dt_ns - dt) > 1e-12)
        throw std::invalid_argument("capture_iq: trajectory must be sampled at the receiver rate");

    IQCapture cap;
    cap.sample_rate_gsps = p.rx_sample_rate_gsps;
    cap.burst_period_ns = p.burst_period_ns;
    cap.n_bursts = static_cast<int>(std::llround(static_cast<double>(trajectory.size()) * dt / p.burst_period_ns));
    cap.samples.resize(trajectory.size());

    boost::random::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t per_burst = cap.samples_per_burst();
    const double phase_sigma = std::sqrt(kTwoPi * p.combined_linewidth_mhz * 1e-3 * dt);
    const double noise_sigma = std::sqrt(0.5 * std::pow(10.0, -p.capture_snr_db / 10.0));

    double phase = 0.0;
    for (std::size_t n = 0; n < trajectory.size(); ++n) {
        const double beat = trajectory.offset_ghz[n] - ecl_offset_ghz;
        if (n > 0) phase += kTwoPi * beat * dt;
        if (options.target_bursts_only && per_burst > 0) {
            const std::size_t burst = n / per_burst;
            const std::size_t pos = n % per_burst;
            const bool near_target = burst % 2 == 1 || pos < options.guard_samples ||
                                     pos + options.guard_samples >= per_burst;
            if (!near_target) continue;
        }
        if (options.phase_noise && phase_sigma > 0.0) phase += phase_sigma * gauss(rng_);
        if (std::abs(phase) > 64.0) phase = std::remainder(phase, kTwoPi);
        const double amp = options.receiver_filter ? receiver_response(p, beat) : 1.0;
        std::complex<double> z(amp * std::cos(phase), amp * std::sin(phase));
        if (options.additive_noise) z += std::complex<double>(noise_sigma * gauss(rng_), noise_sigma * gauss(rng_));
        cap.samples[n] = z;
    }
    return cap;
}

}  // namespace fastswitch

#include "fastswitch/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fastswitch {

void FrequencyTrace::check() const
{
    if (offset_ghz.size() != time_ns.size() || valid.size() != time_ns.size())
        throw std::invalid_argument("frequency trace columns differ in length");
    if (time_ns.size() < 2) return;
    const double dt = time_ns[1] - time_ns[0];
    if (!(dt > 0.0)) throw std::invalid_argument("frequency trace time axis is not increasing");
    for (std::size_t i = 1; i < time_ns.size(); ++i) {
        const double step = time_ns[i] - time_ns[i - 1];
        if (!(step > 0.0) || std::abs(step - dt) > 1e-6 * dt)
            throw std::invalid_argument("frequency trace time axis is not uniform at sample " + std::to_string(i));
    }
}

FrequencyTrace estimate_instantaneous_frequency(const IQCapture& capture, const EstimatorConfig& config)
{
    return estimate_instantaneous_frequency(capture, config, 0, capture.samples.size());
}

FrequencyTrace estimate_instantaneous_frequency(const IQCapture& capture, const EstimatorConfig& config,
                                               std::size_t begin, std::size_t end)
{
    const auto& z = capture.samples;
    const std::size_t n = z.size();
    const double fs = capture.sample_rate_gsps;
    const auto window = static_cast<std::size_t>(std::llround(config.window_ns * fs));
    if (window < 2) throw std::invalid_argument("estimator window must span at least 2 samples");
    if (n < 2) throw std::invalid_argument("capture is empty");
    if (begin > end || end > n) throw std::invalid_argument("estimator range outside the capture");

    const std::size_t half = window / 2;
    // Windows for outputs in [begin, end) read samples [lo, hi).
    const std::size_t lo = begin >= half ? begin - half : 0;
    const std::size_t hi = std::min(n, end + window);

    // Prefix sums of phase increments and power over [lo, hi).
    std::vector<double> inc(hi - lo + 1, 0.0), pow(hi - lo + 1, 0.0);
    for (std::size_t i = lo; i < hi; ++i) {
        const double d = i == 0 ? std::arg(z[1] * std::conj(z[0])) : std::arg(z[i] * std::conj(z[i - 1]));
        inc[i - lo + 1] = inc[i - lo] + d;
        pow[i - lo + 1] = pow[i - lo] + std::norm(z[i]);
    }

    FrequencyTrace tr;
    tr.time_ns.resize(end - begin);
    tr.offset_ghz.resize(end - begin);
    tr.valid.resize(end - begin);
    const double scale = fs / (2.0 * std::numbers::pi);
    const double threshold = config.power_threshold * config.reference_power;
    for (std::size_t i = begin; i < end; ++i) {
        const std::size_t a = i >= half ? i - half : 0;
        const std::size_t b = std::min(n, a + window);
        const double count = static_cast<double>(b - a);
        const std::size_t k = i - begin;
        tr.time_ns[k] = static_cast<double>(i) / fs;
        tr.offset_ghz[k] = scale * (inc[b - lo] - inc[a - lo]) / count;
        tr.valid[k] = (pow[b - lo] - pow[a - lo]) / count >= threshold ? 1 : 0;
    }
    return tr;
}

FrequencyTrace burst_slice(const FrequencyTrace& trace, double burst_period_ns, std::size_t index)
{
    const double dt = trace.dt_ns();
    if (!(dt > 0.0)) throw std::invalid_argument("burst_slice: trace too short");
    const auto per_burst = static_cast<std::size_t>(std::llround(burst_period_ns / dt));
    const std::size_t begin = index * per_burst;
    if (begin + per_burst > trace.size())
        throw std::invalid_argument("burst_slice: burst " + std::to_string(index) + " beyond end of trace");
    FrequencyTrace b;
    b.time_ns.resize(per_burst);
    b.offset_ghz.assign(trace.offset_ghz.begin() + static_cast<std::ptrdiff_t>(begin),
                        trace.offset_ghz.begin() + static_cast<std::ptrdiff_t>(begin + per_burst));
    b.valid.assign(trace.valid.begin() + static_cast<std::ptrdiff_t>(begin),
                   trace.valid.begin() + static_cast<std::ptrdiff_t>(begin + per_burst));
    for (std::size_t i = 0; i < per_burst; ++i) b.time_ns[i] = static_cast<double>(i) * dt;
    return b;
}

FrequencyTrace average_bursts(const std::vector<FrequencyTrace>& bursts)
{
    if (bursts.empty()) throw std::invalid_argument("average_bursts: no bursts");
    const std::size_t len = bursts.front().size();
    for (const auto& b : bursts)
        if (b.size() != len) throw std::invalid_argument("average_bursts: bursts differ in length");

    FrequencyTrace avg;
    avg.time_ns = bursts.front().time_ns;
    avg.offset_ghz.assign(len, 0.0);
    avg.valid.assign(len, 0);
    const std::size_t need = (bursts.size() + 1) / 2;
    for (std::size_t i = 0; i < len; ++i) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& b : bursts) {
            if (b.valid[i]) {
                sum += b.offset_ghz[i];
                ++count;
            }
        }
        if (count > 0) avg.offset_ghz[i] = sum / static_cast<double>(count);
        avg.valid[i] = count >= need ? 1 : 0;
    }
    return avg;
}

FrequencyTrace segment_and_average(const FrequencyTrace& trace, double burst_period_ns, int n_average,
                                   std::size_t first_target)
{
    if (n_average < 1) throw std::invalid_argument("segment_and_average: n_average must be positive");
    const double dt = trace.dt_ns();
    if (!(dt > 0.0)) throw std::invalid_argument("segment_and_average: trace too short");
    const auto per_burst = static_cast<std::size_t>(std::llround(burst_period_ns / dt));
    const std::size_t total_bursts = trace.size() / per_burst;
    const std::size_t available = total_bursts > first_target ? (total_bursts - first_target + 1) / 2 : 0;
    if (available < static_cast<std::size_t>(n_average))
        throw std::invalid_argument("segment_and_average: trace holds " + std::to_string(available) +
                                    " target bursts, " + std::to_string(n_average) + " requested");
    std::vector<FrequencyTrace> bursts;
    bursts.reserve(static_cast<std::size_t>(n_average));
    for (int k = 0; k < n_average; ++k)
        bursts.push_back(burst_slice(trace, burst_period_ns, first_target + 2 * static_cast<std::size_t>(k)));
    return average_bursts(bursts);
}

BinnedError bin_errors(const FrequencyTrace& trace, int K, double bin_width_ns)
{
    if (K < 1) throw std::invalid_argument("bin_errors: K must be positive");
    if (!(bin_width_ns > 0.0)) throw std::invalid_argument("bin_errors: bin width must be positive");
    const double t0 = trace.empty() ? 0.0 : trace.time_ns.front();
    const double span = trace.empty() ? 0.0 : trace.time_ns.back() - t0 + trace.dt_ns();
    const auto n_bins = static_cast<std::size_t>(std::max<double>(K, std::floor(span / bin_width_ns + 1e-9)));

    std::vector<double> sum(n_bins, 0.0);
    std::vector<std::size_t> count(n_bins, 0);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (!trace.valid[i]) continue;
        const double rel = (trace.time_ns[i] - t0) / bin_width_ns;
        const auto bin = static_cast<std::size_t>(std::floor(rel + 1e-9));
        if (bin >= n_bins) continue;
        sum[bin] += trace.offset_ghz[i];
        ++count[bin];
    }
    auto sign_of = [&](std::size_t b) { return sum[b] < 0.0 ? -1.0 : 1.0; };

    BinnedError out;
    out.bin_width_ns = bin_width_ns;
    out.e.resize(static_cast<std::size_t>(K));
    out.filled.resize(static_cast<std::size_t>(K));
    for (std::size_t k = 0; k < static_cast<std::size_t>(K); ++k) {
        if (count[k] > 0) {
            out.e[k] = sum[k] / static_cast<double>(count[k]);
            out.filled[k] = 1;
            continue;
        }
        double sign = 1.0;
        bool found = false;
        for (std::size_t j = k + 1; j < n_bins && !found; ++j)
            if (count[j] > 0) { sign = sign_of(j); found = true; }
        for (std::size_t j = k; j-- > 0 && !found;)
            if (count[j] > 0) { sign = sign_of(j); found = true; }
        out.e[k] = sign * kFallbackErrorGhz;
        out.filled[k] = 0;
    }
    return out;
}

SwitchTime measure_switch_time(const FrequencyTrace& trace, double threshold_ghz)
{
    if (!(threshold_ghz > 0.0)) throw std::invalid_argument("switch-time threshold must be positive");
    SwitchTime st;
    if (trace.empty()) return st;
    std::size_t i = trace.size();
    while (i > 0 && trace.valid[i - 1] && std::abs(trace.offset_ghz[i - 1]) <= threshold_ghz) --i;
    if (i == trace.size()) return st;
    st.settled = true;
    st.time_ns = trace.time_ns[i] - trace.time_ns.front();
    return st;
}

ModeHop detect_mode_hop(const FrequencyTrace& trace, const HopRule& rule)
{
    ModeHop hop;
    const double dt = trace.dt_ns();
    auto in_band = [&](std::size_t i) { return trace.valid[i] && std::abs(trace.offset_ghz[i]) <= rule.threshold_ghz; };
    auto excursion = [&](std::size_t i) {
        return !trace.valid[i] || std::abs(trace.offset_ghz[i]) > rule.threshold_ghz + 0.5 * rule.mode_spacing_ghz;
    };

    std::size_t i = 0;
    while (i < trace.size() && !in_band(i)) ++i;
    while (i < trace.size()) {
        if (!excursion(i)) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < trace.size() && !in_band(i)) {
            if (!excursion(i)) break;
            ++i;
        }
        const std::size_t end = i;  // first sample after the excursion
        if (end >= trace.size()) break;
        const double dwell = static_cast<double>(end - start) * dt;
        std::size_t j = end;
        while (j < trace.size() && !in_band(j) && !excursion(j)) ++j;
        const bool returns = j < trace.size() && in_band(j);
        if (dwell >= rule.min_dwell_ns - 1e-9 && returns) {
            hop.detected = true;
            hop.start_ns = trace.time_ns[start] - trace.time_ns.front();
            hop.end_ns = trace.time_ns[end] - trace.time_ns.front();
            return hop;
        }
        i = end;
    }
    return hop;
}

}  // namespace fastswitch

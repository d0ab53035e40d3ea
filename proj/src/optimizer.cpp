#include "fastswitch/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fastswitch {

void OptimizerConfig::validate() const
{
    if (!(mu > 0.0) || !(mu_phase > 0.0)) throw std::invalid_argument("optimizer: mu must be positive");
    if (n_updates < 1) throw std::invalid_argument("optimizer: n_updates must be at least 1");
    if (n_seeds < 1) throw std::invalid_argument("optimizer: n_seeds must be at least 1");
    if (k_rising < 1 || k_falling < 1) throw std::invalid_argument("optimizer: tap counts must be positive");
    if (!(bin_width_ns > 0.0)) throw std::invalid_argument("optimizer: bin width must be positive");
    if (!(settle_threshold_ghz > 0.0)) throw std::invalid_argument("optimizer: settle threshold must be positive");
    if (!(weight_limit > 0.0)) throw std::invalid_argument("optimizer: weight limit must be positive");
    if (!(phase_weight_min > 0.0 && phase_weight_min < 1.0 && phase_weight_max > 1.0))
        throw std::invalid_argument("optimizer: phase weight bounds must straddle 1");
}

std::vector<double> update_step(std::span<const double> h, std::span<const double> e,
                                std::span<const double> x, double mu)
{
    if (h.size() != e.size() || h.size() != x.size())
        throw std::invalid_argument("update_step: h, e and x lengths differ");
    std::vector<double> out(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) out[k] = h[k] - mu * e[k] * x[k];
    return out;
}

double CalibrationRecord::mean_burst_switch_ns() const
{
    if (burst_switch_ns.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::accumulate(burst_switch_ns.begin(), burst_switch_ns.end(), 0.0) /
           static_cast<double>(burst_switch_ns.size());
}

namespace {

int taps_for(const OptimizerConfig& config, Edge edge)
{
    return edge == Edge::Rising ? config.k_rising : config.k_falling;
}

// Start of the first run of valid samples lasting at least `min_run_ns`.
double band_entry_ns(const FrequencyTrace& trace, double min_run_ns)
{
    const double dt = trace.dt_ns();
    const auto need = static_cast<std::size_t>(std::ceil(min_run_ns / dt - 1e-9));
    std::size_t run = 0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        run = trace.valid[i] ? run + 1 : 0;
        if (run >= need) return trace.time_ns[i + 1 - run] - trace.time_ns.front();
    }
    return std::numeric_limits<double>::infinity();
}

std::string pair_name(const ChannelPoint& a, const ChannelPoint& b)
{
    return "channel " + std::to_string(a.index) + " -> " + std::to_string(b.index);
}

PreEmphasisWeights rear_weights(Edge edge, std::vector<double> h)
{
    return PreEmphasisWeights::additive(Section::Rear, edge, std::move(h));
}

void record_final(CalibrationRecord& rec, const Observation& obs, const OptimizerConfig& config)
{
    rec.final_trace = obs.averaged;
    rec.final_switch = measure_switch_time(obs.averaged, config.settle_threshold_ghz);
    rec.final_switch_5ghz = measure_switch_time(obs.averaged, 5.0);
    rec.burst_switch_ns.clear();
    for (const auto& b : obs.bursts) {
        const SwitchTime t = measure_switch_time(b, config.settle_threshold_ghz);
        if (t.settled) rec.burst_switch_ns.push_back(t.time_ns);
    }
}

double switch_key(const FrequencyTrace& trace, const OptimizerConfig& config)
{
    const SwitchTime t = measure_switch_time(trace, config.settle_threshold_ghz);
    return t.settled ? t.time_ns : std::numeric_limits<double>::infinity();
}

// Index of the iterate to finish on: the last one, or with keep_best the fastest (later
// iterates win ties).
std::size_t pick_iterate(const std::vector<double>& keys, const OptimizerConfig& config)
{
    std::size_t best = keys.size() - 1;
    if (!config.keep_best) return best;
    for (std::size_t i = keys.size(); i-- > 0;)
        if (keys[i] < keys[best]) best = i;
    return best;
}

}  // namespace

SeedResult seed_search(const PlantParams& params, const ChannelPoint& origin, const ChannelPoint& target,
                       Testbed& testbed, const OptimizerConfig& config)
{
    config.validate();
    const Edge edge = classify_edge(params, Section::Rear, origin, target);
    const auto k = static_cast<std::size_t>(taps_for(config, edge));

    SeedResult best;
    best.entry_ns = std::numeric_limits<double>::infinity();
    for (int i = 0; i < config.n_seeds; ++i) {
        std::vector<double> h(k, 0.0);
        h[0] = config.seed_step * i;
        const DriveWaveform drive = synthesize(params, origin, target, rear_weights(edge, h));
        const Observation obs = testbed.apply(drive, target.itu_frequency_thz);
        ++best.evaluations;
        const double entry = band_entry_ns(obs.averaged, config.bin_width_ns);
        if (entry < best.entry_ns) {
            best.entry_ns = entry;
            best.first_tap = h[0];
            best.h = h;
        }
    }
    if (!std::isfinite(best.entry_ns))
        throw SeedSearchError("seed search: no seed brought " + pair_name(origin, target) + " into the receiver band");
    return best;
}

CalibrationRecord optimize_rear(const PlantParams& params, const ChannelPoint& origin, const ChannelPoint& target,
                                Testbed& testbed, const OptimizerConfig& config)
{
    config.validate();
    CalibrationRecord rec;
    rec.from = origin.index;
    rec.to = target.index;
    rec.rear_edge = classify_edge(params, Section::Rear, origin, target);
    const auto k = static_cast<std::size_t>(taps_for(config, rec.rear_edge));

    {
        const DriveWaveform plain = synthesize(params, origin, target, rear_weights(rec.rear_edge, std::vector<double>(k, 0.0)));
        rec.baseline_switch = measure_switch_time(testbed.apply(plain, target.itu_frequency_thz).averaged,
                                                  config.settle_threshold_ghz);
    }

    const SeedResult seed = seed_search(params, origin, target, testbed, config);
    rec.seed_first_tap = seed.first_tap;
    std::vector<double> h = seed.h;
    rec.rear_history.push_back(h);
    std::vector<Observation> seen;
    std::vector<double> keys;

    for (int u = 0; u < config.n_updates; ++u) {
        try {
            const DriveWaveform drive = synthesize(params, origin, target, rear_weights(rec.rear_edge, h));
            if (drive.clamped) ++rec.clamp_events;
            const Observation& obs = seen.emplace_back(testbed.apply(drive, target.itu_frequency_thz));
            keys.push_back(switch_key(obs.averaged, config));
            const BinnedError e = bin_errors(obs.averaged, static_cast<int>(k), config.bin_width_ns);
            const std::vector<double> x = centred_drive_samples(drive, Section::Rear, k);
            h = update_step(h, e.e, x, config.mu);
            for (double& w : h) {
                if (std::abs(w) > config.weight_limit) {
                    w = std::clamp(w, -config.weight_limit, config.weight_limit);
                    ++rec.clamp_events;
                }
            }
            rec.rear_errors.push_back(e);
            rec.rear_history.push_back(h);
        } catch (const std::exception& ex) {
            throw std::runtime_error("rear update " + std::to_string(u + 1) + " of " + pair_name(origin, target) +
                                     ": " + ex.what());
        }
    }

    {
        const DriveWaveform final_drive = synthesize(params, origin, target, rear_weights(rec.rear_edge, h));
        if (final_drive.clamped) ++rec.clamp_events;
        seen.push_back(testbed.apply(final_drive, target.itu_frequency_thz));
        keys.push_back(switch_key(seen.back().averaged, config));
    }
    rec.rear_chosen = pick_iterate(keys, config);
    rec.rear_weights = rear_weights(rec.rear_edge, rec.rear_history[rec.rear_chosen]);
    const Observation& obs = seen[rec.rear_chosen];
    record_final(rec, obs, config);
    rec.rear_only_trace = obs.averaged;
    rec.rear_only_switch = rec.final_switch;
    rec.mode_hop_detected = detect_mode_hop(obs.averaged, config.hop_rule()).detected;
    return rec;
}

void optimize_phase(const PlantParams& params, const ChannelPoint& origin, const ChannelPoint& target,
                    Testbed& testbed, const OptimizerConfig& config, CalibrationRecord& rec)
{
    config.validate();
    if (!rec.mode_hop_detected) return;

    PhaseCalibration pc;
    pc.hop_before = true;
    const Edge edge = classify_edge(params, Section::Phase, origin, target);
    const auto k = static_cast<std::size_t>(kPhaseTaps);
    std::vector<double> h(k, 1.0);
    pc.history.push_back(h);
    std::vector<Observation> seen;
    std::vector<double> keys;

    for (int u = 0; u < config.n_updates; ++u) {
        try {
            const auto weights = PreEmphasisWeights::multiplicative(Section::Phase, edge, h);
            const DriveWaveform drive = synthesize(params, origin, target, rec.rear_weights, weights);
            if (drive.clamped) ++rec.clamp_events;
            const Observation& obs = seen.emplace_back(testbed.apply(drive, target.itu_frequency_thz));
            keys.push_back(switch_key(obs.averaged, config));
            const BinnedError e = bin_errors(obs.averaged, static_cast<int>(k), config.bin_width_ns);
            const std::vector<double> x = plateau_drive_samples(drive, Section::Phase, k);
            h = update_step(h, e.e, x, config.mu_phase);
            for (double& w : h) {
                if (w < config.phase_weight_min || w > config.phase_weight_max) {
                    w = std::clamp(w, config.phase_weight_min, config.phase_weight_max);
                    ++rec.clamp_events;
                }
            }
            pc.errors.push_back(e);
            pc.history.push_back(h);
        } catch (const std::exception& ex) {
            throw std::runtime_error("phase update " + std::to_string(u + 1) + " of " + pair_name(origin, target) +
                                     ": " + ex.what());
        }
    }

    {
        const auto weights = PreEmphasisWeights::multiplicative(Section::Phase, edge, h);
        const DriveWaveform final_drive = synthesize(params, origin, target, rec.rear_weights, weights);
        if (final_drive.clamped) ++rec.clamp_events;
        seen.push_back(testbed.apply(final_drive, target.itu_frequency_thz));
        keys.push_back(switch_key(seen.back().averaged, config));
    }
    pc.chosen = pick_iterate(keys, config);
    pc.final_weights = PreEmphasisWeights::multiplicative(Section::Phase, edge, pc.history[pc.chosen]);
    const Observation& obs = seen[pc.chosen];
    record_final(rec, obs, config);
    pc.hop_after = detect_mode_hop(obs.averaged, config.hop_rule()).detected;
    pc.unresolved = pc.hop_after;
    rec.mode_hop_corrected = !pc.hop_after;
    rec.phase = std::move(pc);
}

CalibrationRecord calibrate_pair(const PlantParams& params, const ChannelPoint& origin, const ChannelPoint& target,
                                 Testbed& testbed, const OptimizerConfig& config)
{
    CalibrationRecord rec = optimize_rear(params, origin, target, testbed, config);
    if (rec.mode_hop_detected) optimize_phase(params, origin, target, testbed, config, rec);
    return rec;
}

}  // namespace fastswitch

#include "fastswitch/channels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fastswitch/waveform.hpp"

namespace fastswitch {

namespace {

std::size_t grid_count(double range, double step)
{
    return static_cast<std::size_t>(std::floor(range / step + 1e-9)) + 1;
}

std::string thz_text(double thz)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f THz", thz);
    return buf;
}

}  // namespace

void MapResolution::validate() const
{
    if (!(rear_step_ma > 0.0) || !(front_step_ma > 0.0))
        throw std::invalid_argument("map resolutions must be positive");
}

const MapPoint& TuningMap::at(int pair, std::size_t front_index, std::size_t rear_index) const
{
    if (pair < 1 || pair > n_front_pairs || front_index >= n_front || rear_index >= n_rear)
        throw std::out_of_range("tuning map index outside the grid");
    return points[(static_cast<std::size_t>(pair - 1) * n_front + front_index) * n_rear + rear_index];
}

double TuningMap::min_frequency_thz() const
{
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : points) m = std::min(m, p.frequency_thz);
    return m;
}

double TuningMap::max_frequency_thz() const
{
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& p : points) m = std::max(m, p.frequency_thz);
    return m;
}

TuningMap sweep_map(Testbed& testbed, const PlantParams& params, const MapResolution& resolution)
{
    resolution.validate();
    TuningMap map;
    map.resolution = resolution;
    map.n_front_pairs = params.n_front_pairs;
    map.n_front = grid_count(params.front_range_ma, resolution.front_step_ma);
    map.n_rear = grid_count(params.rear_range_ma, resolution.rear_step_ma);
    map.points.reserve(static_cast<std::size_t>(map.n_front_pairs) * map.n_front * map.n_rear);

    for (int pair = 1; pair <= params.n_front_pairs; ++pair) {
        for (std::size_t fi = 0; fi < map.n_front; ++fi) {
            for (std::size_t ri = 0; ri < map.n_rear; ++ri) {
                ChannelPoint c;
                c.front_pair = pair;
                c.front_scaling_ma = static_cast<double>(fi) * resolution.front_step_ma;
                c.rear_ma = static_cast<double>(ri) * resolution.rear_step_ma;
                c.phase_ma = resolution.phase_ma;
                const double f = testbed.measure_static_thz(channel_currents(params, c), pair);
                map.points.push_back({pair, c.front_scaling_ma, c.rear_ma, f});
            }
        }
    }
    return map;
}

void write_map_csv(std::ostream& out, const TuningMap& map)
{
    out << "pair,front_mA,rear_mA,freq_THz\n";
    char buf[96];
    for (const auto& p : map.points) {
        std::snprintf(buf, sizeof buf, "%d,%.4f,%.4f,%.9f\n", p.front_pair, p.front_ma, p.rear_ma, p.frequency_thz);
        out << buf;
    }
}

TuningMap read_map_csv(std::istream& in, const MapResolution& resolution)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("pair,", 0) != 0)
        throw std::invalid_argument("tuning map CSV: missing header");
    TuningMap map;
    map.resolution = resolution;
    std::set<double> fronts, rears;
    std::set<int> pairs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        MapPoint p;
        if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf", &p.front_pair, &p.front_ma, &p.rear_ma, &p.frequency_thz) != 4)
            throw std::invalid_argument("tuning map CSV: bad row '" + line + "'");
        pairs.insert(p.front_pair);
        fronts.insert(p.front_ma);
        rears.insert(p.rear_ma);
        map.points.push_back(p);
    }
    map.n_front_pairs = static_cast<int>(pairs.size());
    map.n_front = fronts.size();
    map.n_rear = rears.size();
    if (map.points.size() != static_cast<std::size_t>(map.n_front_pairs) * map.n_front * map.n_rear)
        throw std::invalid_argument("tuning map CSV: rows do not form a full grid");
    return map;
}

void PlacementConfig::validate() const
{
    if (!(spacing_ghz > 0.0)) throw std::invalid_argument("placement: spacing must be positive");
    if (!(last_thz >= first_thz)) throw std::invalid_argument("placement: last frequency below first");
    if (!(max_rear_ma > 0.0) || !(max_error_mhz > 0.0))
        throw std::invalid_argument("placement: rear cap and error limit must be positive");
    if (!(candidate_window_ghz > 0.0) || !(rear_search_below_ma >= 0.0) || !(rear_search_above_ma >= 0.0) ||
        !(rear_coarse_step_ma > 0.0) || !(rear_fine_step_ma > 0.0) || !(phase_scan_step_ma > 0.0) || !(min_phase_margin_ma >= 0.0))
        throw std::invalid_argument("placement: search parameters must be positive");
}

PlacementError::PlacementError(double frequency_thz, const std::string& why)
    : std::runtime_error("no feasible channel at " + thz_text(frequency_thz) + ": " + why),
      frequency_thz_(frequency_thz)
{
}

namespace {

struct Candidate {
    double rear_ma;
    int pair;
    double front_ma;
};

struct Refined {
    bool found = false;
    double rear_ma = 0.0;
    double phase_ma = 0.0;
    double error_mhz = 0.0;
    double margin_ma = -1.0;
};

// Phase current that puts the laser on `target_thz` with the widest phase margin to a mode
// hop, for fixed rear and front.
Refined tune_phase(Testbed& testbed, const PlantParams& params, ChannelPoint c, double target_thz,
                   const PlacementConfig& config)
{
    const std::size_t n = grid_count(params.phase_range_ma, config.phase_scan_step_ma);
    const double step = config.phase_scan_step_ma;
    const double hop_jump_thz = 0.5 * params.cavity_mode_spacing_ghz * 1e-3;
    auto measure = [&](double phase) {
        c.phase_ma = phase;
        return testbed.measure_static_thz(channel_currents(params, c), c.front_pair);
    };

    std::vector<double> g(n);
    for (std::size_t j = 0; j < n; ++j) g[j] = measure(static_cast<double>(j) * step);
    // Mode boundaries: steps in the scan too large to be in-mode tuning.
    std::vector<double> hops;
    for (std::size_t j = 0; j + 1 < n; ++j)
        if (std::abs(g[j + 1] - g[j]) > hop_jump_thz) hops.push_back((static_cast<double>(j) + 0.5) * step);

    Refined best;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        if (std::abs(g[j + 1] - g[j]) > hop_jump_thz) continue;
        if ((g[j] - target_thz) * (g[j + 1] - target_thz) > 0.0) continue;
        double lo = static_cast<double>(j) * step, hi = lo + step;
        double glo = g[j];
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double gm = measure(mid);
            if ((gm - target_thz) * (glo - target_thz) <= 0.0) {
                hi = mid;
            } else {
                lo = mid;
                glo = gm;
            }
        }
        const double phase = 0.5 * (lo + hi);
        // Hops repeat with the mode period; extend the visible ones past the scan ends.
        const double period = hops.size() >= 2 ? hops[1] - hops[0] : params.phase_range_ma;
        double margin = 0.5 * period;
        for (double h : hops)
            for (double img : {h - period, h, h + period}) margin = std::min(margin, std::abs(phase - img));
        const double err = (measure(phase) - target_thz) * 1e6;
        if (margin > best.margin_ma) best = Refined{true, c.rear_ma, phase, err, margin};
    }
    return best;
}

Refined refine(Testbed& testbed, const PlantParams& params, const Candidate& cand, double target_thz,
               const PlacementConfig& config)
{
    ChannelPoint c;
    c.front_pair = cand.pair;
    c.front_scaling_ma = cand.front_ma;

    Refined best;
    auto scan = [&](double lo, double hi, double step) {
        lo = std::max(0.0, lo);
        hi = std::min(config.max_rear_ma, hi);
        if (hi < lo) return;
        const std::size_t n = grid_count(hi - lo, step);
        for (std::size_t i = 0; i < n; ++i) {
            c.rear_ma = lo + static_cast<double>(i) * step;
            const Refined r = tune_phase(testbed, params, c, target_thz, config);
            if (!r.found || std::abs(r.error_mhz) > config.max_error_mhz) continue;
            if (r.margin_ma > best.margin_ma + 1e-9) best = r;
        }
    };
    scan(cand.rear_ma - config.rear_search_below_ma, cand.rear_ma + config.rear_search_above_ma,
         config.rear_coarse_step_ma);
    if (best.found) {
        const double centre = best.rear_ma;
        scan(centre - config.rear_coarse_step_ma, centre + config.rear_coarse_step_ma, config.rear_fine_step_ma);
    }
    return best;
}

}  // namespace

std::vector<ChannelPoint> place_itu_channels(const TuningMap& map, Testbed& testbed, const PlantParams& params,
                                             const PlacementConfig& config)
{
    config.validate();
    if (map.points.empty()) throw std::invalid_argument("placement: empty tuning map");
    const auto n_channels =
        static_cast<std::size_t>(std::llround((config.last_thz - config.first_thz) * 1e3 / config.spacing_ghz)) + 1;

    std::vector<ChannelPoint> out;
    out.reserve(n_channels);
    for (std::size_t k = 0; k < n_channels; ++k) {
        const double target = config.first_thz + static_cast<double>(k) * config.spacing_ghz * 1e-3;

        // Lowest in-window rear current for every (pair, front) cell.
        std::vector<Candidate> cands;
        for (int pair = 1; pair <= map.n_front_pairs; ++pair) {
            for (std::size_t fi = 0; fi < map.n_front; ++fi) {
                for (std::size_t ri = 0; ri < map.n_rear; ++ri) {
                    const MapPoint& p = map.at(pair, fi, ri);
                    if (p.rear_ma > config.max_rear_ma) break;
                    if (std::abs(p.frequency_thz - target) * 1e3 <= config.candidate_window_ghz) {
                        cands.push_back({p.rear_ma, pair, p.front_ma});
                        break;
                    }
                }
            }
        }
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
            if (a.rear_ma != b.rear_ma) return a.rear_ma < b.rear_ma;
            if (a.pair != b.pair) return a.pair < b.pair;
            return a.front_ma > b.front_ma;
        });
        if (cands.empty()) throw PlacementError(target, "no map point within the candidate window");

        // First candidate with a comfortable mode margin, else the widest margin seen.
        Refined chosen;
        Candidate chosen_cand{};
        for (const Candidate& cand : cands) {
            const Refined r = refine(testbed, params, cand, target, config);
            if (!r.found) continue;
            if (r.margin_ma > chosen.margin_ma + 1e-9) {
                chosen = r;
                chosen_cand = cand;
            }
            if (r.margin_ma >= config.min_phase_margin_ma) break;
        }
        if (chosen.found) {
            const Refined& r = chosen;
            const Candidate& cand = chosen_cand;
            ChannelPoint c;
            c.index = static_cast<int>(k);
            c.itu_frequency_thz = target;
            c.front_pair = cand.pair;
            c.front_scaling_ma = cand.front_ma;
            c.rear_ma = r.rear_ma;
            c.phase_ma = r.phase_ma;
            c.static_error_mhz = r.error_mhz;
            out.push_back(c);
        } else {
            throw PlacementError(target, "no candidate meets the rear cap and frequency error limits");
        }
    }
    return out;
}

namespace {

double voltage_swing(const PlantParams& params, const ChannelPoint& a, const ChannelPoint& b)
{
    const SectionCurrents ca = channel_currents(params, a);
    const SectionCurrents cb = channel_currents(params, b);
    double sum = 0.0;
    for (Section s : kDynamicSections)
        sum += std::abs(current_to_voltage(params, s, ca[s]) - current_to_voltage(params, s, cb[s]));
    return sum;
}

}  // namespace

std::vector<ChannelPoint> select_worst_case(const PlantParams& params, const std::vector<ChannelPoint>& channels,
                                            const WorstCaseConfig& config)
{
    if (config.n_extra < 0) throw std::invalid_argument("worst-case selection: n_extra must be non-negative");
    std::map<int, std::vector<std::size_t>> by_pair;
    for (std::size_t i = 0; i < channels.size(); ++i) by_pair[channels[i].front_pair].push_back(i);
    for (int pair = 1; pair <= params.n_front_pairs; ++pair) {
        if (by_pair[pair].size() < 2)
            throw std::invalid_argument("worst-case selection: front pair " + std::to_string(pair) + " hosts " +
                                        std::to_string(by_pair[pair].size()) + " channel(s), need 2");
    }

    std::set<std::size_t> chosen;
    for (const auto& [pair, idx] : by_pair) {
        std::size_t lo = idx.front(), hi = idx.front();
        for (std::size_t i : idx) {
            if (channels[i].rear_ma < channels[lo].rear_ma) lo = i;
            if (channels[i].rear_ma > channels[hi].rear_ma) hi = i;
        }
        chosen.insert(lo);
        chosen.insert(hi);
    }
    const std::size_t target_size = std::min(channels.size(), chosen.size() + static_cast<std::size_t>(config.n_extra));

    auto by_freq = [&](std::size_t a, std::size_t b) {
        return channels[a].itu_frequency_thz < channels[b].itu_frequency_thz;
    };
    std::vector<std::size_t> all(channels.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    for (std::size_t extreme : {*std::min_element(all.begin(), all.end(), by_freq),
                                *std::max_element(all.begin(), all.end(), by_freq)})
        if (chosen.size() < target_size) chosen.insert(extreme);

    while (chosen.size() < target_size) {
        std::size_t best = channels.size();
        double best_score = -1.0;
        for (std::size_t i = 0; i < channels.size(); ++i) {
            if (chosen.count(i)) continue;
            double score = 0.0;
            for (std::size_t j : chosen) score = std::max(score, voltage_swing(params, channels[i], channels[j]));
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        chosen.insert(best);
    }

    std::vector<ChannelPoint> out;
    for (std::size_t i : chosen) out.push_back(channels[i]);
    std::sort(out.begin(), out.end(), [](const ChannelPoint& a, const ChannelPoint& b) { return a.index < b.index; });
    return out;
}

ChannelPoint mode_centred_channel(const PlantParams& params, int index, int front_pair, double front_ma,
                                  double rear_ma)
{
    ChannelPoint c;
    c.index = index;
    c.front_pair = front_pair;
    c.front_scaling_ma = front_ma;
    c.rear_ma = rear_ma;
    c.phase_ma = params.phase_anchor_ma;
    const LaserPlant plant(params);
    const auto lp = plant.resolve(channel_currents(params, c), front_pair);
    // The comb moves a full mode spacing over the phase range.
    const double range = params.phase_range_ma;
    c.phase_ma = std::fmod(params.phase_anchor_ma + lp.detuning_ghz / params.cavity_mode_spacing_ghz * range, range);
    if (c.phase_ma < 0.0) c.phase_ma += range;
    c.itu_frequency_thz = plant.static_frequency_thz(channel_currents(params, c), front_pair);
    return c;
}

std::string channels_to_json(const std::vector<ChannelPoint>& channels)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : channels) {
        nlohmann::ordered_json j;
        j["index"] = c.index;
        j["itu_frequency_thz"] = c.itu_frequency_thz;
        j["front_pair"] = c.front_pair;
        j["front_scaling_ma"] = c.front_scaling_ma;
        j["rear_ma"] = c.rear_ma;
        j["phase_ma"] = c.phase_ma;
        j["static_error_mhz"] = c.static_error_mhz;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::vector<ChannelPoint> channels_from_json(const std::string& text)
{
    const auto arr = nlohmann::json::parse(text);
    if (!arr.is_array()) throw std::invalid_argument("channel table: expected a JSON array");
    std::vector<ChannelPoint> out;
    for (const auto& j : arr) {
        ChannelPoint c;
        c.index = j.at("index").get<int>();
        c.itu_frequency_thz = j.at("itu_frequency_thz").get<double>();
        c.front_pair = j.at("front_pair").get<int>();
        c.front_scaling_ma = j.at("front_scaling_ma").get<double>();
        c.rear_ma = j.at("rear_ma").get<double>();
        c.phase_ma = j.at("phase_ma").get<double>();
        c.static_error_mhz = j.at("static_error_mhz").get<double>();
        out.push_back(c);
    }
    return out;
}

}  // namespace fastswitch

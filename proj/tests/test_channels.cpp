#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "fastswitch/channels.hpp"

using namespace fastswitch;
using Catch::Approx;

namespace {

TuningMap coarse_map(const PlantParams& p)
{
    SimulatedTestbed testbed(p);
    return sweep_map(testbed, p, MapResolution{2.0, 1.0, 6.0});
}

}  // namespace

TEST_CASE("tuning map CSV round-trips")
{
    PlantParams p;
    const auto map = coarse_map(p);
    REQUIRE(map.n_front_pairs == 7);
    REQUIRE(map.points.size() == 7 * map.n_front * map.n_rear);
    std::stringstream ss;
    write_map_csv(ss, map);
    REQUIRE(ss.str().rfind("pair,front_mA,rear_mA,freq_THz\n", 0) == 0);
    const auto back = read_map_csv(ss, map.resolution);
    REQUIRE(back.points.size() == map.points.size());
    for (std::size_t i = 0; i < map.points.size(); ++i) {
        REQUIRE(back.points[i].front_pair == map.points[i].front_pair);
        REQUIRE(back.points[i].frequency_thz == Approx(map.points[i].frequency_thz).margin(1e-9));
    }
    std::stringstream bad("pair,front_mA,rear_mA,freq_THz\n1,0,0\n");
    REQUIRE_THROWS_AS(read_map_csv(bad, map.resolution), std::invalid_argument);
}

TEST_CASE("placement hits the grid within the static constraints")
{
    PlantParams p;
    const auto map = coarse_map(p);
    SimulatedTestbed testbed(p);
    PlacementConfig pc;
    pc.last_thz = pc.first_thz + 0.25;
    const auto channels = place_itu_channels(map, testbed, p, pc);
    REQUIRE(channels.size() == 6);
    LaserPlant plant(p);
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const auto& c = channels[i];
        REQUIRE(c.index == static_cast<int>(i));
        REQUIRE(c.itu_frequency_thz == Approx(pc.first_thz + 0.05 * static_cast<double>(i)).margin(1e-9));
        REQUIRE(c.rear_ma <= pc.max_rear_ma);
        const double f = plant.static_frequency_thz(channel_currents(p, c), c.front_pair);
        REQUIRE(std::abs(f - c.itu_frequency_thz) * 1e6 <= pc.max_error_mhz);
    }
    // Same map, same plan.
    SimulatedTestbed again(p);
    REQUIRE(place_itu_channels(map, again, p, pc) == channels);
}

TEST_CASE("worst-case set keeps both rear extremes of every pair")
{
    PlantParams p;
    std::vector<ChannelPoint> channels;
    int index = 0;
    for (int pair = 1; pair <= 7; ++pair)
        for (int k = 0; k < 5; ++k) {
            ChannelPoint c;
            c.index = index;
            c.itu_frequency_thz = 190.65 + 0.05 * index;
            c.front_pair = pair;
            c.front_scaling_ma = 1.0 + 0.5 * k;
            c.rear_ma = 2.0 + 9.0 * k + pair;
            c.phase_ma = 6.0;
            channels.push_back(c);
            ++index;
        }
    const auto set = select_worst_case(p, channels);
    REQUIRE(set.size() == 22);
    REQUIRE(std::is_sorted(set.begin(), set.end(), [](auto& a, auto& b) { return a.index < b.index; }));
    std::set<int> ids;
    for (const auto& c : set) ids.insert(c.index);
    REQUIRE(ids.size() == 22);
    REQUIRE(ids.count(0));
    REQUIRE(ids.count(index - 1));
    for (int pair = 1; pair <= 7; ++pair) {
        REQUIRE(ids.count((pair - 1) * 5));
        REQUIRE(ids.count((pair - 1) * 5 + 4));
    }

    channels.erase(std::remove_if(channels.begin(), channels.end(),
                                  [](const ChannelPoint& c) { return c.front_pair == 3 && c.index % 5 != 0; }),
                   channels.end());
    REQUIRE_THROWS_AS(select_worst_case(p, channels), std::invalid_argument);
}

TEST_CASE("channel table JSON round-trips")
{
    PlantParams p;
    std::vector<ChannelPoint> channels{mode_centred_channel(p, 0, 1, 0.5, 3.0), mode_centred_channel(p, 1, 7, 4.5, 44.0)};
    REQUIRE(channels_from_json(channels_to_json(channels)) == channels);
}

TEST_CASE("mode-centred channels sit on a mode centre")
{
    PlantParams p;
    for (double rear : {2.0, 17.5, 47.0}) {
        const auto c = mode_centred_channel(p, 0, 4, 5.0, rear);
        REQUIRE(c.phase_ma >= 0.0);
        REQUIRE(c.phase_ma < p.phase_range_ma);
        const auto lp = LaserPlant(p).resolve(channel_currents(p, c), 4);
        REQUIRE(lp.detuning_ghz == Approx(0.0).margin(1e-6));
    }
}

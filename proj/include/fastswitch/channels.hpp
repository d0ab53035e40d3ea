#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "fastswitch/channel_point.hpp"
#include "fastswitch/params.hpp"
#include "fastswitch/testbed.hpp"

namespace fastswitch {

struct MapResolution {
    double rear_step_ma = 0.5;
    double front_step_ma = 0.25;
    double phase_ma = 6.0;  // phase current held during the sweep

    void validate() const;
};

struct MapPoint {
    int front_pair = 1;
    double front_ma = 0.0;
    double rear_ma = 0.0;
    double frequency_thz = 0.0;

    bool operator==(const MapPoint&) const = default;
};

/// Static frequency on a regular (pair, front scaling, rear) grid. Points are stored pair
/// major, then front, then rear, all ascending.
struct TuningMap {
    MapResolution resolution;
    int n_front_pairs = 0;
    std::size_t n_front = 0;
    std::size_t n_rear = 0;
    std::vector<MapPoint> points;

    const MapPoint& at(int pair, std::size_t front_index, std::size_t rear_index) const;
    double min_frequency_thz() const;
    double max_frequency_thz() const;

    bool operator==(const TuningMap&) const = default;
};

/// Measure the static frequency at every grid point through the testbed.
TuningMap sweep_map(Testbed& testbed, const PlantParams& params, const MapResolution& resolution = {});

void write_map_csv(std::ostream& out, const TuningMap& map);
TuningMap read_map_csv(std::istream& in, const MapResolution& resolution);

struct PlacementConfig {
    double first_thz = 190.65;
    double last_thz = 196.70;
    double spacing_ghz = 50.0;
    double max_rear_ma = 47.5;
    double max_error_mhz = 300.0;
    double candidate_window_ghz = 25.0;  // map points this close to the target are candidates
    double rear_search_below_ma = 1.0;   // rear refinement window around a candidate
    double rear_search_above_ma = 8.0;
    double rear_coarse_step_ma = 0.25;
    double rear_fine_step_ma = 0.01;
    double phase_scan_step_ma = 0.05;
    double min_phase_margin_ma = 4.0;    // phase distance to the nearest mode hop

    void validate() const;
};

class PlacementError : public std::runtime_error {
public:
    PlacementError(double frequency_thz, const std::string& why);
    double frequency_thz() const { return frequency_thz_; }

private:
    double frequency_thz_;
};

/// One channel per ITU frequency from first_thz to last_thz. Candidate (pair, front) cells
/// come from the map, ordered by their lowest rear current; rear and phase are then refined
/// on the testbed so the channel sits in the middle of its cavity mode and on frequency.
/// The first candidate whose phase margin reaches min_phase_margin_ma wins, otherwise the
/// widest margin found.
/// Throws PlacementError naming the first frequency with no feasible point.
std::vector<ChannelPoint> place_itu_channels(const TuningMap& map, Testbed& testbed, const PlantParams& params,
                                             const PlacementConfig& config = {});

struct WorstCaseConfig {
    int n_extra = 8;
};

/// Lowest- and highest-rear channel on every front pair, the two frequency extremes, then
/// extras that add the largest summed voltage swing to the set, up to 2 * pairs + n_extra
/// channels. Returned in channel-index order.
std::vector<ChannelPoint> select_worst_case(const PlantParams& params, const std::vector<ChannelPoint>& channels,
                                            const WorstCaseConfig& config = {});

/// Operating point with the phase current chosen so the mirror peak sits on the centre of
/// its cavity mode, and the ITU frequency set to the resulting static frequency.
ChannelPoint mode_centred_channel(const PlantParams& params, int index, int front_pair, double front_ma,
                                  double rear_ma);

std::string channels_to_json(const std::vector<ChannelPoint>& channels);
std::vector<ChannelPoint> channels_from_json(const std::string& text);

}  // namespace fastswitch

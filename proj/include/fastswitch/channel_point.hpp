#pragma once

namespace fastswitch {

/// A static operating point of the laser and the ITU frequency it serves.
struct ChannelPoint {
    int index = 0;  // position in the channel plan, 0 = lowest frequency
    double itu_frequency_thz = 0.0;
    int front_pair = 1;
    double front_scaling_ma = 0.0;
    double rear_ma = 0.0;
    double phase_ma = 0.0;
    double static_error_mhz = 0.0;

    bool operator==(const ChannelPoint&) const = default;
};

}  // namespace fastswitch

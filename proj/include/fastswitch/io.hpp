#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "fastswitch/dsp.hpp"
#include "fastswitch/plant.hpp"
#include "fastswitch/waveform.hpp"

namespace fastswitch {

/// time_ns,offset_GHz
void write_trajectory_csv(std::ostream& out, const FrequencyTrajectory& trajectory);

/// time_ns,offset_GHz,valid. Invalid samples are written with offset 0.
void write_trace_csv(std::ostream& out, const FrequencyTrace& trace);

/// Inverse of write_trace_csv; the grid must be uniform. Throws std::invalid_argument.
FrequencyTrace read_trace_csv(std::istream& in);

/// sample_index,volts for one section.
void write_waveform_csv(std::ostream& out, const DriveWaveform& drive, Section section);

/// Sample rate, burst period, DAC resolution, plateau voltages and the D1-D4 select pattern
/// as run-length segments.
std::string waveform_header_json(const DriveWaveform& drive);

/// waveform_<section>.csv for every section plus waveform.json under `dir`.
void write_waveform_files(const DriveWaveform& drive, const std::filesystem::path& dir);

/// Whole-file helpers; throw std::runtime_error naming the path.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fastswitch

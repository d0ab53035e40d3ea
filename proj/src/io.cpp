#include "fastswitch/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fastswitch {

void write_trajectory_csv(std::ostream& out, const FrequencyTrajectory& trajectory)
{
    out << "time_ns,offset_GHz\n";
    char buf[64];
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.4f,%.6f\n", static_cast<double>(i) * trajectory.dt_ns,
                      trajectory.offset_ghz[i]);
        out << buf;
    }
}

void write_trace_csv(std::ostream& out, const FrequencyTrace& trace)
{
    out << "time_ns,offset_GHz,valid\n";
    char buf[80];
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const bool ok = trace.valid[i] != 0;
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%d\n", trace.time_ns[i], ok ? trace.offset_ghz[i] : 0.0,
                      ok ? 1 : 0);
        out << buf;
    }
}

FrequencyTrace read_trace_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("time_ns,offset_GHz,valid", 0) != 0)
        throw std::invalid_argument("trace CSV: missing header time_ns,offset_GHz,valid");
    FrequencyTrace trace;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        double t = 0.0, f = 0.0;
        int v = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%d", &t, &f, &v) != 3 || (v != 0 && v != 1) || !std::isfinite(t) ||
            !std::isfinite(f))
            throw std::invalid_argument("trace CSV: bad row " + std::to_string(row) + " '" + line + "'");
        trace.time_ns.push_back(t);
        trace.offset_ghz.push_back(f);
        trace.valid.push_back(static_cast<std::uint8_t>(v));
    }
    if (trace.empty()) throw std::invalid_argument("trace CSV: no samples");
    trace.check();
    return trace;
}

void write_waveform_csv(std::ostream& out, const DriveWaveform& drive, Section section)
{
    out << "sample_index,volts\n";
    char buf[64];
    const auto& v = drive.volts[section];
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f\n", i, v[i]);
        out << buf;
    }
}

std::string waveform_header_json(const DriveWaveform& drive)
{
    nlohmann::ordered_json j;
    j["sample_rate_msps"] = drive.sample_rate_msps;
    j["burst_period_ns"] = drive.burst_period_ns;
    j["samples"] = drive.size();
    j["samples_per_burst"] = drive.samples_per_burst();
    j["awg_bits"] = drive.awg_bits;
    nlohmann::ordered_json plateaus;
    for (Section s : kDynamicSections)
        plateaus[std::string(to_string(s))] = {{"origin_V", drive.base_volts_from[s]}, {"target_V", drive.base_volts_to[s]}};
    j["plateaus"] = plateaus;

    // Each select line as [start_sample, level] segments.
    nlohmann::ordered_json select;
    for (std::size_t line = 0; line < drive.select.size(); ++line) {
        nlohmann::ordered_json segs = nlohmann::ordered_json::array();
        const auto& d = drive.select[line];
        for (std::size_t i = 0; i < d.size(); ++i)
            if (i == 0 || d[i] != d[i - 1]) segs.push_back({i, static_cast<int>(d[i])});
        select["D" + std::to_string(line + 1)] = segs;
    }
    j["select"] = select;
    j["clamped"] = drive.clamped;
    j["clamp_notes"] = drive.clamp_notes;
    return j.dump(2) + "\n";
}

void write_waveform_files(const DriveWaveform& drive, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    for (Section s : kDynamicSections) {
        std::ostringstream os;
        write_waveform_csv(os, drive, s);
        write_text_file(dir / ("waveform_" + std::string(to_string(s)) + ".csv"), os.str());
    }
    write_text_file(dir / "waveform.json", waveform_header_json(drive));
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace fastswitch

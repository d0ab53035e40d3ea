#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fastswitch/campaign.hpp"

namespace fastswitch {

struct CdfPoint {
    double time_ns = 0.0;
    double fraction = 0.0;  // of settled switches at or below time_ns
};

/// Empirical CDF of switch time for one stage and settling threshold.
struct CdfTable {
    std::string stage;  // "rear_only" or "final"
    double threshold_ghz = 10.0;
    std::vector<CdfPoint> points;  // one per settled switch, ascending
    std::size_t unsettled = 0;
};

struct ScatterPoint {
    int from = 0;
    int to = 0;
    double delta_rear_ma = 0.0;
    double mean_switch_ns = 0.0;
};

struct WeightRow {
    int from = 0;
    int to = 0;
    Section section = Section::Rear;
    Edge edge = Edge::Rising;
    int tap = 0;
    double weight = 0.0;
};

struct StageSummary {
    std::size_t settled = 0;
    std::size_t unsettled = 0;
    double p95_ns = 0.0;  // nearest rank over all switches; infinite if an unsettled one is reached
    double max_ns = 0.0;  // infinite when any switch is unsettled
    double fraction_within_10ns = 0.0;
    double fraction_within_20ns = 0.0;
};

struct CampaignSummary {
    std::size_t records = 0;
    std::vector<std::string> failures;  // "from -> to: message"
    StageSummary rear_only;
    StageSummary final_stage;
    std::size_t hops_detected = 0;
    std::size_t phase_corrected = 0;
    std::size_t phase_unresolved = 0;
    double spearman_delta_rear_vs_mean = 0.0;
    double worst_offset_after_15ns_ghz = 0.0;
    std::size_t within_5ghz_after_15ns = 0;
};

struct CampaignReport {
    std::vector<SwitchResult> records;
    std::vector<CdfTable> cdfs;  // rear_only/final at 10 and 5 GHz
    std::vector<ScatterPoint> scatter;
    std::vector<WeightRow> weights;
    CampaignSummary summary;
};

/// Spearman rank correlation; ties get their average rank. NaN when either side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Aggregate calibration results. Failed records count in `failures` and nowhere else.
/// Throws std::invalid_argument on an empty input.
CampaignReport build_report(std::vector<SwitchResult> records);

/// run_pairs followed by build_report.
CampaignReport run_campaign(const PlantParams& params, const std::vector<ChannelPoint>& test_set,
                            const TestbedFactory& factory, const CampaignConfig& config);

std::string switch_result_to_json(const SwitchResult& result);
SwitchResult switch_result_from_json(const std::string& text);
std::string records_to_json(const std::vector<SwitchResult>& records);
std::vector<SwitchResult> records_from_json(const std::string& text);

std::string cdf_csv(const CampaignReport& report);
std::string scatter_csv(const CampaignReport& report);
std::string weights_csv(const CampaignReport& report);
std::string summary_json(const CampaignReport& report);

/// records.json, cdf.csv, scatter.csv, weights.csv and summary.json under `dir`.
void write_report(const CampaignReport& report, const std::filesystem::path& dir);

}  // namespace fastswitch

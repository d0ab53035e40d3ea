#include "fastswitch/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "fastswitch/io.hpp"

namespace fastswitch {

using nlohmann::ordered_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> average_ranks(const std::vector<double>& v)
{
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
        i = j + 1;
    }
    return rank;
}

double switch_or_inf(const SwitchTime& t) { return t.settled ? t.time_ns : kInf; }

StageSummary summarise_stage(const std::vector<double>& times)
{
    StageSummary s;
    if (times.empty()) return s;
    std::vector<double> sorted = times;
    std::sort(sorted.begin(), sorted.end());
    for (double t : sorted) (std::isfinite(t) ? s.settled : s.unsettled)++;
    const auto n = static_cast<double>(sorted.size());
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * n));
    s.p95_ns = sorted[std::max<std::size_t>(rank, 1) - 1];
    s.max_ns = sorted.back();
    const auto within = [&](double limit) {
        return static_cast<double>(std::count_if(sorted.begin(), sorted.end(), [&](double t) { return t <= limit; })) / n;
    };
    s.fraction_within_10ns = within(10.0);
    s.fraction_within_20ns = within(20.0);
    return s;
}

CdfTable make_cdf(const std::string& stage, double threshold, const std::vector<double>& times)
{
    CdfTable c;
    c.stage = stage;
    c.threshold_ghz = threshold;
    std::vector<double> settled;
    for (double t : times) {
        if (std::isfinite(t))
            settled.push_back(t);
        else
            ++c.unsettled;
    }
    std::sort(settled.begin(), settled.end());
    for (std::size_t i = 0; i < settled.size(); ++i)
        c.points.push_back({settled[i], static_cast<double>(i + 1) / static_cast<double>(settled.size())});
    return c;
}

std::string num(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// JSON has no infinity; unsettled or out-of-band values go out as null.
ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

double number_or_inf(const nlohmann::json& j) { return j.is_null() ? kInf : j.get<double>(); }

ordered_json switch_json(const SwitchTime& t)
{
    return ordered_json{{"settled", t.settled}, {"time_ns", t.settled ? ordered_json(t.time_ns) : ordered_json(nullptr)}};
}

SwitchTime switch_from(const nlohmann::json& j)
{
    SwitchTime t;
    t.settled = j.at("settled").get<bool>();
    if (t.settled) t.time_ns = j.at("time_ns").get<double>();
    return t;
}

ordered_json weights_json(const PreEmphasisWeights& w)
{
    return ordered_json{{"section", std::string(to_string(w.section))},
                        {"edge", to_string(w.edge)},
                        {"mode", to_string(w.mode)},
                        {"bin_width_ns", w.bin_width_ns},
                        {"h", w.h}};
}

PreEmphasisWeights weights_from(const nlohmann::json& j)
{
    PreEmphasisWeights w;
    w.section = section_from_string(j.at("section").get<std::string>());
    const auto edge = j.at("edge").get<std::string>();
    if (edge != "rising" && edge != "falling") throw std::invalid_argument("unknown edge '" + edge + "'");
    w.edge = edge == "rising" ? Edge::Rising : Edge::Falling;
    const auto mode = j.at("mode").get<std::string>();
    if (mode != "additive" && mode != "multiplicative") throw std::invalid_argument("unknown weight mode '" + mode + "'");
    w.mode = mode == "additive" ? WeightMode::Additive : WeightMode::Multiplicative;
    w.bin_width_ns = j.at("bin_width_ns").get<double>();
    w.h = j.at("h").get<std::vector<double>>();
    return w;
}

ordered_json errors_json(const std::vector<BinnedError>& errors)
{
    ordered_json arr = ordered_json::array();
    for (const auto& e : errors) {
        std::vector<int> filled(e.filled.begin(), e.filled.end());
        arr.push_back(ordered_json{{"e", e.e}, {"bin_width_ns", e.bin_width_ns}, {"filled", filled}});
    }
    return arr;
}

std::vector<BinnedError> errors_from(const nlohmann::json& arr)
{
    std::vector<BinnedError> out;
    for (const auto& j : arr) {
        BinnedError e;
        e.e = j.at("e").get<std::vector<double>>();
        e.bin_width_ns = j.at("bin_width_ns").get<double>();
        for (int f : j.at("filled").get<std::vector<int>>()) e.filled.push_back(static_cast<std::uint8_t>(f != 0));
        out.push_back(std::move(e));
    }
    return out;
}

ordered_json record_json(const CalibrationRecord& r)
{
    ordered_json j;
    j["from"] = r.from;
    j["to"] = r.to;
    j["rear_edge"] = to_string(r.rear_edge);
    j["seed_first_tap"] = r.seed_first_tap;
    j["rear_history"] = r.rear_history;
    j["rear_errors"] = errors_json(r.rear_errors);
    j["rear_chosen"] = r.rear_chosen;
    j["rear_weights"] = weights_json(r.rear_weights);
    if (r.phase) {
        const auto& p = *r.phase;
        j["phase"] = ordered_json{{"history", p.history},
                                  {"errors", errors_json(p.errors)},
                                  {"chosen", p.chosen},
                                  {"final_weights", weights_json(p.final_weights)},
                                  {"hop_before", p.hop_before},
                                  {"hop_after", p.hop_after},
                                  {"unresolved", p.unresolved}};
    } else {
        j["phase"] = nullptr;
    }
    j["clamp_events"] = r.clamp_events;
    j["baseline_switch"] = switch_json(r.baseline_switch);
    j["rear_only_switch"] = switch_json(r.rear_only_switch);
    j["final_switch"] = switch_json(r.final_switch);
    j["final_switch_5ghz"] = switch_json(r.final_switch_5ghz);
    j["burst_switch_ns"] = r.burst_switch_ns;
    j["mode_hop_detected"] = r.mode_hop_detected;
    j["mode_hop_corrected"] = r.mode_hop_corrected;
    return j;
}

CalibrationRecord record_from(const nlohmann::json& j)
{
    CalibrationRecord r;
    r.from = j.at("from").get<int>();
    r.to = j.at("to").get<int>();
    r.rear_edge = j.at("rear_edge").get<std::string>() == "falling" ? Edge::Falling : Edge::Rising;
    r.seed_first_tap = j.at("seed_first_tap").get<double>();
    r.rear_history = j.at("rear_history").get<std::vector<std::vector<double>>>();
    r.rear_errors = errors_from(j.at("rear_errors"));
    r.rear_chosen = j.at("rear_chosen").get<std::size_t>();
    r.rear_weights = weights_from(j.at("rear_weights"));
    if (!j.at("phase").is_null()) {
        const auto& pj = j.at("phase");
        PhaseCalibration p;
        p.history = pj.at("history").get<std::vector<std::vector<double>>>();
        p.errors = errors_from(pj.at("errors"));
        p.chosen = pj.at("chosen").get<std::size_t>();
        p.final_weights = weights_from(pj.at("final_weights"));
        p.hop_before = pj.at("hop_before").get<bool>();
        p.hop_after = pj.at("hop_after").get<bool>();
        p.unresolved = pj.at("unresolved").get<bool>();
        r.phase = std::move(p);
    }
    r.clamp_events = j.at("clamp_events").get<int>();
    r.baseline_switch = switch_from(j.at("baseline_switch"));
    r.rear_only_switch = switch_from(j.at("rear_only_switch"));
    r.final_switch = switch_from(j.at("final_switch"));
    r.final_switch_5ghz = switch_from(j.at("final_switch_5ghz"));
    r.burst_switch_ns = j.at("burst_switch_ns").get<std::vector<double>>();
    r.mode_hop_detected = j.at("mode_hop_detected").get<bool>();
    r.mode_hop_corrected = j.at("mode_hop_corrected").get<bool>();
    return r;
}

ordered_json result_json(const SwitchResult& r)
{
    ordered_json j;
    j["from"] = r.from;
    j["to"] = r.to;
    j["delta_rear_ma"] = r.delta_rear_ma;
    j["error"] = r.error;
    j["rear_only_switch_5ghz"] = switch_json(r.rear_only_switch_5ghz);
    j["offset_after_15ns_ghz"] = finite_or_null(r.offset_after_15ns_ghz);
    j["record"] = r.ok() ? record_json(r.record) : ordered_json(nullptr);
    return j;
}

SwitchResult result_from(const nlohmann::json& j)
{
    SwitchResult r;
    r.from = j.at("from").get<int>();
    r.to = j.at("to").get<int>();
    r.delta_rear_ma = j.at("delta_rear_ma").get<double>();
    r.error = j.at("error").get<std::string>();
    r.rear_only_switch_5ghz = switch_from(j.at("rear_only_switch_5ghz"));
    r.offset_after_15ns_ghz = number_or_inf(j.at("offset_after_15ns_ghz"));
    if (!j.at("record").is_null()) r.record = record_from(j.at("record"));
    return r;
}

ordered_json stage_json(const StageSummary& s)
{
    return ordered_json{{"settled", s.settled},
                        {"unsettled", s.unsettled},
                        {"p95_ns", finite_or_null(s.p95_ns)},
                        {"max_ns", finite_or_null(s.max_ns)},
                        {"fraction_within_10ns", s.fraction_within_10ns},
                        {"fraction_within_20ns", s.fraction_within_20ns}};
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
    if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / std::sqrt(sxx * syy);
}

CampaignReport build_report(std::vector<SwitchResult> records)
{
    if (records.empty()) throw std::invalid_argument("report: no records");
    CampaignReport rep;
    auto& sum = rep.summary;
    sum.records = records.size();

    std::vector<double> rear10, rear5, fin10, fin5, dx, dy;
    for (const auto& r : records) {
        if (!r.ok()) {
            sum.failures.push_back(std::to_string(r.from) + " -> " + std::to_string(r.to) + ": " + r.error);
            continue;
        }
        const auto& rec = r.record;
        rear10.push_back(switch_or_inf(rec.rear_only_switch));
        rear5.push_back(switch_or_inf(r.rear_only_switch_5ghz));
        fin10.push_back(switch_or_inf(rec.final_switch));
        fin5.push_back(switch_or_inf(rec.final_switch_5ghz));

        if (rec.mode_hop_detected) {
            ++sum.hops_detected;
            if (rec.mode_hop_corrected)
                ++sum.phase_corrected;
            else
                ++sum.phase_unresolved;
        }

        const double mean = rec.mean_burst_switch_ns();
        rep.scatter.push_back({r.from, r.to, r.delta_rear_ma, mean});
        if (std::isfinite(mean)) {
            dx.push_back(r.delta_rear_ma);
            dy.push_back(mean);
        }

        if (std::isfinite(r.offset_after_15ns_ghz)) {
            sum.worst_offset_after_15ns_ghz = std::max(sum.worst_offset_after_15ns_ghz, r.offset_after_15ns_ghz);
            if (r.offset_after_15ns_ghz <= 5.0) ++sum.within_5ghz_after_15ns;
        } else {
            sum.worst_offset_after_15ns_ghz = kInf;
        }

        const auto add_weights = [&](const PreEmphasisWeights& w) {
            for (std::size_t k = 0; k < w.h.size(); ++k)
                rep.weights.push_back({r.from, r.to, w.section, w.edge, static_cast<int>(k), w.h[k]});
        };
        add_weights(rec.rear_weights);
        if (rec.phase) add_weights(rec.phase->final_weights);
    }

    sum.rear_only = summarise_stage(rear10);
    sum.final_stage = summarise_stage(fin10);
    sum.spearman_delta_rear_vs_mean = spearman(dx, dy);
    rep.cdfs = {make_cdf("rear_only", 10.0, rear10), make_cdf("final", 10.0, fin10),
                make_cdf("rear_only", 5.0, rear5), make_cdf("final", 5.0, fin5)};
    rep.records = std::move(records);
    return rep;
}

CampaignReport run_campaign(const PlantParams& params, const std::vector<ChannelPoint>& test_set,
                            const TestbedFactory& factory, const CampaignConfig& config)
{
    return build_report(run_pairs(params, test_set, factory, config));
}

std::string switch_result_to_json(const SwitchResult& result) { return result_json(result).dump(2) + "\n"; }

SwitchResult switch_result_from_json(const std::string& text) { return result_from(nlohmann::json::parse(text)); }

std::string records_to_json(const std::vector<SwitchResult>& records)
{
    ordered_json arr = ordered_json::array();
    for (const auto& r : records) arr.push_back(result_json(r));
    return arr.dump(2) + "\n";
}

std::vector<SwitchResult> records_from_json(const std::string& text)
{
    const auto arr = nlohmann::json::parse(text);
    if (!arr.is_array()) throw std::invalid_argument("records: expected a JSON array");
    std::vector<SwitchResult> out;
    for (const auto& j : arr) out.push_back(result_from(j));
    return out;
}

std::string cdf_csv(const CampaignReport& report)
{
    std::string out = "stage,threshold_GHz,time_ns,fraction\n";
    for (const auto& c : report.cdfs)
        for (const auto& p : c.points)
            out += c.stage + "," + num(c.threshold_ghz) + "," + num(p.time_ns) + "," + num(p.fraction) + "\n";
    return out;
}

std::string scatter_csv(const CampaignReport& report)
{
    std::string out = "# spearman " + num(report.summary.spearman_delta_rear_vs_mean) + "\n";
    out += "from,to,delta_rear_mA,mean_switch_ns\n";
    for (const auto& s : report.scatter)
        out += std::to_string(s.from) + "," + std::to_string(s.to) + "," + num(s.delta_rear_ma) + "," +
               num(s.mean_switch_ns) + "\n";
    return out;
}

std::string weights_csv(const CampaignReport& report)
{
    std::string out = "from,to,section,edge,tap,weight\n";
    for (const auto& w : report.weights)
        out += std::to_string(w.from) + "," + std::to_string(w.to) + "," + std::string(to_string(w.section)) + "," +
               to_string(w.edge) + "," + std::to_string(w.tap) + "," + num(w.weight) + "\n";
    return out;
}

std::string summary_json(const CampaignReport& report)
{
    const auto& s = report.summary;
    ordered_json j;
    j["records"] = s.records;
    j["failures"] = s.failures;
    j["rear_only"] = stage_json(s.rear_only);
    j["final"] = stage_json(s.final_stage);
    j["hops_detected"] = s.hops_detected;
    j["phase_corrected"] = s.phase_corrected;
    j["phase_unresolved"] = s.phase_unresolved;
    j["spearman_delta_rear_vs_mean_switch"] = finite_or_null(s.spearman_delta_rear_vs_mean);
    j["worst_offset_after_15ns_GHz"] = finite_or_null(s.worst_offset_after_15ns_ghz);
    j["within_5GHz_after_15ns"] = s.within_5ghz_after_15ns;
    return j.dump(2) + "\n";
}

void write_report(const CampaignReport& report, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    write_text_file(dir / "records.json", records_to_json(report.records));
    write_text_file(dir / "cdf.csv", cdf_csv(report));
    write_text_file(dir / "scatter.csv", scatter_csv(report));
    write_text_file(dir / "weights.csv", weights_csv(report));
    write_text_file(dir / "summary.json", summary_json(report));
}

}  // namespace fastswitch

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fastswitch/campaign.hpp"
#include "fastswitch/channels.hpp"
#include "fastswitch/dsp.hpp"
#include "fastswitch/io.hpp"
#include "fastswitch/optimizer.hpp"
#include "fastswitch/report.hpp"

using namespace fastswitch;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void verdict(int n, bool ok, const std::string& detail)
{
    std::printf("criterion %d: %s  %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// --- 1 -------------------------------------------------------------------------------

IQCapture noisy_tone(double f_ghz, double snr_db, std::size_t n, std::mt19937_64& rng)
{
    IQCapture c;
    c.sample_rate_gsps = 50.0;
    c.burst_period_ns = static_cast<double>(n) / c.sample_rate_gsps;
    c.n_bursts = 1;
    const double sigma = std::sqrt(std::pow(10.0, -snr_db / 10.0) / 2.0);
    std::normal_distribution<double> noise(0.0, sigma);
    for (std::size_t i = 0; i < n; ++i) {
        const double ph = 2.0 * std::numbers::pi * f_ghz * static_cast<double>(i) / c.sample_rate_gsps;
        c.samples.emplace_back(std::cos(ph) + noise(rng), std::sin(ph) + noise(rng));
    }
    return c;
}

// Periodogram peak: coarse DFT bins, then a 1 MHz grid around the best bin.
double fft_peak_ghz(const IQCapture& c)
{
    const double fs = c.sample_rate_gsps;
    const std::size_t n = c.samples.size();
    const auto power = [&](double f) {
        std::complex<double> acc{};
        const std::complex<double> step = std::polar(1.0, -2.0 * std::numbers::pi * f / fs);
        std::complex<double> w{1.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            acc += c.samples[i] * w;
            w *= step;
            if (i % 256 == 255) w /= std::abs(w);
        }
        return std::norm(acc);
    };
    double best_f = 0.0, best_p = -1.0;
    const double bin = fs / static_cast<double>(n);
    for (double f = -25.0; f <= 25.0; f += bin) {
        const double p = power(f);
        if (p > best_p) best_p = p, best_f = f;
    }
    const double centre = best_f;
    for (double f = centre - bin; f <= centre + bin; f += 0.001) {
        const double p = power(f);
        if (p > best_p) best_p = p, best_f = f;
    }
    return best_f;
}

void criterion_1()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    double worst_truth = 0.0, worst_oracle = 0.0;
    for (double f : {-20.0, -10.0, -5.0, 0.0, 5.0, 10.0, 20.0}) {
        const auto cap = noisy_tone(f, 20.0, 5000, rng);
        const auto trace = estimate_instantaneous_frequency(cap);
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < trace.size(); ++i)
            if (trace.valid[i]) sum += trace.offset_ghz[i], ++n;
        const double mean = n ? sum / static_cast<double>(n) : std::nan("");
        worst_truth = std::max(worst_truth, std::abs(mean - f));
        worst_oracle = std::max(worst_oracle, std::abs(mean - fft_peak_ghz(cap)));
    }
    const double dt = seconds_since(t0);
    verdict(1, worst_truth <= 0.1 && worst_oracle <= 0.1 && dt < 10.0,
            fmt("max |mean - truth| %.4f GHz, max |mean - FFT peak| %.4f GHz (limit 0.1), %.1f s (limit 10)",
                worst_truth, worst_oracle, dt));
}

// --- 2 -------------------------------------------------------------------------------

void criterion_2()
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    std::uniform_real_distribution<double> mu_d(1e-4, 0.1);
    std::uniform_int_distribution<int> len(1, 8);
    int mismatches = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const int k = len(rng);
        std::vector<double> h(k), e(k), x(k);
        for (int i = 0; i < k; ++i) h[i] = u(rng) / 10.0, e[i] = u(rng), x[i] = u(rng) / 20.0;
        const double mu = mu_d(rng);
        const auto got = update_step(h, e, x, mu);
        for (int i = 0; i < k; ++i) {
            const double step = mu * e[i];
            const double want = h[i] - step * x[i];
            if (got[i] != want) ++mismatches;
        }
    }
    verdict(2, mismatches == 0, fmt("%d mismatching taps over 10000 random inputs", mismatches));
}

// --- 3 -------------------------------------------------------------------------------

FrequencyTrace stepped_trace(double value, auto valid_at)
{
    FrequencyTrace t;
    for (int i = 0; i < 1000; ++i) {
        const double time = 0.02 * i;
        t.time_ns.push_back(time);
        t.offset_ghz.push_back(value);
        t.valid.push_back(valid_at(time) ? 1 : 0);
    }
    return t;
}

void criterion_3()
{
    const auto following = bin_errors(stepped_trace(-3.0, [](double t) { return t >= 8.0; }), 4);
    const bool a = following.e[0] == -25.0 && following.e[1] == -25.0 && following.e[2] == -3.0;
    const auto earlier = bin_errors(stepped_trace(4.0, [](double t) { return t < 4.0; }), 4);
    const bool b = earlier.e[0] == 4.0 && earlier.e[1] == 25.0 && earlier.e[2] == 25.0 && earlier.e[3] == 25.0;
    const auto earlier_neg = bin_errors(stepped_trace(-4.0, [](double t) { return t < 4.0; }), 2);
    const bool b2 = earlier_neg.e[1] == -25.0;
    const auto none = bin_errors(stepped_trace(-9.0, [](double) { return false; }), 4);
    const bool c = none.e == std::vector<double>(4, 25.0);
    verdict(3, a && b && b2 && c,
            fmt("following-bin %s, earlier-bin %s/%s, all-invalid %s", a ? "ok" : "bad", b ? "ok" : "bad",
                b2 ? "ok" : "bad", c ? "ok" : "bad"));
}

// --- 4, 5 ----------------------------------------------------------------------------

void criterion_4(const PlantParams& p)
{
    const auto t0 = Clock::now();
    const auto sw = large_rear_swing(p);
    SimulatedTestbed testbed(p);
    const auto rec = calibrate_pair(p, sw.origin, sw.target, testbed, OptimizerConfig{});
    const double dt = seconds_since(t0);
    const double base = rec.baseline_switch.settled ? rec.baseline_switch.time_ns : INFINITY;
    const double fin = rec.final_switch.settled ? rec.final_switch.time_ns : INFINITY;
    const bool ok = base >= 30.3 * 0.8 && base <= 30.3 * 1.2 && fin <= 10.0 && base / fin >= 3.0 && dt < 30.0;
    verdict(4, ok,
            fmt("45 mA swing %.2f -> %.2f ns (baseline limit 24.24-36.36, optimised <= 10), x%.2f (>= 3), %.1f s "
                "(limit 30)",
                base, fin, base / fin, dt));
}

struct HopCheck {
    bool ok = false;
    std::string detail;
};

HopCheck check_mode_hop_swing(const PlantParams& p)
{
    const auto t0 = Clock::now();
    const auto sw = mode_hop_swing(p);
    SimulatedTestbed testbed(p);
    const auto rec = calibrate_pair(p, sw.origin, sw.target, testbed, OptimizerConfig{});
    const double dt = seconds_since(t0);
    const bool phase_ran = rec.phase.has_value();
    const bool hop_after = phase_ran && rec.phase->hop_after;
    const double fin = rec.final_switch.settled ? rec.final_switch.time_ns : INFINITY;
    const bool ok = rec.mode_hop_detected && phase_ran && !hop_after && rec.mode_hop_corrected && fin <= 10.0 &&
                    dt < 60.0;
    return {ok, fmt("25 mA swing %.1f -> %.1f mA: hop after rear-only %s (rear-only %.2f ns), after phase stage %s, "
                "final %.2f ns (limit 10), %.1f s (limit 60)",
                sw.origin.rear_ma, sw.target.rear_ma, rec.mode_hop_detected ? "yes" : "no",
                rec.rear_only_switch.settled ? rec.rear_only_switch.time_ns : INFINITY,
                phase_ran ? (hop_after ? "hop" : "no hop") : "not run", fin, dt)};
}

void criterion_5(const PlantParams& p)
{
    const auto check = check_mode_hop_swing(p);
    verdict(5, check.ok, check.detail);
    if (check.ok) return;
    // Same swing with the stronger phase self-heating of configs/mode_hop.json, to show the
    // hop detection and phase stage working where the plant does hop. Informational only.
    PlantParams hot = p;
    hot.thermal_gain[Section::Phase] = 0.8;
    hot.thermal_rise_ns[Section::Phase] = 1.5;
    hot.thermal_decay_ns[Section::Phase] = 3.0;
    std::printf("criterion 5 note: with stronger phase self-heating: %s\n", check_mode_hop_swing(hot).detail.c_str());
}

// --- 8 -------------------------------------------------------------------------------

std::vector<ChannelPoint> criterion_8(const PlantParams& p)
{
    const auto t0 = Clock::now();
    SimulatedTestbed testbed(p);
    const auto map = sweep_map(testbed, p, MapResolution{});
    std::vector<ChannelPoint> channels;
    std::string why;
    try {
        channels = place_itu_channels(map, testbed, p, PlacementConfig{});
    } catch (const std::exception& e) {
        why = e.what();
    }
    bool spacing = !channels.empty();
    double worst_err = 0.0, worst_rear = 0.0;
    LaserPlant plant(p);
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const auto& c = channels[i];
        const double expect = 190.65 + 0.05 * static_cast<double>(i);
        if (std::abs(c.itu_frequency_thz - expect) > 1e-9) spacing = false;
        worst_rear = std::max(worst_rear, c.rear_ma);
        const double f = plant.static_frequency_thz(channel_currents(p, c), c.front_pair);
        worst_err = std::max(worst_err, std::abs(f - c.itu_frequency_thz) * 1e6);
    }
    const double span = channels.empty() ? 0.0 : channels.back().itu_frequency_thz - channels.front().itu_frequency_thz;
    std::vector<ChannelPoint> worst;
    if (!channels.empty()) worst = select_worst_case(p, channels);
    const std::size_t pairs = worst.size() * (worst.size() - (worst.empty() ? 0 : 1));
    const bool ok = channels.size() == 122 && spacing && std::abs(span - 6.05) < 1e-9 && worst_rear <= 47.5 &&
                    worst_err <= 300.0 && worst.size() == 22 && pairs == 462;
    verdict(8, ok,
            fmt("%zu channels, 50 GHz grid %s, span %.3f THz, max rear %.2f mA (<= 47.5), max error %.1f MHz (<= 300), "
                "test set %zu channels / %zu pairs, %.1f s%s",
                channels.size(), spacing ? "exact" : "broken", span, worst_rear, worst_err, worst.size(), pairs,
                seconds_since(t0), why.empty() ? "" : (" [" + why + "]").c_str()));
    return worst;
}

// --- 6, 7 ----------------------------------------------------------------------------

void criteria_6_7(const PlantParams& p, const std::vector<ChannelPoint>& test_set)
{
    const auto t0 = Clock::now();
    CampaignConfig cc;
    cc.progress = [](std::size_t done, std::size_t total) {
        if (done % 50 == 0) std::fprintf(stderr, "  campaign %zu / %zu\n", done, total);
    };
    const auto rep = run_campaign(p, test_set, simulated_testbed_factory(), cc);
    const double dt = seconds_since(t0);
    const auto& s = rep.summary;
    const auto out = std::filesystem::path("acceptance_campaign");
    write_report(rep, out);

    const std::size_t n = s.records - s.failures.size();
    const bool ok6 = s.records == 462 && s.failures.empty() && dt < 600.0 && s.rear_only.fraction_within_10ns >= 0.90 &&
                     s.rear_only.fraction_within_20ns == 1.0 && s.final_stage.fraction_within_10ns == 1.0 &&
                     s.within_5ghz_after_15ns == n;
    verdict(6, ok6,
            fmt("%zu records, %zu failed, %.0f s (limit 600); rear-only %.1f%% <= 10 ns (>= 90), %.1f%% <= 20 ns (100); "
                "with phase escalation %.1f%% <= 10 ns (100), max %.2f ns; %zu hops, %zu corrected; "
                "%zu/%zu within 5 GHz at 15 ns, worst %.2f GHz",
                s.records, s.failures.size(), dt, 100.0 * s.rear_only.fraction_within_10ns,
                100.0 * s.rear_only.fraction_within_20ns, 100.0 * s.final_stage.fraction_within_10ns,
                s.final_stage.max_ns, s.hops_detected, s.phase_corrected, s.within_5ghz_after_15ns, n,
                s.worst_offset_after_15ns_ghz));
    verdict(7, s.spearman_delta_rear_vs_mean > 0.5,
            fmt("Spearman(|dI_rear|, mean switch) = %.3f (> 0.5)", s.spearman_delta_rear_vs_mean));
}

// --- 9 -------------------------------------------------------------------------------

void criterion_9(const PlantParams& p, const std::vector<ChannelPoint>& test_set)
{
    const std::vector<ChannelPoint> subset(test_set.begin(), test_set.begin() + std::min<std::size_t>(3, test_set.size()));
    const auto root = std::filesystem::path("acceptance_determinism");
    std::filesystem::remove_all(root);
    for (int run = 0; run < 2; ++run) {
        CampaignConfig cc;
        cc.parallelism = run + 1;  // thread count must not matter either
        write_report(run_campaign(p, subset, simulated_testbed_factory(), cc), root / std::to_string(run));
    }
    int differing = 0, files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(root / "0")) {
        ++files;
        const auto other = root / "1" / entry.path().filename();
        if (!std::filesystem::exists(other) || read_text_file(entry.path()) != read_text_file(other)) ++differing;
    }
    verdict(9, files == 5 && differing == 0,
            fmt("%d report files from two %zu-pair runs, %d differ", files, subset.size() * (subset.size() - 1),
                differing));
}

}  // namespace

int main(int argc, char** argv)
{
    // `--quick` skips the full campaign (criteria 6 and 7) for development runs.
    const bool quick = argc > 1 && std::string(argv[1]) == "--quick";
    const PlantParams p;
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4(p);
    criterion_5(p);
    const auto test_set = criterion_8(p);
    if (test_set.empty()) {
        verdict(6, false, "no test set");
        verdict(7, false, "no test set");
        verdict(9, false, "no test set");
    } else {
        if (quick) {
            std::printf("criterion 6: SKIP  --quick\ncriterion 7: SKIP  --quick\n");
        } else {
            criteria_6_7(p, test_set);
        }
        criterion_9(p, test_set);
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

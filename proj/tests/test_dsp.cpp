#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "fastswitch/dsp.hpp"

using namespace fastswitch;
using Catch::Approx;

namespace {

FrequencyTrace make_trace(std::size_t n, double dt_ns, auto&& offset_at, auto&& valid_at)
{
    FrequencyTrace t;
    for (std::size_t i = 0; i < n; ++i) {
        const double time = static_cast<double>(i) * dt_ns;
        t.time_ns.push_back(time);
        t.offset_ghz.push_back(offset_at(time));
        t.valid.push_back(valid_at(time) ? 1 : 0);
    }
    return t;
}

const auto always = [](double) { return true; };

IQCapture tone(double f_ghz, double snr_db, std::size_t n, std::uint64_t seed)
{
    IQCapture c;
    c.sample_rate_gsps = 50.0;
    c.burst_period_ns = static_cast<double>(n) / c.sample_rate_gsps;
    c.n_bursts = 1;
    std::mt19937_64 rng(seed);
    const double sigma = std::sqrt(std::pow(10.0, -snr_db / 10.0) / 2.0);
    std::normal_distribution<double> noise(0.0, sigma);
    for (std::size_t i = 0; i < n; ++i) {
        const double ph = 2.0 * std::numbers::pi * f_ghz * static_cast<double>(i) / c.sample_rate_gsps;
        c.samples.emplace_back(std::cos(ph) + noise(rng), std::sin(ph) + noise(rng));
    }
    return c;
}

}  // namespace

TEST_CASE("estimator follows a clean tone")
{
    for (double f : {-15.0, -2.0, 0.0, 7.5}) {
        const auto trace = estimate_instantaneous_frequency(tone(f, 200.0, 2000, 1));
        REQUIRE(trace.size() == 2000);
        for (std::size_t i = 100; i < 1900; ++i) {
            REQUIRE(trace.valid[i]);
            REQUIRE(trace.offset_ghz[i] == Approx(f).margin(1e-6));
        }
    }
}

TEST_CASE("estimator marks silence invalid")
{
    IQCapture c = tone(3.0, 200.0, 1000, 2);
    for (std::size_t i = 400; i < 600; ++i) c.samples[i] = {0.0, 0.0};
    const auto trace = estimate_instantaneous_frequency(c);
    REQUIRE(trace.valid[200]);
    REQUIRE_FALSE(trace.valid[500]);
    REQUIRE(trace.valid[800]);
}

TEST_CASE("bin_errors averages each bin")
{
    const auto t = make_trace(400, 0.05, [](double) { return 5.0; }, always);
    const auto e = bin_errors(t, 4);
    REQUIRE(e.e == std::vector<double>{5.0, 5.0, 5.0, 5.0});
    REQUIRE(e.filled == std::vector<std::uint8_t>{1, 1, 1, 1});

    // Brute-force per-bin mean of a ramp.
    const auto ramp = make_trace(400, 0.05, [](double x) { return 3.0 * x - 7.0; }, always);
    const auto r = bin_errors(ramp, 4);
    for (int k = 0; k < 4; ++k) {
        double sum = 0.0;
        int n = 0;
        for (std::size_t i = 0; i < ramp.size(); ++i)
            if (ramp.time_ns[i] >= 4.0 * k && ramp.time_ns[i] < 4.0 * (k + 1)) sum += ramp.offset_ghz[i], ++n;
        REQUIRE(r.e[static_cast<std::size_t>(k)] == Approx(sum / n).epsilon(1e-12));
    }
}

TEST_CASE("bin_errors scales linearly on a valid trace")
{
    const auto f = [](double x) { return std::sin(x) * 8.0; };
    const auto a = bin_errors(make_trace(400, 0.05, f, always), 4);
    const auto b = bin_errors(make_trace(400, 0.05, [&](double x) { return -2.5 * f(x); }, always), 4);
    for (std::size_t k = 0; k < 4; ++k) REQUIRE(b.e[k] == Approx(-2.5 * a.e[k]).margin(1e-12));
}

TEST_CASE("fallback sign comes from the following bin, then an earlier one")
{
    SECTION("following bin")
    {
        const auto t = make_trace(400, 0.05, [](double) { return -3.0; }, [](double x) { return x >= 4.0; });
        const auto e = bin_errors(t, 4);
        REQUIRE(e.e[0] == -kFallbackErrorGhz);
        REQUIRE(e.filled[0] == 0);
        REQUIRE(e.e[1] == Approx(-3.0));
    }
    SECTION("earlier bin when nothing follows")
    {
        const auto t = make_trace(400, 0.05, [](double) { return 2.0; }, [](double x) { return x < 4.0; });
        const auto e = bin_errors(t, 4);
        REQUIRE(e.e[0] == Approx(2.0));
        for (std::size_t k = 1; k < 4; ++k) REQUIRE(e.e[k] == kFallbackErrorGhz);
        const auto neg = make_trace(400, 0.05, [](double) { return -2.0; }, [](double x) { return x < 4.0; });
        REQUIRE(bin_errors(neg, 4).e[3] == -kFallbackErrorGhz);
    }
    SECTION("all invalid")
    {
        const auto t = make_trace(400, 0.05, [](double) { return -9.0; }, [](double) { return false; });
        const auto e = bin_errors(t, 4);
        REQUIRE(e.e == std::vector<double>(4, kFallbackErrorGhz));
        REQUIRE(e.filled == std::vector<std::uint8_t>(4, 0));
    }
}

TEST_CASE("switch time is the start of the final in-band stretch")
{
    const auto flat = make_trace(2000, 0.05, [](double) { return 1.0; }, always);
    REQUIRE(measure_switch_time(flat).settled);
    REQUIRE(measure_switch_time(flat).time_ns == 0.0);

    const auto entry = make_trace(2000, 0.05, [](double x) { return x < 7.1 - 1e-9 ? 30.0 : 2.0; }, always);
    REQUIRE(measure_switch_time(entry).time_ns == Approx(7.1));

    const auto hop = make_trace(2000, 0.05, [](double x) { return x < 6.0 ? 40.0 : (x >= 9.0 && x < 14.0 - 1e-9 ? 45.0 : 1.0); },
                                always);
    REQUIRE(measure_switch_time(hop).time_ns == Approx(14.0));

    const auto never = make_trace(2000, 0.05, [](double) { return 12.0; }, always);
    REQUIRE_FALSE(measure_switch_time(never).settled);
}

TEST_CASE("switch time never shrinks with a tighter threshold")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-15.0, 15.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(500);
        for (auto& x : v) x = u(rng) * std::exp(-static_cast<double>(&x - v.data()) / 150.0);
        const auto t = make_trace(500, 0.05, [&](double x) { return v[static_cast<std::size_t>(std::lround(x / 0.05))]; },
                                  always);
        const auto t10 = measure_switch_time(t, 10.0);
        const auto t5 = measure_switch_time(t, 5.0);
        if (t5.settled) REQUIRE(t5.time_ns >= t10.time_ns);
    }
}

TEST_CASE("mode hop needs an excursion of at least the dwell after entering the band")
{
    const auto monotone = make_trace(2000, 0.05, [](double x) { return 60.0 * std::exp(-x / 3.0); }, always);
    REQUIRE_FALSE(detect_mode_hop(monotone).detected);

    const auto fig = make_trace(2000, 0.05,
                                [](double x) { return x < 6.0 ? 30.0 : (x >= 9.0 && x < 14.0 ? 45.0 : 0.5); }, always);
    const auto hop = detect_mode_hop(fig);
    REQUIRE(hop.detected);
    REQUIRE(hop.start_ns == Approx(9.0).margin(0.06));
    REQUIRE(hop.end_ns == Approx(14.0).margin(0.06));

    const auto glitch = make_trace(2000, 0.05, [](double) { return 0.5; },
                                   [](double x) { return !(x >= 9.0 && x < 9.5); });
    REQUIRE_FALSE(detect_mode_hop(glitch).detected);

    const auto dropout = make_trace(2000, 0.05, [](double) { return 0.5; },
                                    [](double x) { return !(x >= 9.0 && x < 12.0); });
    REQUIRE(detect_mode_hop(dropout).detected);
}

TEST_CASE("averaging identical bursts is idempotent")
{
    const auto b = make_trace(300, 0.05, [](double x) { return 20.0 * std::exp(-x / 2.0); },
                              [](double x) { return x > 1.0; });
    const auto avg = average_bursts({b, b, b});
    REQUIRE(avg.offset_ghz.size() == b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        REQUIRE(avg.valid[i] == b.valid[i]);
        if (b.valid[i]) REQUIRE(avg.offset_ghz[i] == Approx(b.offset_ghz[i]).epsilon(1e-12));
    }
    const auto again = average_bursts({avg, avg});
    for (std::size_t i = 0; i < b.size(); ++i)
        if (b.valid[i]) REQUIRE(again.offset_ghz[i] == Approx(avg.offset_ghz[i]).epsilon(1e-12));
}

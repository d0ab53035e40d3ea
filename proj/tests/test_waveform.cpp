#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fastswitch/channels.hpp"
#include "fastswitch/waveform.hpp"

using namespace fastswitch;
using Catch::Approx;

TEST_CASE("IV map inverts on every section")
{
    PlantParams p;
    for (Section s : kDynamicSections) {
        const double range = p.range_ma(s);
        for (int i = 0; i <= 20; ++i) {
            const double I = range * i / 20.0;
            REQUIRE(voltage_to_current(p, s, current_to_voltage(p, s, I)) == Approx(I).margin(1e-9));
        }
        REQUIRE_THROWS_AS(current_to_voltage(p, s, range * 1.01), RangeError);
        REQUIRE_THROWS_AS(current_to_voltage(p, s, -0.1), RangeError);
    }
}

TEST_CASE("front pair select codes round-trip")
{
    for (int pair = 1; pair <= 7; ++pair) {
        const auto r = front_pair_encoding(pair);
        REQUIRE(decode_front_pair(r.d) == pair);
        REQUIRE(std::abs(r.even_grating - r.odd_grating) == 1);
        REQUIRE(std::min(r.even_grating, r.odd_grating) == pair);
    }
    REQUIRE_THROWS_AS(front_pair_encoding(0), std::out_of_range);
    REQUIRE_THROWS_AS(front_pair_encoding(8), std::out_of_range);
}

TEST_CASE("quantiser is exact on codes and flags out-of-window requests")
{
    const IvCurve iv = PlantParams{}.iv_curves[Section::Rear];
    for (std::uint16_t code : {0, 1, 2047, 4095}) {
        bool clamped = true;
        REQUIRE(quantise(iv, 12, code_to_volts(iv, 12, code), clamped) == code);
        REQUIRE_FALSE(clamped);
    }
    bool clamped = false;
    REQUIRE(quantise(iv, 12, iv.v_max + 1.0, clamped) == 4095);
    REQUIRE(clamped);
    REQUIRE(quantise(iv, 12, iv.v_min - 1.0, clamped) == 0);
    REQUIRE(clamped);
}

TEST_CASE("additive weights add dV h(k) after the target edge only")
{
    PlantParams p;
    const auto a = mode_centred_channel(p, 0, 4, 5.0, 40.0);
    const auto b = mode_centred_channel(p, 1, 4, 5.0, 10.0);
    const auto plain = synthesize(p, a, b, PreEmphasisWeights::additive(Section::Rear, Edge::Falling, {0, 0, 0, 0}));
    const auto emph =
        synthesize(p, a, b, PreEmphasisWeights::additive(Section::Rear, Edge::Falling, {0.5, 0.25, 0.1, 0.0}));
    const std::size_t n = plain.samples_per_burst();
    REQUIRE(plain.size() == 2 * n);
    REQUIRE(classify_edge(p, Section::Rear, a, b) == Edge::Falling);
    const double dv = plain.delta_v[Section::Rear];
    REQUIRE(dv < 0.0);
    const double lsb = (p.iv_curves[Section::Rear].v_max - p.iv_curves[Section::Rear].v_min) / 4095.0;
    const std::vector<double> h{0.5, 0.25, 0.1, 0.0};
    for (std::size_t i = 0; i < 2 * n; ++i) {
        const double extra = (i >= n && i - n < 4) ? dv * h[i - n] : 0.0;
        REQUIRE(emph.volts[Section::Rear][i] == Approx(plain.volts[Section::Rear][i] + extra).margin(lsb));
    }
    REQUIRE(emph.volts[Section::Phase] == plain.volts[Section::Phase]);
}

TEST_CASE("multiplicative weights scale the first phase samples")
{
    PlantParams p;
    const auto a = mode_centred_channel(p, 0, 2, 1.0, 30.0);
    const auto b = mode_centred_channel(p, 1, 2, 1.0, 5.0);
    const auto rear = PreEmphasisWeights::additive(Section::Rear, Edge::Falling, {0, 0, 0, 0});
    const auto ones = synthesize(p, a, b, rear, PreEmphasisWeights::multiplicative(Section::Phase, Edge::Rising, {1, 1, 1, 1}));
    const auto none = synthesize(p, a, b, rear);
    REQUIRE(ones.volts[Section::Phase] == none.volts[Section::Phase]);
    const auto scaled =
        synthesize(p, a, b, rear, PreEmphasisWeights::multiplicative(Section::Phase, Edge::Rising, {1.2, 1, 1, 0.8}));
    const std::size_t n = none.samples_per_burst();
    const double lsb = 1.5 / 4095.0;
    REQUIRE(scaled.volts[Section::Phase][n] == Approx(1.2 * none.base_volts_to[Section::Phase]).margin(lsb));
    REQUIRE(scaled.volts[Section::Phase][n + 3] == Approx(0.8 * none.base_volts_to[Section::Phase]).margin(lsb));
    REQUIRE(scaled.volts[Section::Phase][n + 4] == none.volts[Section::Phase][n + 4]);
    REQUIRE_THROWS(PreEmphasisWeights::multiplicative(Section::Phase, Edge::Rising, {1, 1, 0, 1}).validate());
}

TEST_CASE("select lines follow the front pair of each burst")
{
    PlantParams p;
    const auto a = mode_centred_channel(p, 0, 2, 1.0, 30.0);
    const auto b = mode_centred_channel(p, 1, 6, 1.0, 5.0);
    const auto w = synthesize(p, a, b, PreEmphasisWeights::additive(Section::Rear, Edge::Falling, {0, 0, 0, 0}));
    const std::size_t n = w.samples_per_burst();
    std::array<std::uint8_t, 4> first{}, second{};
    for (std::size_t line = 0; line < 4; ++line) {
        first[line] = w.select[line][0];
        second[line] = w.select[line][n];
    }
    REQUIRE(decode_front_pair(first) == 2);
    REQUIRE(decode_front_pair(second) == 6);
}

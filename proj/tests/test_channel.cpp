#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "aircomp/channel.hpp"

using namespace aircomp;

TEST(Rayleigh, UnitPowerOnAverage) {
    Stream rng(42, 0, 0, Purpose::channel);
    double acc = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) acc += std::norm(draw_rayleigh(1, rng).flat_gains[0]);
    EXPECT_NEAR(acc / n, 1.0, 0.02);
}

TEST(Rayleigh, RejectsEmptyNetwork) {
    Stream rng(1);
    EXPECT_THROW(draw_rayleigh(0, rng), InvalidInput);
}

TEST(Rayleigh, Reproducible) {
    Stream a(9, 3, 1, Purpose::channel), b(9, 3, 1, Purpose::channel);
    const auto x = draw_rayleigh(4, a), y = draw_rayleigh(4, b);
    EXPECT_EQ(x.flat_gains, y.flat_gains);
    Stream c(9, 4, 1, Purpose::channel);
    EXPECT_NE(draw_rayleigh(4, c).flat_gains, x.flat_gains);
}

TEST(Streams, PurposeSeparatesSubstreams) {
    Stream a(1, 0, 0, Purpose::noise), b(1, 0, 0, Purpose::channel);
    EXPECT_NE(a.uniform(), b.uniform());
}

TEST(FlatChannel, IdealSum) {
    Stream rng(1);
    const auto ch = unit_channel(2);
    const auto y = apply_flat_channel({CVec{1.0}, CVec{1.0}}, ch, rng);
    ASSERT_EQ(y.size(), 1u);
    EXPECT_EQ(y[0], cplx(2.0, 0.0));
}

TEST(FlatChannel, PureRotation) {
    Stream rng(1);
    ChannelRealization ch;
    ch.flat_gains = {cplx{0.0, 1.0}};
    const auto y = apply_flat_channel({CVec{1.0, 0.0}}, ch, rng);
    EXPECT_EQ(y[0], cplx(0.0, 1.0));
    EXPECT_EQ(y[1], cplx(0.0, 0.0));
}

TEST(FlatChannel, NoiseVariance) {
    Stream rng(5, 0, 0, Purpose::noise);
    const auto ch = unit_channel(1, 1.0);
    const auto y = apply_flat_channel({CVec(100000, cplx{})}, ch, rng);
    double acc = 0.0;
    for (cplx v : y) acc += std::norm(v);
    EXPECT_NEAR(acc / y.size(), 1.0, 0.02);
}

TEST(FlatChannel, LengthMismatch) {
    Stream rng(1);
    EXPECT_THROW(apply_flat_channel({CVec{1.0}, CVec{1.0, 2.0}}, unit_channel(2), rng), InvalidInput);
}

TEST(FlatChannel, Linearity) {
    Stream g(3);
    ChannelRealization ch = draw_rayleigh(3, g);
    std::vector<CVec> x(3, CVec(4)), y(3, CVec(4)), z(3, CVec(4));
    const cplx a{0.3, -1.2}, b{2.0, 0.5};
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 4; ++l) {
            x[k][l] = g.complex_normal();
            y[k][l] = g.complex_normal();
            z[k][l] = a * x[k][l] + b * y[k][l];
        }
    Stream n(0);
    const auto rx = apply_flat_channel(x, ch, n), ry = apply_flat_channel(y, ch, n), rz = apply_flat_channel(z, ch, n);
    for (int l = 0; l < 4; ++l) EXPECT_NEAR(std::abs(rz[l] - (a * rx[l] + b * ry[l])), 0.0, 1e-12);
}

TEST(FlatChannel, EnergyPreservedForUnitGain) {
    Stream g(4), n(0);
    CVec x(64);
    double e = 0.0;
    for (auto& v : x) {
        v = g.complex_normal();
        e += std::norm(v);
    }
    const auto y = apply_flat_channel({x}, unit_channel(1), n);
    double ey = 0.0;
    for (cplx v : y) ey += std::norm(v);
    EXPECT_NEAR(ey, e, 1e-12 * e);
}

TEST(Impairments, ZeroProfileMatchesFlatChannel) {
    Stream g(8), n(0);
    ChannelRealization ch = draw_rayleigh(3, g);
    std::vector<CVec> x(3, CVec(32));
    for (auto& v : x)
        for (auto& s : v) s = g.complex_normal();
    const auto a = apply_impairments(x, ImpairmentProfile::zero(3), ch, 1000.0);
    const auto b = apply_flat_channel(x, ch, n);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(std::abs(a[i] - b[i]), 0.0, 1e-9);
}

TEST(Impairments, PhaseOffsetPiNegates) {
    CVec x{1.0, cplx{0.5, 0.5}, -2.0};
    auto p = ImpairmentProfile::zero(1);
    p.po = {std::numbers::pi};
    const auto y = apply_impairments({x}, p, unit_channel(1), 10.0);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(std::abs(y[i] + x[i]), 0.0, 1e-12);
}

TEST(Impairments, CfoAdvancesPhaseByTwoPiOverT) {
    const double T = 1e-3, fs = 64.0 / T;
    CVec x(65, cplx{1.0, 0.0});
    auto p = ImpairmentProfile::zero(1);
    p.cfo = {1.0 / T};
    const auto y = apply_impairments({x}, p, unit_channel(1), fs);
    // sample 64 sits at t = T: phase advanced by exactly 2 pi
    const double adv = 2.0 * std::numbers::pi * p.cfo[0] * 64.0 / fs;
    EXPECT_NEAR(adv, 2.0 * std::numbers::pi, 1e-12);
    EXPECT_NEAR(std::abs(y[64] - y[0]), 0.0, 1e-9);
    EXPECT_NEAR(std::arg(y[16]), std::numbers::pi / 2.0, 1e-9);
}

TEST(Impairments, DelayShiftsBySamples) {
    CVec x{1.0, 2.0, 3.0, 4.0};
    ChannelRealization ch = unit_channel(1);
    ch.taps = {{Tap{1.0, 0.0}, Tap{0.5, 2.0}}};
    const auto y = apply_impairments({x}, ImpairmentProfile::zero(1), ch, 1.0);
    EXPECT_NEAR(std::abs(y[2] - cplx(3.0 + 0.5)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(y[3] - cplx(4.0 + 1.0)), 0.0, 1e-12);
}

TEST(Impairments, Errors) {
    CVec x(4, 1.0);
    auto p = ImpairmentProfile::zero(1);
    p.to = {10.0};
    EXPECT_THROW(apply_impairments({x}, p, unit_channel(1), 1.0), ConstraintViolation);
    auto q = ImpairmentProfile::zero(1);
    q.cfo = {1.0};
    EXPECT_THROW(apply_impairments({x}, q, unit_channel(1), 5.0), ConstraintViolation);
}

TEST(Impairments, PhaseWrap) {
    ImpairmentProfile p = ImpairmentProfile::zero(3);
    p.po = {3.0 * std::numbers::pi, -std::numbers::pi, 0.5};
    p.normalize();
    EXPECT_NEAR(p.po[0], std::numbers::pi, 1e-12);
    EXPECT_NEAR(p.po[1], std::numbers::pi, 1e-12);
    EXPECT_EQ(p.po[2], 0.5);
}

TEST(Realization, TapValidation) {
    ChannelRealization ch = unit_channel(1);
    ch.taps = {{Tap{1.0, 1.0}, Tap{1.0, 0.5}}};
    EXPECT_THROW(ch.validate(), InvalidInput);
    ch.taps = {{Tap{2.0, 0.0}}};
    EXPECT_THROW(ch.validate(), InvalidInput);
    ch.taps = {{Tap{1.0, 0.0}}};
    EXPECT_NO_THROW(ch.validate());
}

TEST(Snr, NoiseVariance) {
    EXPECT_DOUBLE_EQ(snr_to_noise_variance({0.0, SnrReference::per_user}, 1.0, 1), 1.0);
    EXPECT_NEAR(snr_to_noise_variance({10.0, SnrReference::per_user}, 1.0, 1), 0.1, 1e-15);
    EXPECT_NEAR(snr_to_noise_variance({20.0, SnrReference::total}, 1.0, 10), 0.1, 1e-15);
    EXPECT_EQ(snr_to_noise_variance({INFINITY, SnrReference::per_user}, 1.0, 3), 0.0);
    EXPECT_THROW(snr_to_noise_variance({0.0, SnrReference::per_user}, 0.0, 1), InvalidInput);
}

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "aircomp/csv.hpp"
#include "aircomp/ofdm.hpp"

using namespace aircomp;

namespace {

constexpr double kPi = std::numbers::pi;

CVec random_symbols(Stream& rng, int Q) {
    CVec a(static_cast<std::size_t>(Q));
    for (auto& z : a) z = rng.complex_normal(1.0);
    return a;
}

double inf_norm(const CVec& v) {
    double m = 0.0;
    for (cplx z : v) m = std::max(m, std::abs(z));
    return m;
}

// Waveform covering the receiver window with a few spare samples each side.
SampledWaveform receive(const std::vector<CVec>& a, const OfdmConfig& cfg, const ChannelRealization& ch,
                        const ImpairmentProfile& prof) {
    const double fs = cfg.sample_rate();
    const double start = cfg.backoff - prof.rx_to;
    return superpose_ofdm(a, cfg, ch, prof, start - 8.0 / fs, static_cast<std::size_t>(cfg.samples_per_symbol() + 16));
}

CVec first_q(const CVec& Y, int Q) { return CVec(Y.begin(), Y.begin() + Q); }

} // namespace

TEST(OfdmModulate, DcSubcarrierIsConstant) {
    OfdmConfig cfg;
    cfg.num_subcarriers = 1;
    const auto w = ofdm_modulate({cplx{1.0}}, cfg);
    for (cplx z : w.samples) EXPECT_NEAR(std::abs(z - cplx{1.0}), 0.0, 1e-15);
}

TEST(OfdmModulate, SingleSubcarrierIsTone) {
    OfdmConfig cfg;
    CVec a(16, cplx{});
    a[3] = cplx{0.0, 2.0};
    const auto w = ofdm_modulate(a, cfg, 0.1);
    for (std::size_t n = 0; n < w.samples.size(); ++n)
        EXPECT_NEAR(std::abs(w.samples[n] - a[3] * std::polar(1.0, 2 * kPi * 3 * (w.time(n) - 0.1))), 0.0, 1e-12);
}

TEST(OfdmModulate, CyclicPrefixCopiesTail) {
    OfdmConfig cfg;
    Stream rng(5);
    const auto w = ofdm_modulate(random_symbols(rng, cfg.num_subcarriers), cfg);
    const auto n_cp = static_cast<std::size_t>(std::lround(cfg.cp_duration * cfg.sample_rate()));
    const auto N = static_cast<std::size_t>(cfg.samples_per_symbol());
    ASSERT_EQ(w.samples.size(), n_cp + N);
    for (std::size_t i = 0; i < n_cp; ++i) EXPECT_NEAR(std::abs(w.samples[i] - w.samples[i + N]), 0.0, 1e-12);
}

TEST(OfdmConfig, Validation) {
    OfdmConfig cfg;
    cfg.backoff = 0.5; // > T_cp
    EXPECT_THROW(cfg.validate(), InvalidInput);
    cfg = {};
    cfg.oversampling = 0;
    EXPECT_THROW(cfg.validate(), InvalidInput);
}

TEST(Composite, ZeroOffsetsUnitTap) {
    OfdmConfig cfg;
    const auto c = predict_composite(cfg, unit_channel(3), ImpairmentProfile::zero(3));
    for (const auto& row : c)
        for (cplx z : row) EXPECT_NEAR(std::abs(z - cplx{1.0}), 0.0, 1e-15);
}

TEST(Composite, QuarterSymbolOffsetOnFirstSubcarrier) {
    OfdmConfig cfg;
    auto prof = ImpairmentProfile::zero(1);
    prof.to[0] = 0.25; // net offset -T/4, the largest the prefix absorbs
    const auto c = predict_composite(cfg, unit_channel(1), prof);
    EXPECT_NEAR(std::abs(c[0][1] - std::polar(1.0, -kPi / 2)), 0.0, 1e-12);
    // a +T/4 net offset runs the window past the symbol end
    prof.to[0] = -0.25;
    EXPECT_THROW(predict_composite(cfg, unit_channel(1), prof), ConstraintViolation);
}

TEST(Composite, PhaseRampLinearInSubcarrier) {
    OfdmConfig cfg;
    auto prof = ImpairmentProfile::zero(1);
    prof.to[0] = 0.07;
    const auto c = predict_composite(cfg, unit_channel(1), prof);
    for (int l = 1; l < cfg.num_subcarriers; ++l) {
        const double step = std::arg(c[0][static_cast<std::size_t>(l)] / c[0][static_cast<std::size_t>(l - 1)]);
        EXPECT_NEAR(step, -2 * kPi * 0.07, 1e-12);
    }
}

TEST(Composite, RequiresConditionsAndCpMargin) {
    OfdmConfig cfg;
    auto prof = ImpairmentProfile::zero(2);
    EXPECT_THROW(predict_composite(cfg, unit_channel(2), prof, {false, true, true}), ConstraintViolation);
    EXPECT_THROW(predict_composite(cfg, unit_channel(2), prof, {true, false, true}), ConstraintViolation);
    prof.cfo[1] = 0.1;
    EXPECT_THROW(predict_composite(cfg, unit_channel(2), prof), ConstraintViolation);
    ChannelRealization ch = unit_channel(1);
    ch.taps = {{Tap{cplx{1.0}, 0.0}, Tap{cplx{0.5}, 0.3}}}; // spread beyond the prefix
    EXPECT_THROW(predict_composite(cfg, ch, ImpairmentProfile::zero(1)), ConstraintViolation);
}

TEST(ReceiveDft, SingleNodeRecoversSymbols) {
    OfdmConfig cfg;
    Stream rng(2);
    const auto a = random_symbols(rng, cfg.num_subcarriers);
    const auto Y = receive_dft(receive({a}, cfg, unit_channel(1), ImpairmentProfile::zero(1)), cfg);
    for (int l = 0; l < cfg.num_subcarriers; ++l) EXPECT_NEAR(std::abs(Y[static_cast<std::size_t>(l)] - a[static_cast<std::size_t>(l)]), 0.0, 1e-9);
    for (std::size_t l = static_cast<std::size_t>(cfg.num_subcarriers); l < Y.size(); ++l) EXPECT_NEAR(std::abs(Y[l]), 0.0, 1e-9);
}

TEST(ReceiveDft, OracleEquivalenceRandomInCpDraws) {
    Stream rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        OfdmConfig cfg;
        cfg.num_subcarriers = 8;
        cfg.backoff = rng.uniform(0.0, cfg.cp_duration);
        const int K = 3;
        auto prof = ImpairmentProfile::zero(K);
        prof.rx_to = rng.uniform(-0.02, 0.02);
        ChannelRealization ch = unit_channel(K);
        ch.taps.resize(K);
        std::vector<CVec> a;
        for (int k = 0; k < K; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            const int W = 1 + static_cast<int>(rng.uniform_int(0, 2));
            double d = rng.uniform(0.0, 0.03);
            for (int w = 0; w < W; ++w) {
                ch.taps[ku].push_back({rng.complex_normal(1.0), d});
                d += rng.uniform(0.005, 0.04);
            }
            ch.flat_gains[ku] = ch.taps[ku][0].gain;
            const double tau_min = ch.taps[ku].front().delay, tau_max = ch.taps[ku].back().delay;
            // net = backoff - rx_to - to must land in [tau_max - T_cp, tau_min]
            const double lo = cfg.backoff - prof.rx_to - tau_min, hi = cfg.backoff - prof.rx_to - tau_max + cfg.cp_duration;
            ASSERT_LT(lo, hi);
            prof.to[ku] = rng.uniform(lo, hi);
            prof.po[ku] = rng.uniform(-kPi, kPi);
            a.push_back(random_symbols(rng, cfg.num_subcarriers));
        }
        const auto Y = first_q(receive_dft(receive(a, cfg, ch, prof), cfg, prof.rx_to), cfg.num_subcarriers);
        const auto P = apply_composite(predict_composite(cfg, ch, prof), a);
        double amax = 0.0;
        for (const auto& v : a) amax = std::max(amax, inf_norm(v));
        CVec diff(Y.size());
        for (std::size_t l = 0; l < Y.size(); ++l) diff[l] = Y[l] - P[l];
        worst = std::max(worst, inf_norm(diff) / amax);
    }
    EXPECT_LE(worst, 1e-9);
}

TEST(ReceiveDft, CfoBreaksClosedForm) {
    OfdmConfig cfg;
    cfg.num_subcarriers = 8;
    Stream rng(8);
    const std::vector<CVec> a{random_symbols(rng, 8), random_symbols(rng, 8)};
    auto prof = ImpairmentProfile::zero(2);
    const auto P = apply_composite(predict_composite(cfg, unit_channel(2), prof), a);
    prof.cfo[1] = 0.1 / cfg.symbol_duration;
    const auto Y = first_q(receive_dft(receive(a, cfg, unit_channel(2), prof), cfg), 8);
    CVec diff(8);
    for (std::size_t l = 0; l < 8; ++l) diff[l] = Y[l] - P[l];
    EXPECT_GT(inf_norm(diff), 1e-3);
}

TEST(ReceiveDft, Parseval) {
    OfdmConfig cfg;
    Stream rng(3);
    auto prof = ImpairmentProfile::zero(2);
    prof.to = {0.05, 0.1};
    prof.po = {0.3, -2.0};
    const auto r = receive({random_symbols(rng, 16), random_symbols(rng, 16)}, cfg, unit_channel(2), prof);
    const auto Y = receive_dft(r, cfg);
    const int N = cfg.samples_per_symbol();
    double et = 0.0, ef = 0.0;
    for (int n = 0; n < N; ++n) et += std::norm(r.samples[static_cast<std::size_t>(8 + n)]);
    for (cplx z : Y) ef += std::norm(z);
    EXPECT_NEAR(ef * N, et, 1e-9 * et);
}

TEST(ReceiveDft, WindowErrors) {
    OfdmConfig cfg;
    auto w = ofdm_modulate(CVec(16, cplx{1.0}), cfg);
    w.t0 += 0.3 / cfg.sample_rate();
    EXPECT_THROW(receive_dft(w, cfg), InvalidInput);
    auto s = ofdm_modulate(CVec(16, cplx{1.0}), cfg);
    s.samples.resize(10);
    EXPECT_THROW(receive_dft(s, cfg), ConstraintViolation);
}

TEST(SingleCarrier, DcHasOnlyPhaseOffset) {
    OfdmConfig cfg;
    auto prof = ImpairmentProfile::zero(3);
    prof.to = {0.0, 0.1, 0.2};
    prof.po = {0.0, 1.0, -2.5};
    const auto c = predict_composite(cfg, unit_channel(3), prof);
    const auto dc = single_carrier_view(c);
    ASSERT_EQ(dc.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_NEAR(std::abs(dc[k] - std::polar(1.0, prof.po[k])), 0.0, 1e-15);
        EXPECT_EQ(dc[k], c[k][0]);
    }
    EXPECT_GT(dc[0].real(), 0.0);
    EXPECT_EQ(dc[0].imag(), 0.0);
}

// Calibrate on one pass, then transmit with redrawn phase offsets: the
// pre-equalized sum on a subcarrier degrades.
TEST(Jitter, RedrawnPhaseRaisesMse) {
    OfdmConfig cfg;
    cfg.num_subcarriers = 4;
    cfg.oversampling = 2;
    const int K = 4, trials = 200;
    const double nv = 1e-3;
    double mse_static = 0.0, mse_jitter = 0.0;
    for (int t = 0; t < trials; ++t) {
        Stream rng(11, t, 0, Purpose::impairment);
        auto calib = ImpairmentProfile::zero(K);
        for (int k = 0; k < K; ++k) {
            calib.to[static_cast<std::size_t>(k)] = rng.uniform(0.0, 0.2);
            calib.po[static_cast<std::size_t>(k)] = rng.uniform(-kPi, kPi);
        }
        const auto C = predict_composite(cfg, unit_channel(K), calib);
        std::vector<CVec> a(static_cast<std::size_t>(K), CVec(4));
        cplx truth{};
        for (int k = 0; k < K; ++k) {
            const double s = rng.uniform(-1.0, 1.0);
            truth += s;
            for (int l = 0; l < 4; ++l) a[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] = s / C[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
        }
        auto jitter = calib;
        for (int k = 0; k < K; ++k) jitter.po[static_cast<std::size_t>(k)] = rng.uniform(-kPi, kPi);
        for (int pass = 0; pass < 2; ++pass) {
            auto r = receive(a, cfg, unit_channel(K), pass == 0 ? calib : jitter);
            Stream noise(11, t, 0, Purpose::noise); // same noise in both passes
            for (auto& z : r.samples) z += noise.complex_normal(nv);
            const cplx y = receive_dft(r, cfg)[1];
            (pass == 0 ? mse_static : mse_jitter) += std::norm(y - truth) / trials;
        }
    }
    EXPECT_GT(mse_jitter, mse_static);
    EXPECT_GT(mse_jitter, 10.0 * mse_static);
}

TEST(CompositeCsv, Layout) {
    OfdmConfig cfg;
    cfg.num_subcarriers = 2;
    std::ostringstream os;
    write_composite_csv(os, predict_composite(cfg, unit_channel(2), ImpairmentProfile::zero(2)));
    EXPECT_EQ(os.str(), "k,l,re,im\n0,0,1,0\n0,1,1,0\n1,0,1,0\n1,1,1,0\n");
}

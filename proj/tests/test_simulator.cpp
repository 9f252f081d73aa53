#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "aircomp/csv.hpp"
#include "aircomp/io_json.hpp"
#include "aircomp/simulator.hpp"

using namespace aircomp;

namespace {

SchemeConfig scheme(SchemeKind k, int levels = 64) {
    SchemeConfig c;
    c.kind = k;
    c.levels = levels;
    return c;
}

Scenario sweep(FunctionKind f, int K, Interval range, std::vector<SchemeConfig> schemes, std::vector<double> snr, long N) {
    Scenario sc;
    sc.function.kind = f;
    sc.function.K = K;
    sc.function.input_range = range;
    sc.input = {InputKind::continuous, range, 0};
    sc.schemes = std::move(schemes);
    sc.snr_db = std::move(snr);
    sc.trials = N;
    sc.seed = 42;
    return sc;
}

Scenario csi(std::vector<double> devs, std::vector<int> Ks, std::vector<double> snr, long N) {
    Scenario sc;
    sc.experiment = ExperimentKind::csi;
    sc.function.kind = FunctionKind::sum;
    sc.function.K = Ks.front();
    sc.function.input_range = {-std::sqrt(3.0), std::sqrt(3.0)};
    sc.input = {InputKind::continuous, sc.function.input_range, 0};
    sc.channel = ChannelKind::rayleigh;
    sc.phase_deviation_deg = std::move(devs);
    sc.k_values = std::move(Ks);
    sc.snr_db = std::move(snr);
    sc.trials = N;
    sc.seed = 9;
    return sc;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

TEST(Sweep, AnalogMeanNoiselessIsExact) {
    for (ChannelKind ch : {ChannelKind::awgn, ChannelKind::rayleigh}) {
        auto sc = sweep(FunctionKind::arithmetic_mean, 10, {1, 64}, {scheme(SchemeKind::analog_da)}, {kInf}, 500);
        sc.channel = ch;
        const auto r = run_sweep(sc);
        EXPECT_LT(r.series[0].reports[0].nmse, 1e-24);
    }
}

TEST(Sweep, DeterministicAcrossWorkerCounts) {
    auto sc = sweep(FunctionKind::sum, 5, {0, 7},
                    {scheme(SchemeKind::analog_da), scheme(SchemeKind::digital_bitwise, 8), scheme(SchemeKind::goldenbaum)}, {0.0, 10.0}, 1000);
    sc.channel = ChannelKind::rayleigh;
    const std::string ref = to_json(run_sweep(sc, 1)).at("series").dump();
    for (int w : {4, 16}) EXPECT_EQ(to_json(run_sweep(sc, w)).at("series").dump(), ref) << w << " workers";
    auto c = csi({0, 10, 30}, {4, 8}, {10.0}, 1000);
    const std::string cref = to_json(run_sweep(c, 1)).at("series").dump();
    for (int w : {4, 16}) EXPECT_EQ(to_json(run_sweep(c, w)).at("series").dump(), cref) << w << " workers";
}

TEST(Sweep, ConfidenceHalfwidthScalesAsInverseSqrtN) {
    auto sc = sweep(FunctionKind::arithmetic_mean, 10, {1, 64}, {scheme(SchemeKind::analog_da)}, {5.0}, 4000);
    const double ci1 = run_sweep(sc).series[0].reports[0].confidence_halfwidth;
    sc.trials = 8000;
    const double ci2 = run_sweep(sc).series[0].reports[0].confidence_halfwidth;
    sc.trials = 16000;
    const double ci4 = run_sweep(sc).series[0].reports[0].confidence_halfwidth;
    EXPECT_NEAR(ci2 / ci1, 1.0 / std::sqrt(2.0), 0.1 / std::sqrt(2.0));
    EXPECT_NEAR(ci4 / ci1, 0.5, 0.05);
}

TEST(Sweep, SeedRecordedAndOneReportPerPoint) {
    auto sc = sweep(FunctionKind::sum, 3, {0, 1}, {scheme(SchemeKind::analog_da)}, {0, 10, 20}, 50);
    const auto r = run_sweep(sc);
    EXPECT_EQ(r.seed, 42u);
    EXPECT_EQ(r.trials, 50);
    ASSERT_EQ(r.series.size(), 1u);
    EXPECT_EQ(r.series[0].reports.size(), 3u);
    EXPECT_EQ(r.series[0].axis, sc.snr_db);
    EXPECT_GE(r.wall_time_s, 0.0);
}

TEST(Sweep, NmseFallsWithSnrForEveryScheme) {
    auto sc = sweep(FunctionKind::sum, 10, {1, 64},
                    {scheme(SchemeKind::analog_da), scheme(SchemeKind::digital_bitwise), scheme(SchemeKind::sumcomp),
                     scheme(SchemeKind::channelcomp), scheme(SchemeKind::tbma_fsk), scheme(SchemeKind::goldenbaum)},
                    {-10, 0, 10, 20, 30}, 2000);
    sc.input = {InputKind::levels, {1, 64}, 64};
    const auto r = run_sweep(sc);
    for (const auto& s : r.series)
        for (std::size_t i = 1; i < s.reports.size(); ++i)
            EXPECT_LE(s.reports[i].nmse, s.reports[i - 1].nmse + 3.0 * s.reports[i - 1].confidence_halfwidth) << s.series << " at " << s.axis[i];
}

TEST(Sweep, HighSnrReachesNoiseFreeFloor) {
    auto sc = sweep(FunctionKind::arithmetic_mean, 4, {0, 7},
                    {scheme(SchemeKind::analog_da), scheme(SchemeKind::digital_bitwise, 8), scheme(SchemeKind::tbma_fsk, 8),
                     scheme(SchemeKind::sumcomp, 8)},
                    {60.0, kInf}, 2000);
    const auto r = run_sweep(sc);
    for (const auto& s : r.series) {
        const double at60 = s.reports[0].nmse, floor = s.reports[1].nmse;
        EXPECT_NEAR(at60, floor, 1e-4 + 0.05 * floor) << s.series;
    }
    // analog has no floor; the quantized schemes sit on the step^2/12 floor
    EXPECT_LT(r.series[0].reports[1].nmse, 1e-20);
    EXPECT_GT(r.series[1].reports[1].nmse, 1e-4);
}

TEST(Sweep, PairedComparisonUsesSameDraws) {
    auto sc = sweep(FunctionKind::sum, 6, {0, 1}, {scheme(SchemeKind::analog_da), scheme(SchemeKind::analog_da)}, {0.0}, 300);
    sc.schemes[1].label = "twin";
    sc.channel = ChannelKind::rayleigh;
    const auto r = run_sweep(sc);
    EXPECT_EQ(r.series[0].series, "analog_da");
    EXPECT_EQ(r.series[1].series, "twin");
    EXPECT_EQ(r.series[0].reports[0].mse, r.series[1].reports[0].mse);
    // the channel substream of node k does not depend on K
    const CVec a = draw_trial_gains(3, 7, 11), b = draw_trial_gains(8, 7, 11);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(a[k], b[k]);
}

TEST(Sweep, IncompatibleSchemeIsRejected) {
    auto sc = sweep(FunctionKind::maximum, 4, {0, 7}, {scheme(SchemeKind::tbma_fsk, 8)}, {10.0}, 10);
    sc.schemes[0].tbma_threshold = 0.0;
    EXPECT_THROW(run_sweep(sc), ConstraintViolation);
    auto d = sweep(FunctionKind::sum, 3, {0, 7}, {scheme(SchemeKind::dct_hybrid, 8)}, {10.0}, 10);
    EXPECT_THROW(run_sweep(d), ConstraintViolation);
}

TEST(Sweep, Validation) {
    auto sc = sweep(FunctionKind::sum, 3, {0, 1}, {scheme(SchemeKind::analog_da)}, {10.0}, 0);
    EXPECT_THROW(run_sweep(sc), InvalidInput);
    sc.trials = 1;
    sc.snr_db.clear();
    EXPECT_THROW(run_sweep(sc), InvalidInput);
    auto c = csi({200.0}, {4}, {10.0}, 10);
    EXPECT_THROW(run_sweep(c), InvalidInput);
}

TEST(Csi, ZeroDeviationMatchesCoherentBaseline) {
    auto c = csi({0.0}, {6}, {5.0, 20.0}, 3000);
    const auto r = run_sweep(c);
    auto base = sweep(FunctionKind::sum, 6, c.function.input_range, {scheme(SchemeKind::analog_da)}, c.snr_db, c.trials);
    base.channel = ChannelKind::rayleigh;
    base.seed = c.seed;
    const auto b = run_sweep(base);
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& x = r.series[i].reports[0];
        const auto& y = b.series[0].reports[i];
        EXPECT_NEAR(x.mse, y.mse, 3.0 * (x.confidence_halfwidth + y.confidence_halfwidth)) << c.snr_db[i];
    }
}

TEST(Csi, MseGrowsWithDeviation) {
    const auto r = run_sweep(csi({0, 10, 20, 30, 45, 60}, {10}, {30.0}, 4000));
    ASSERT_EQ(r.series.size(), 1u);
    EXPECT_EQ(r.series[0].series, "SNR=30dB");
    const auto& rep = r.series[0].reports;
    for (std::size_t i = 1; i < rep.size(); ++i) EXPECT_GE(rep[i].mse + 3.0 * rep[i].confidence_halfwidth, rep[i - 1].mse);
    EXPECT_GT(rep.back().mse, rep.front().mse);
}

TEST(Csi, MseGrowsWithUsers) {
    auto c = csi({30.0}, {2, 4, 8, 16, 32}, {10.0}, 3000);
    c.csi_axis = CsiAxis::users;
    const auto r = run_sweep(c);
    ASSERT_EQ(r.series.size(), 1u);
    EXPECT_EQ(r.series[0].series, "SNR=10dB,dev=30");
    EXPECT_EQ(r.series[0].axis_name, "K");
    const auto& rep = r.series[0].reports;
    for (std::size_t i = 1; i < rep.size(); ++i) EXPECT_GE(rep[i].mse + 3.0 * rep[i].confidence_halfwidth, rep[i - 1].mse);
}

TEST(ParallelFor, CoversEveryIndexAndRethrows) {
    std::vector<int> hits(1000, 0);
    parallel_for(1000, 4, [&](long i) { hits[static_cast<std::size_t>(i)]++; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(1000, 4, [](long i) {
                     if (i == 517) throw NumericalFailure("boom");
                 }),
                 NumericalFailure);
}

TEST(ScenarioJson, RoundTripAndBundles) {
    auto sc = sweep(FunctionKind::geometric_mean, 10, {1, 64}, {scheme(SchemeKind::tbma_fsk), scheme(SchemeKind::log_fsk, 8)}, {0, 10}, 77);
    sc.function.param = 50.0;
    sc.input = {InputKind::levels, {1, 64}, 64};
    const json j = to_json(sc);
    const Scenario back = scenario_from_json(j);
    EXPECT_EQ(to_json(back), j);
    EXPECT_EQ(fingerprint(to_json(back)), fingerprint(j));
    const json bundle{{"name", "b"}, {"scenarios", json::array({j, j})}};
    EXPECT_EQ(scenarios_from_json(bundle).size(), 2u);
    EXPECT_EQ(scenarios_from_json(j).size(), 1u);
    EXPECT_THROW(scenario_from_json(json::parse(R"({"function":{"kind":"sum","K":2},"channel":"rician"})")), InvalidInput);
    EXPECT_THROW(scenario_from_json(json::parse(R"({"function":{"kind":"nope"}})")), InvalidInput);
}

TEST(ResultsCsv, HeaderAndRows) {
    auto sc = sweep(FunctionKind::sum, 3, {0, 1}, {scheme(SchemeKind::analog_da)}, {0, 10}, 20);
    const auto r = run_sweep(sc);
    std::ostringstream os;
    write_results_csv(os, r);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "series,axis,mse,nmse,outage,cer,ci");
    int rows = 0;
    while (std::getline(in, line)) rows += !line.empty();
    EXPECT_EQ(rows, 2);
}

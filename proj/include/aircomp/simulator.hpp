#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "aircomp/channel.hpp"
#include "aircomp/function.hpp"
#include "aircomp/metrics.hpp"
#include "aircomp/power_control.hpp"
#include "aircomp/rng.hpp"
#include "aircomp/scheme.hpp"

namespace aircomp {

enum class ChannelKind { awgn, rayleigh };
enum class ExperimentKind { scheme_sweep, csi };
enum class CsiAxis { phase, users };

struct Scenario {
    std::string name = "scenario";
    ExperimentKind experiment = ExperimentKind::scheme_sweep;
    FunctionSpec function;
    std::vector<SchemeConfig> schemes;
    InputDistribution input;
    ChannelKind channel = ChannelKind::awgn;
    SnrReference snr_reference = SnrReference::per_user;
    std::vector<double> snr_db{10.0};
    // csi experiment only
    std::vector<double> phase_deviation_deg{0.0};
    std::vector<int> k_values;
    CsiAxis csi_axis = CsiAxis::phase;
    long trials = 1000;
    std::uint64_t seed = 1;
    double outage_epsilon = 0.0; // 0 = 1 % of the output range

    std::vector<int> users() const { return k_values.empty() ? std::vector<int>{function.K} : k_values; }

    double epsilon() const {
        if (outage_epsilon > 0.0) return outage_epsilon;
        const Interval r = function.output_range();
        const double w = r.width();
        return std::isfinite(w) && w > 0.0 ? 0.01 * w : 1e-3;
    }

    void validate() const {
        require(trials >= 1, "trials must be >= 1");
        require(!snr_db.empty(), "snr sweep must be nonempty");
        function.validate();
        require(input.range.lo <= input.range.hi, "input range lo > hi");
        if (experiment == ExperimentKind::scheme_sweep) {
            require(!schemes.empty(), "scheme list must be nonempty");
            for (const auto& s : schemes) s.validate();
        } else {
            require(!phase_deviation_deg.empty(), "phase deviation sweep must be nonempty");
            for (double d : phase_deviation_deg) require(d >= 0.0 && d <= 180.0, "phase deviation must lie in [0, 180] degrees");
            for (int k : users()) require(k >= 1, "K values must be >= 1");
        }
    }
};

struct SeriesResult {
    std::string series;
    std::string axis_name;
    std::vector<double> axis;
    std::vector<MetricsReport> reports;
};

struct SweepResult {
    std::vector<SeriesResult> series;
    std::uint64_t seed = 0;
    long trials = 0;
    std::string scenario_hash;
    double wall_time_s = 0.0;
};

// Runs fn(i) for i in [0, n) on `workers` threads.  Callers write into
// index-addressed slots, so the result never depends on the schedule.
inline void parallel_for(long n, int workers, const std::function<void(long)>& fn) {
    if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (workers == 1 || n <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    constexpr long block = 64;
    std::atomic<long> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto body = [&] {
        for (;;) {
            const long start = next.fetch_add(block);
            if (start >= n) return;
            try {
                for (long i = start; i < std::min(n, start + block); ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int used = static_cast<int>(std::min<long>(workers, (n + block - 1) / block));
    for (int w = 0; w < used; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

inline std::vector<double> draw_readings(const InputDistribution& in, int K, std::uint64_t seed, std::uint64_t trial) {
    std::vector<double> s(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        Stream r(seed, trial, static_cast<std::uint32_t>(k), Purpose::reading);
        s[static_cast<std::size_t>(k)] = in.draw(r);
    }
    return s;
}

// Node-keyed CN(0,1) gains, so node k sees the same channel whatever K is.
inline CVec draw_trial_gains(int K, std::uint64_t seed, std::uint64_t trial) {
    CVec h(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        Stream r(seed, trial, static_cast<std::uint32_t>(k), Purpose::channel);
        h[static_cast<std::size_t>(k)] = r.complex_normal(1.0);
    }
    return h;
}

// Coherent precoding under the optimal power policy on true magnitudes.
inline TrialChannel precoded_channel(const CVec& h, double noise_variance) {
    std::vector<double> mag, budget(h.size(), 1.0);
    for (cplx g : h) mag.push_back(std::abs(g));
    const PowerPolicy pol = solve_optimal_policy(mag, budget, noise_variance);
    TrialChannel ch;
    ch.eta = pol.eta;
    ch.noise_variance = noise_variance;
    for (std::size_t k = 0; k < h.size(); ++k) ch.gains.push_back(std::sqrt(pol.powers[k]) * mag[k]);
    return ch;
}

inline SeriesResult run_scheme_series(const Scenario& sc, const SchemeConfig& cfg, int workers) {
    const int K = sc.function.K;
    const SchemeRunner runner(cfg, sc.function, sc.input, sc.seed);
    SeriesResult out{cfg.name(), "snr_db", sc.snr_db, {}};
    const long N = sc.trials;
    std::vector<double> truth(static_cast<std::size_t>(N));
    for (long t = 0; t < N; ++t) {
        const auto s = draw_readings(sc.input, K, sc.seed, static_cast<std::uint64_t>(t));
        truth[static_cast<std::size_t>(t)] = evaluate_function(sc.function, std::span<const double>(s));
    }
    for (double snr : sc.snr_db) {
        const double nv = snr_to_noise_variance({snr, sc.snr_reference}, 1.0, K);
        std::vector<cplx> est(static_cast<std::size_t>(N));
        parallel_for(N, workers, [&](long t) {
            const auto tu = static_cast<std::uint64_t>(t);
            const auto s = draw_readings(sc.input, K, sc.seed, tu);
            TrialChannel ch;
            if (sc.channel == ChannelKind::awgn) {
                ch.gains.assign(static_cast<std::size_t>(K), cplx{1.0, 0.0});
                ch.noise_variance = nv;
            } else {
                ch = precoded_channel(draw_trial_gains(K, sc.seed, tu), nv);
            }
            Stream noise(sc.seed, tu, 0, Purpose::noise);
            est[static_cast<std::size_t>(t)] = runner.run(s, ch, noise, sc.seed, tu);
        });
        for (const auto& e : est)
            if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) throw NumericalFailure("non-finite estimate in " + cfg.name());
        out.reports.push_back(compute_metrics(truth, est, sc.epsilon(), runner.discrete()));
    }
    return out;
}

// Paired comparison: every scheme sees the same readings, channels and noise
// substreams at a given trial index.
inline SweepResult run_scheme_comparison(const Scenario& sc, int workers = 1) {
    sc.validate();
    require(sc.experiment == ExperimentKind::scheme_sweep, "not a scheme sweep scenario");
    SweepResult res;
    res.seed = sc.seed;
    res.trials = sc.trials;
    for (const auto& cfg : sc.schemes) res.series.push_back(run_scheme_series(sc, cfg, workers));
    return res;
}

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// Coherent sum with optimal-policy precoders built on true channels, then
// per-node phase errors uniform in [-dev, dev] applied before superposition.
inline SweepResult run_csi_error_experiment(const Scenario& sc, int workers = 1) {
    sc.validate();
    require(sc.experiment == ExperimentKind::csi, "not a CSI scenario");
    SweepResult res;
    res.seed = sc.seed;
    res.trials = sc.trials;
    const long N = sc.trials;

    // results[K index][snr index][dev index]
    const auto Ks = sc.users();
    std::vector<std::vector<std::vector<MetricsReport>>> grid(Ks.size());
    for (std::size_t ki = 0; ki < Ks.size(); ++ki) {
        const int K = Ks[ki];
        FunctionSpec sum = sc.function;
        sum.kind = FunctionKind::sum;
        sum.K = K;
        std::vector<double> truth(static_cast<std::size_t>(N));
        for (long t = 0; t < N; ++t) {
            const auto s = draw_readings(sc.input, K, sc.seed, static_cast<std::uint64_t>(t));
            truth[static_cast<std::size_t>(t)] = evaluate_function(sum, std::span<const double>(s));
        }
        for (double snr : sc.snr_db) {
            const double nv = snr_to_noise_variance({snr, sc.snr_reference}, 1.0, K);
            std::vector<std::vector<cplx>> est(sc.phase_deviation_deg.size(), std::vector<cplx>(static_cast<std::size_t>(N)));
            parallel_for(N, workers, [&](long t) {
                const auto tu = static_cast<std::uint64_t>(t);
                const auto s = draw_readings(sc.input, K, sc.seed, tu);
                const CVec h = sc.channel == ChannelKind::rayleigh ? draw_trial_gains(K, sc.seed, tu)
                                                                   : CVec(static_cast<std::size_t>(K), cplx{1.0, 0.0});
                std::vector<double> mag, budget(static_cast<std::size_t>(K), 1.0);
                for (cplx g : h) mag.push_back(std::abs(g));
                const PowerPolicy pol = solve_optimal_policy(mag, budget, nv);
                // one uniform per node, scaled by each deviation (common random numbers)
                std::vector<double> u(static_cast<std::size_t>(K));
                for (int k = 0; k < K; ++k) {
                    Stream r(sc.seed, tu, static_cast<std::uint32_t>(k), Purpose::phase_error);
                    u[static_cast<std::size_t>(k)] = r.uniform(-1.0, 1.0);
                }
                for (std::size_t di = 0; di < sc.phase_deviation_deg.size(); ++di) {
                    const double dev = sc.phase_deviation_deg[di] * std::numbers::pi / 180.0;
                    std::vector<double> err(u.size());
                    for (std::size_t k = 0; k < u.size(); ++k) err[k] = dev * u[k];
                    Stream noise(sc.seed, tu, 0, Purpose::noise);
                    est[di][static_cast<std::size_t>(t)] = apply_policy(s, pol, h, nv, noise, err, Aggregate::sum);
                }
            });
            std::vector<MetricsReport> row;
            for (const auto& e : est) row.push_back(compute_metrics(truth, e, sc.epsilon(), false));
            grid[ki].push_back(std::move(row));
        }
    }

    if (sc.csi_axis == CsiAxis::phase) {
        for (std::size_t ki = 0; ki < Ks.size(); ++ki)
            for (std::size_t si = 0; si < sc.snr_db.size(); ++si) {
                SeriesResult s;
                s.series = "SNR=" + format_number(sc.snr_db[si]) + "dB" + (Ks.size() > 1 ? ",K=" + std::to_string(Ks[ki]) : "");
                s.axis_name = "phase_deviation_deg";
                s.axis = sc.phase_deviation_deg;
                s.reports = grid[ki][si];
                res.series.push_back(std::move(s));
            }
    } else {
        for (std::size_t si = 0; si < sc.snr_db.size(); ++si)
            for (std::size_t di = 0; di < sc.phase_deviation_deg.size(); ++di) {
                SeriesResult s;
                s.series = "SNR=" + format_number(sc.snr_db[si]) + "dB,dev=" + format_number(sc.phase_deviation_deg[di]);
                s.axis_name = "K";
                for (std::size_t ki = 0; ki < Ks.size(); ++ki) {
                    s.axis.push_back(Ks[ki]);
                    s.reports.push_back(grid[ki][si][di]);
                }
                res.series.push_back(std::move(s));
            }
    }
    return res;
}

inline SweepResult run_sweep(const Scenario& sc, int workers = 1) {
    const auto t0 = std::chrono::steady_clock::now();
    SweepResult r = sc.experiment == ExperimentKind::csi ? run_csi_error_experiment(sc, workers)
                                                         : run_scheme_comparison(sc, workers);
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

} // namespace aircomp

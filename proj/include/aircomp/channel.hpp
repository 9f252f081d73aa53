#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "aircomp/error.hpp"
#include "aircomp/rng.hpp"

namespace aircomp {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

struct Tap {
    cplx gain{1.0, 0.0};
    double delay = 0.0; // seconds
};

struct ChannelRealization {
    CVec flat_gains;
    std::vector<std::vector<Tap>> taps; // empty, or one list per node
    double noise_variance = 0.0;

    int num_nodes() const { return static_cast<int>(flat_gains.size()); }
    bool has_taps() const { return !taps.empty(); }

    const std::vector<Tap> node_taps(std::size_t k) const {
        if (has_taps()) return taps[k];
        return {Tap{flat_gains[k], 0.0}};
    }

    void validate() const {
        require(!flat_gains.empty(), "channel without nodes");
        require(noise_variance >= 0.0, "negative noise variance");
        if (!has_taps()) return;
        require(taps.size() == flat_gains.size(), "taps/flat_gains node count mismatch");
        for (std::size_t k = 0; k < taps.size(); ++k) {
            const auto& t = taps[k];
            require(!t.empty(), "node without taps");
            for (std::size_t w = 0; w < t.size(); ++w) {
                require(t[w].delay >= 0.0, "negative tap delay");
                if (w > 0) require(t[w].delay > t[w - 1].delay, "tap delays must be strictly increasing");
            }
            if (t.size() == 1 && t[0].delay == 0.0)
                require(std::abs(t[0].gain - flat_gains[k]) <= 1e-12 * (1.0 + std::abs(t[0].gain)),
                        "single-tap gain disagrees with flat gain");
        }
    }
};

inline double wrap_phase(double x) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double y = std::fmod(x, two_pi);
    if (y <= -std::numbers::pi) y += two_pi;
    if (y > std::numbers::pi) y -= two_pi;
    return y;
}

struct ImpairmentProfile {
    std::vector<double> cfo; // Hz
    std::vector<double> to;  // transmitter timing offsets, s
    std::vector<double> po;  // rad, wrapped to (-pi, pi]
    double rx_to = 0.0;
    double backoff = 0.0;

    static ImpairmentProfile zero(int K) {
        ImpairmentProfile p;
        p.cfo.assign(static_cast<std::size_t>(K), 0.0);
        p.to.assign(static_cast<std::size_t>(K), 0.0);
        p.po.assign(static_cast<std::size_t>(K), 0.0);
        return p;
    }

    void normalize() {
        for (double& x : po) x = wrap_phase(x);
    }

    void validate(int K) const {
        const auto k = static_cast<std::size_t>(K);
        require(cfo.size() == k && to.size() == k && po.size() == k, "impairment profile size != K");
    }
};

enum class SnrReference { per_user, total };

struct SnrSpec {
    double snr_db = 0.0;
    SnrReference reference = SnrReference::per_user;
};

inline double snr_to_noise_variance(const SnrSpec& spec, double per_user_signal_power, int K) {
    require(per_user_signal_power > 0.0, "signal power must be positive");
    require(K >= 1, "K must be >= 1");
    require(!std::isnan(spec.snr_db) && spec.snr_db != -INFINITY, "snr must be a number or +inf");
    if (spec.snr_db == INFINITY) return 0.0;
    const double lin = std::pow(10.0, spec.snr_db / 10.0);
    const double p = spec.reference == SnrReference::per_user ? per_user_signal_power : per_user_signal_power * K;
    return p / lin;
}

// i.i.d. CN(0, 1) flat gains.
inline ChannelRealization draw_rayleigh(int K, Stream& rng, double noise_variance = 0.0) {
    require(K >= 1, "K must be >= 1");
    ChannelRealization ch;
    ch.flat_gains.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) ch.flat_gains.push_back(rng.complex_normal(1.0));
    ch.noise_variance = noise_variance;
    return ch;
}

inline ChannelRealization unit_channel(int K, double noise_variance = 0.0) {
    require(K >= 1, "K must be >= 1");
    ChannelRealization ch;
    ch.flat_gains.assign(static_cast<std::size_t>(K), cplx{1.0, 0.0});
    ch.noise_variance = noise_variance;
    return ch;
}

// sum_k h_k x_k + w, elementwise over the L resources.
inline CVec apply_flat_channel(const std::vector<CVec>& x, const ChannelRealization& ch, Stream& noise) {
    require(!x.empty(), "no transmitters");
    require(x.size() == ch.flat_gains.size(), "symbol/channel node count mismatch");
    const std::size_t L = x[0].size();
    for (const auto& v : x) require(v.size() == L, "per-node resource count mismatch");
    CVec y(L, cplx{});
    for (std::size_t k = 0; k < x.size(); ++k)
        for (std::size_t l = 0; l < L; ++l) y[l] += ch.flat_gains[k] * x[k][l];
    if (ch.noise_variance > 0.0)
        for (auto& v : y) v += noise.complex_normal(ch.noise_variance);
    return y;
}

// Sampled superposition with per-node PO, CFO, timing offset and multipath.
// Sample n sits at t = n / fs.  Delays are rounded to the sample grid.
inline CVec apply_impairments(const std::vector<CVec>& x, const ImpairmentProfile& prof,
                              const ChannelRealization& ch, double sample_rate, Stream* noise = nullptr) {
    require(!x.empty(), "no transmitters");
    require(sample_rate > 0.0, "sample rate must be positive");
    const int K = static_cast<int>(x.size());
    require(ch.num_nodes() == K, "channel node count mismatch");
    prof.validate(K);
    const std::size_t N = x[0].size();
    for (const auto& v : x) require(v.size() == N, "waveform length mismatch");
    double max_cfo = 0.0;
    for (double f : prof.cfo) max_cfo = std::max(max_cfo, std::abs(f));
    if (max_cfo > 0.0 && sample_rate < 10.0 * max_cfo)
        throw ConstraintViolation("sample rate does not resolve the CFO beat (need >= 10x)");

    CVec y(N, cplx{});
    for (int k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const cplx rot = std::polar(1.0, prof.po[ku]);
        for (const Tap& tap : ch.node_taps(ku)) {
            const double shift = tap.delay + prof.to[ku];
            const long d = std::lround(shift * sample_rate);
            if (d < 0 || static_cast<std::size_t>(d) >= N) throw ConstraintViolation("delay exceeds waveform length");
            for (std::size_t n = static_cast<std::size_t>(d); n < N; ++n) {
                const double t = static_cast<double>(n) / sample_rate;
                const cplx beat = std::polar(1.0, 2.0 * std::numbers::pi * prof.cfo[ku] * (t - tap.delay));
                y[n] += tap.gain * rot * x[ku][n - static_cast<std::size_t>(d)] * beat;
            }
        }
    }
    if (noise != nullptr && ch.noise_variance > 0.0)
        for (auto& v : y) v += noise->complex_normal(ch.noise_variance);
    return y;
}

} // namespace aircomp

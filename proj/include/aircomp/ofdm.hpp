#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "aircomp/channel.hpp"
#include "aircomp/error.hpp"

namespace aircomp {

struct OfdmConfig {
    int num_subcarriers = 16; // Q
    double symbol_duration = 1.0;
    double cp_duration = 0.25;
    double backoff = 0.0;
    int oversampling = 4;

    int samples_per_symbol() const { return num_subcarriers * oversampling; }
    double sample_rate() const { return samples_per_symbol() / symbol_duration; }

    void validate() const {
        require(num_subcarriers >= 1, "need at least one subcarrier");
        require(symbol_duration > 0.0 && cp_duration >= 0.0, "bad OFDM durations");
        require(oversampling >= 1, "oversampling must be a positive integer");
        require(backoff >= 0.0 && backoff <= cp_duration, "back-off must lie in [0, T_cp]");
    }
};

// Conditions for the closed form: static PO, static TO, zero CFO.
struct SyncConditions {
    bool static_phase = true;
    bool static_timing = true;
    bool zero_cfo = true;
};

struct SampledWaveform {
    double t0 = 0.0;          // time of samples[0]
    double sample_rate = 1.0;
    CVec samples;

    double time(std::size_t n) const { return t0 + static_cast<double>(n) / sample_rate; }
};

// Continuous-time OFDM symbol with CP, supported on [-T_cp + dt, T_sym + dt).
inline cplx ofdm_waveform_at(const CVec& a, const OfdmConfig& cfg, double dt, double t) {
    const double eps = 1e-12 * cfg.symbol_duration;
    if (t < -cfg.cp_duration + dt - eps || t >= cfg.symbol_duration + dt - eps) return {};
    cplx x{};
    for (std::size_t q = 0; q < a.size(); ++q)
        x += a[q] * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(q) * (t - dt) / cfg.symbol_duration);
    return x;
}

inline SampledWaveform ofdm_modulate(const CVec& a, const OfdmConfig& cfg, double dt = 0.0) {
    cfg.validate();
    require(static_cast<int>(a.size()) == cfg.num_subcarriers, "need one symbol per subcarrier");
    const double fs = cfg.sample_rate();
    const long n_cp = std::lround(cfg.cp_duration * fs);
    const long n = n_cp + cfg.samples_per_symbol();
    SampledWaveform w;
    w.sample_rate = fs;
    w.t0 = dt - static_cast<double>(n_cp) / fs;
    w.samples.resize(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const double t = w.time(static_cast<std::size_t>(i));
        // CP samples are copies of the tail; evaluate the periodic core directly.
        cplx x{};
        for (std::size_t q = 0; q < a.size(); ++q)
            x += a[q] * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(q) * (t - dt) / cfg.symbol_duration);
        w.samples[static_cast<std::size_t>(i)] = x;
    }
    return w;
}

// Exact superposed received waveform sampled at t0 + n / fs: each node's OFDM
// symbol passes through its taps with PO and CFO, no grid rounding.
inline SampledWaveform superpose_ofdm(const std::vector<CVec>& symbols, const OfdmConfig& cfg,
                                      const ChannelRealization& ch, const ImpairmentProfile& prof, double t0,
                                      std::size_t count) {
    cfg.validate();
    const int K = static_cast<int>(symbols.size());
    require(K >= 1 && ch.num_nodes() == K, "node count mismatch");
    prof.validate(K);
    SampledWaveform r;
    r.t0 = t0;
    r.sample_rate = cfg.sample_rate();
    r.samples.assign(count, cplx{});
    for (int k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const cplx rot = std::polar(1.0, prof.po[ku]);
        for (const Tap& tap : ch.node_taps(ku))
            for (std::size_t n = 0; n < count; ++n) {
                const double t = r.time(n);
                const cplx x = ofdm_waveform_at(symbols[ku], cfg, prof.to[ku], t - tap.delay);
                if (x == cplx{}) continue;
                r.samples[n] += tap.gain * rot * x * std::polar(1.0, 2.0 * std::numbers::pi * prof.cfo[ku] * (t - tap.delay));
            }
    }
    return r;
}

// DFT over the window starting at t_bo - rx_to with length T_sym.
// Returns all N = Q * oversampling bins; the first Q are the subcarriers.
inline CVec receive_dft(const SampledWaveform& r, const OfdmConfig& cfg, double rx_to = 0.0) {
    cfg.validate();
    const int N = cfg.samples_per_symbol();
    const double start = cfg.backoff - rx_to;
    const double pos = (start - r.t0) * r.sample_rate;
    const long n0 = std::lround(pos);
    if (std::abs(pos - static_cast<double>(n0)) > 1e-6) throw InvalidInput("DFT window not aligned to the sample grid");
    if (n0 < 0 || n0 + N > static_cast<long>(r.samples.size())) throw ConstraintViolation("DFT window out of range");
    CVec Y(static_cast<std::size_t>(N), cplx{});
    for (int l = 0; l < N; ++l) {
        cplx acc{};
        for (int n = 0; n < N; ++n)
            acc += r.samples[static_cast<std::size_t>(n0 + n)] *
                   std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(l) * n / N);
        Y[static_cast<std::size_t>(l)] = acc / static_cast<double>(N);
    }
    return Y;
}

// Per (node, subcarrier): H_{k,l} e^{j PO_k} e^{j 2 pi l (t_bo - rx_to - to_k) / T_sym},
// with H_{k,l} = sum_w h_w e^{-j 2 pi l tau_w / T_sym}.
using CompositeMatrix = std::vector<CVec>; // [k][l]

inline CompositeMatrix predict_composite(const OfdmConfig& cfg, const ChannelRealization& ch,
                                         const ImpairmentProfile& prof, SyncConditions cond = {}) {
    cfg.validate();
    const int K = ch.num_nodes();
    prof.validate(K);
    if (!cond.static_phase || !cond.static_timing || !cond.zero_cfo)
        throw ConstraintViolation("closed-form composite needs Conditions 1-3");
    for (double f : prof.cfo)
        if (f != 0.0) throw ConstraintViolation("closed-form composite needs zero CFO");
    const double T = cfg.symbol_duration;
    CompositeMatrix out(static_cast<std::size_t>(K), CVec(static_cast<std::size_t>(cfg.num_subcarriers)));
    for (int k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const auto taps = ch.node_taps(ku);
        double tau_min = INFINITY, tau_max = -INFINITY;
        for (const Tap& t : taps) {
            tau_min = std::min(tau_min, t.delay);
            tau_max = std::max(tau_max, t.delay);
        }
        const double net = cfg.backoff - prof.rx_to - prof.to[ku];
        const double slack = 1e-12 * T;
        if (net > tau_min + slack || net < tau_max - cfg.cp_duration - slack)
            throw ConstraintViolation("CP margin violated for node " + std::to_string(k));
        for (int l = 0; l < cfg.num_subcarriers; ++l) {
            cplx H{};
            for (const Tap& t : taps) H += t.gain * std::polar(1.0, -2.0 * std::numbers::pi * l * t.delay / T);
            out[ku][static_cast<std::size_t>(l)] =
                H * std::polar(1.0, prof.po[ku]) * std::polar(1.0, 2.0 * std::numbers::pi * l * net / T);
        }
    }
    return out;
}

// Expected DFT output for the given symbols: sum_k C_{k,l} a_{k,l}.
inline CVec apply_composite(const CompositeMatrix& c, const std::vector<CVec>& symbols) {
    require(c.size() == symbols.size(), "node count mismatch");
    CVec y(c.empty() ? 0 : c[0].size(), cplx{});
    for (std::size_t k = 0; k < c.size(); ++k)
        for (std::size_t l = 0; l < y.size(); ++l) y[l] += c[k][l] * symbols[k][l];
    return y;
}

// The l = 0 column: the single-carrier (rectangular pulse) view.
inline CVec single_carrier_view(const CompositeMatrix& c) {
    CVec out;
    out.reserve(c.size());
    for (const auto& row : c) {
        require(!row.empty(), "composite without DC subcarrier");
        out.push_back(row[0]);
    }
    return out;
}

} // namespace aircomp

#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aircomp/analog.hpp"
#include "aircomp/bitwise.hpp"
#include "aircomp/channel.hpp"
#include "aircomp/constellation.hpp"
#include "aircomp/dct_hybrid.hpp"
#include "aircomp/function.hpp"
#include "aircomp/goldenbaum.hpp"
#include "aircomp/logfsk.hpp"
#include "aircomp/quantizer.hpp"
#include "aircomp/rng.hpp"
#include "aircomp/tbma.hpp"

namespace aircomp {

enum class SchemeKind { analog_da, digital_bitwise, tbma_fsk, log_fsk, dct_hybrid, goldenbaum, sumcomp, channelcomp };

inline std::string to_string(SchemeKind k) {
    switch (k) {
    case SchemeKind::analog_da: return "analog_da";
    case SchemeKind::digital_bitwise: return "digital_bitwise";
    case SchemeKind::tbma_fsk: return "tbma_fsk";
    case SchemeKind::log_fsk: return "log_fsk";
    case SchemeKind::dct_hybrid: return "dct_hybrid";
    case SchemeKind::goldenbaum: return "goldenbaum";
    case SchemeKind::sumcomp: return "sumcomp";
    case SchemeKind::channelcomp: return "channelcomp";
    }
    return "unknown";
}

inline SchemeKind scheme_kind_from_string(const std::string& s) {
    for (SchemeKind k : {SchemeKind::analog_da, SchemeKind::digital_bitwise, SchemeKind::tbma_fsk, SchemeKind::log_fsk,
                         SchemeKind::dct_hybrid, SchemeKind::goldenbaum, SchemeKind::sumcomp, SchemeKind::channelcomp})
        if (to_string(k) == s) return k;
    throw InvalidInput("unknown scheme: " + s);
}

inline const std::vector<std::string>& scheme_names() {
    static const std::vector<std::string> names{"analog_da", "digital_bitwise", "tbma_fsk", "log_fsk",
                                                "dct_hybrid", "goldenbaum", "sumcomp", "channelcomp"};
    return names;
}

struct SchemeConfig {
    SchemeKind kind = SchemeKind::analog_da;
    std::string label;          // series name; defaults to the kind
    int levels = 64;            // M
    int base = 2;               // bitwise p
    int digits = 0;             // bitwise D, 0 = smallest that fits M
    double alpha = 2.0;         // Log-FSK
    double duration = 1.0;      // T for Log-FSK / DCT hybrid
    int samples = 0;            // waveform samples, 0 = automatic
    int coeffs = 3;             // DCT hybrid I
    int seq_len = 256;          // Goldenbaum Q
    int lattice_base = 0;       // SumComp q, 0 = sqrt(M) when square else PAM
    std::string design = "pam"; // ChannelComp: "pam" or "optimized"
    double tbma_threshold = -1.0;
    int restarts = 32;

    std::string name() const { return label.empty() ? to_string(kind) : label; }

    int digit_count() const {
        if (digits > 0) return digits;
        int d = 1;
        while (ipow(base, d) < levels) ++d;
        return d;
    }

    int waveform_samples(int K) const {
        if (samples > 0) return samples;
        if (kind == SchemeKind::log_fsk) {
            int n = 64;
            while (n <= K * (2 * levels - 1)) n *= 2;
            return n;
        }
        int n = 64;
        while (2 * n <= coeffs * (2 * levels - 1)) n *= 2;
        return n;
    }

    int resources(int K) const {
        switch (kind) {
        case SchemeKind::analog_da:
        case SchemeKind::sumcomp:
        case SchemeKind::channelcomp: return 1;
        case SchemeKind::digital_bitwise: return digit_count();
        case SchemeKind::tbma_fsk: return levels;
        case SchemeKind::log_fsk:
        case SchemeKind::dct_hybrid: return waveform_samples(K);
        case SchemeKind::goldenbaum: return seq_len;
        }
        return 1;
    }

    void validate() const {
        require(levels >= 1, "levels must be >= 1");
        require(base >= 2, "base must be >= 2");
        require(seq_len >= 1, "seq_len must be >= 1");
        require(coeffs >= 1, "coeffs must be >= 1");
        require(design == "pam" || design == "optimized", "design must be 'pam' or 'optimized'");
        require(restarts >= 1, "restarts must be >= 1");
    }
};

enum class InputKind { continuous, levels };

// Readings are uniform over [lo, hi] (continuous) or over `count` evenly spaced levels.
struct InputDistribution {
    InputKind kind = InputKind::continuous;
    Interval range{0.0, 1.0};
    int count = 0; // number of levels, 0 = integers lo..hi

    int level_count() const {
        if (count > 0) return count;
        return static_cast<int>(std::lround(range.hi - range.lo)) + 1;
    }

    double draw(Stream& rng) const {
        if (kind == InputKind::continuous) return rng.uniform(range.lo, range.hi);
        const int n = level_count();
        if (n <= 1) return range.lo;
        return range.lo + static_cast<double>(rng.uniform_int(0, n - 1)) * range.width() / (n - 1);
    }

    // Points that carry the distribution's mass: the levels, or a fine midpoint grid.
    std::vector<double> support() const {
        std::vector<double> g;
        if (kind == InputKind::levels) {
            const int n = level_count();
            for (int i = 0; i < n; ++i) g.push_back(n <= 1 ? range.lo : range.lo + range.width() * i / (n - 1));
        } else {
            const int n = 4096;
            for (int i = 0; i < n; ++i) g.push_back(range.lo + range.width() * (i + 0.5) / n);
        }
        return g;
    }
};

// What a trial sees of the channel: effective complex gain per node (after
// precoding, including any phase error), the receiver's denoising factor and the noise.
struct TrialChannel {
    CVec gains;
    double eta = 1.0;
    double noise_variance = 0.0;
};

// y = (sum_k g_k x_k + w) / sqrt(eta), per resource.
inline CVec superpose(const std::vector<CVec>& x, const TrialChannel& ch, Stream& noise) {
    const std::size_t L = x.empty() ? 0 : x[0].size();
    CVec y(L, cplx{});
    for (std::size_t k = 0; k < x.size(); ++k)
        for (std::size_t l = 0; l < L; ++l) y[l] += ch.gains[k] * x[k][l];
    if (ch.noise_variance > 0.0)
        for (auto& v : y) v += noise.complex_normal(ch.noise_variance);
    const double r = 1.0 / std::sqrt(ch.eta);
    for (auto& v : y) v *= r;
    return y;
}

// A scheme prepared for one function, input law and K.  Every scheme is scaled
// so that the average transmit energy per node per computation is 1.
class SchemeRunner {
public:
    SchemeRunner(SchemeConfig cfg, FunctionSpec spec, InputDistribution input, std::uint64_t design_seed = 1)
        : cfg_(std::move(cfg)), spec_(std::move(spec)), input_(input) {
        cfg_.validate();
        spec_.validate();
        K_ = spec_.K;
        prepare(design_seed);
    }

    const SchemeConfig& config() const { return cfg_; }
    bool discrete() const { return discrete_; }
    // Error an ideal channel still leaves: quantization, decomposition epsilon.
    const std::optional<NomographicDecomposition>& decomposition() const { return dec_; }
    const Quantizer& quantizer() const { return quant_; }
    double gain() const { return gamma_; }
    const std::optional<DesignResult>& design() const { return design_; }

    // One computation.  key_seed/trial identify the per-node scheme substreams.
    cplx run(std::span<const double> s, const TrialChannel& ch, Stream& noise, std::uint64_t key_seed,
             std::uint64_t trial) const {
        require(static_cast<int>(s.size()) == K_, "reading count != K");
        switch (cfg_.kind) {
        case SchemeKind::analog_da: {
            // Nodes send gamma*(pre - mu).  The offset is linear, so it is removed
            // through the gains instead of subtracting mu per node, which would
            // swamp tiny pre values (max via large p).
            std::vector<CVec> x;
            for (double v : s) x.push_back(CVec{gamma_ * dec_->pre(v)});
            const cplx y = superpose(x, ch, noise)[0];
            cplx gsum{};
            for (const cplx& g : ch.gains) gsum += g;
            const double offset = mu_ * (K_ - gsum.real() / std::sqrt(ch.eta));
            return dec_->post(y.real() / gamma_ + offset);
        }
        case SchemeKind::digital_bitwise: {
            std::vector<CVec> x;
            for (double v : s) {
                CVec sym = bitwise_symbols(quant_.index(dec_->pre(v)), cfg_.base, cfg_.digit_count());
                for (auto& a : sym) a *= gamma_;
                x.push_back(std::move(sym));
            }
            CVec y = superpose(x, ch, noise);
            for (auto& v : y) v /= gamma_;
            const double idx_sum = bitwise_demodulate(std::span<const cplx>(y), K_, cfg_.base);
            return dec_->post(K_ * quant_.range().lo + quant_.step() * idx_sum);
        }
        case SchemeKind::tbma_fsk: {
            const CVec y = superpose(tbma_modulate(s, quant_), ch, noise);
            const auto type = real_part(y);
            try {
                return tbma_demodulate(type, spec_, K_, quant_, {cfg_.tbma_threshold});
            } catch (const NoDetection&) {
                const auto it = std::max_element(type.begin(), type.end());
                return quant_.value(static_cast<int>(it - type.begin()));
            }
        }
        case SchemeKind::sumcomp:
        case SchemeKind::channelcomp: {
            if (design_) {
                // optimized ChannelComp: direct constellation on the input levels
                std::vector<CVec> x;
                for (std::size_t k = 0; k < s.size(); ++k)
                    x.push_back(CVec{design_->constellation.points[k][static_cast<std::size_t>(quant_.index(s[k]))]});
                return demapper_.demap(superpose(x, ch, noise)[0]);
            }
            const SumCompMap& map = *lattice_;
            std::vector<CVec> x;
            for (double v : s) x.push_back(CVec{gamma_ * (map.map(quant_.index(dec_->pre(v))) - map.center())});
            const cplx y = superpose(x, ch, noise)[0] / gamma_ + static_cast<double>(K_) * map.center();
            const double idx_sum = static_cast<double>(map.decode(y, K_));
            return dec_->post(K_ * quant_.range().lo + quant_.step() * idx_sum);
        }
        case SchemeKind::log_fsk: {
            std::vector<CVec> x;
            for (double v : s) {
                const auto w = logfsk_modulate(quant_.index(dec_->pre(v)), logfsk_);
                x.emplace_back(w.begin(), w.end());
            }
            const auto r = real_part(superpose(x, ch, noise));
            const auto det = logfsk_demodulate(r, K_, quant_.levels(), logfsk_);
            return dec_->post(K_ * quant_.range().lo + quant_.step() * static_cast<double>(det.level_sum));
        }
        case SchemeKind::dct_hybrid: {
            const auto w = dct_hybrid_modulate(quant_.index(s[0]), dct_);
            const auto r = real_part(superpose({CVec(w.begin(), w.end())}, ch, noise));
            return dct_hybrid_demodulate(r, dct_).value;
        }
        case SchemeKind::goldenbaum: {
            std::vector<CVec> x;
            for (std::size_t k = 0; k < s.size(); ++k) {
                Stream phases(key_seed, trial, static_cast<std::uint32_t>(k), Purpose::scheme);
                x.push_back(goldenbaum_modulate(std::max(energy_.g(dec_->pre(s[k])), 0.0), cfg_.seq_len, phases));
            }
            const CVec r = superpose(x, ch, noise);
            return dec_->post(goldenbaum_demodulate(r, K_, ch.noise_variance / ch.eta, energy_));
        }
        }
        throw InvalidInput("unsupported scheme");
    }

private:
    void need_decomposition() {
        if (spec_.kind == FunctionKind::custom) throw ConstraintViolation(cfg_.name() + " needs a nomographic decomposition");
        dec_ = decompose(spec_);
    }

    // Range of phi over the input support and a quantizer on it.
    void quantize_preprocessed() {
        double lo = INFINITY, hi = -INFINITY;
        for (double v : input_.support()) {
            const double p = dec_->pre(v);
            lo = std::min(lo, p);
            hi = std::max(hi, p);
        }
        if (input_.kind == InputKind::continuous) {
            lo = std::min(lo, dec_->pre(input_.range.lo));
            hi = std::max(hi, dec_->pre(input_.range.hi));
        }
        if (!std::isfinite(lo) || !std::isfinite(hi)) throw NumericalFailure("preprocessed range not finite");
        quant_ = Quantizer(cfg_.levels, {lo, hi});
    }

    void prepare(std::uint64_t design_seed) {
        const auto support = input_.support();
        const bool level_inputs = input_.kind == InputKind::levels;
        switch (cfg_.kind) {
        case SchemeKind::analog_da: {
            need_decomposition();
            double m = 0.0, e = 0.0;
            for (double v : support) m += dec_->pre(v);
            mu_ = m / support.size();
            for (double v : support) e += std::pow(dec_->pre(v) - mu_, 2);
            e /= support.size();
            gamma_ = e > 0.0 ? 1.0 / std::sqrt(e) : 1.0;
            break;
        }
        case SchemeKind::digital_bitwise: {
            need_decomposition();
            quantize_preprocessed();
            if (ipow(cfg_.base, cfg_.digit_count()) < cfg_.levels) throw ConstraintViolation("digits cannot hold M levels");
            const double per_digit = (static_cast<double>(cfg_.base) * cfg_.base - 1.0) / 3.0;
            gamma_ = 1.0 / std::sqrt(per_digit * cfg_.digit_count());
            discrete_ = level_inputs;
            break;
        }
        case SchemeKind::tbma_fsk: {
            if (spec_.kind == FunctionKind::custom) throw ConstraintViolation("TBMA cannot compute custom functions");
            quant_ = Quantizer(cfg_.levels, input_.range);
            if ((spec_.kind == FunctionKind::maximum || spec_.kind == FunctionKind::minimum) && cfg_.tbma_threshold == 0.0)
                throw ConstraintViolation("TBMA max/min with zero detection threshold");
            discrete_ = level_inputs;
            break;
        }
        case SchemeKind::sumcomp:
        case SchemeKind::channelcomp: {
            discrete_ = level_inputs;
            if (cfg_.kind == SchemeKind::channelcomp && cfg_.design == "optimized") {
                quant_ = Quantizer(cfg_.levels, input_.range);
                const FunctionTable table = make_function_table(spec_, quant_, kMaxDesignTuples);
                DesignOptions opt;
                opt.restarts = cfg_.restarts;
                opt.seed = design_seed;
                design_ = optimize_channelcomp(table, std::vector<double>(static_cast<std::size_t>(K_), 1.0), opt);
                if (!design_->feasible) throw ConstraintViolation("ChannelComp design found no feasible constellation");
                demapper_ = build_demapper(design_->constellation);
                break;
            }
            need_decomposition();
            quantize_preprocessed();
            int q = cfg_.lattice_base;
            if (cfg_.kind == SchemeKind::channelcomp) q = cfg_.levels; // PAM
            else if (q == 0) {
                const int r = static_cast<int>(std::lround(std::sqrt(cfg_.levels)));
                q = r * r == cfg_.levels ? r : cfg_.levels;
            }
            lattice_ = SumCompMap(cfg_.levels, q);
            gamma_ = 1.0 / std::sqrt(lattice_->centered_energy() > 0.0 ? lattice_->centered_energy() : 1.0);
            break;
        }
        case SchemeKind::log_fsk: {
            need_decomposition();
            quantize_preprocessed();
            logfsk_.alpha = cfg_.alpha;
            logfsk_.T = cfg_.duration;
            logfsk_.samples = cfg_.waveform_samples(K_);
            logfsk_.validate();
            double e = 0.0;
            for (int v = 0; v < cfg_.levels; ++v)
                for (double a : logfsk_modulate(v, logfsk_)) e += a * a;
            e /= cfg_.levels;
            logfsk_.amplitude = e > 0.0 ? 1.0 / std::sqrt(e) : 1.0;
            discrete_ = level_inputs;
            break;
        }
        case SchemeKind::dct_hybrid: {
            if (K_ != 1) throw ConstraintViolation("DCT hybrid is a single-transmitter scheme (K = 1)");
            quant_ = Quantizer(cfg_.levels, input_.range);
            std::vector<double> f;
            for (int i = 0; i < cfg_.levels; ++i) {
                const double v = quant_.value(i);
                f.push_back(evaluate_function(spec_, std::span<const double>(&v, 1)));
            }
            const auto F = dct2(f);
            dct_.dc = F[0];
            dct_.coeffs.assign(F.begin() + 1, F.begin() + 1 + std::min<std::size_t>(static_cast<std::size_t>(cfg_.coeffs), F.size() - 1));
            if (dct_.coeffs.empty()) dct_.coeffs.push_back(0.0);
            dct_.grid = cfg_.levels;
            dct_.T = cfg_.duration;
            dct_.samples = cfg_.waveform_samples(K_);
            double e = 0.0;
            for (int s = 0; s < cfg_.levels; ++s)
                for (double a : dct_hybrid_modulate(s, dct_)) e += a * a;
            e /= cfg_.levels;
            dct_.amplitude = e > 0.0 ? 1.0 / std::sqrt(e) : 1.0;
            break;
        }
        case SchemeKind::goldenbaum: {
            need_decomposition();
            double lo = INFINITY, m = 0.0;
            for (double v : support) {
                const double p = dec_->pre(v);
                lo = std::min(lo, p);
                m += p;
            }
            m /= support.size();
            const double base = std::min(lo, 0.0);
            const double spread = m - base;
            energy_.scale = spread > 0.0 ? 1.0 / (cfg_.seq_len * spread) : 1.0 / cfg_.seq_len;
            energy_.offset = -energy_.scale * base;
            break;
        }
        }
    }

    SchemeConfig cfg_;
    FunctionSpec spec_;
    InputDistribution input_;
    int K_ = 1;
    bool discrete_ = false;
    std::optional<NomographicDecomposition> dec_;
    Quantizer quant_;
    double gamma_ = 1.0;
    double mu_ = 0.0;
    std::optional<SumCompMap> lattice_;
    std::optional<DesignResult> design_;
    SumConstellation demapper_;
    LogFskParams logfsk_;
    DctHybridParams dct_;
    EnergyMap energy_;
};

} // namespace aircomp

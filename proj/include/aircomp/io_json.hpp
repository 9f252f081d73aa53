#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "aircomp/channel.hpp"
#include "aircomp/constellation.hpp"
#include "aircomp/error.hpp"
#include "aircomp/function.hpp"
#include "aircomp/mimo.hpp"
#include "aircomp/ofdm.hpp"
#include "aircomp/power_control.hpp"
#include "aircomp/scheme.hpp"
#include "aircomp/simulator.hpp"

namespace aircomp {

using json = nlohmann::json;

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("bad field '") + key + "': " + e.what());
    }
}

inline const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw InvalidInput(std::string("missing field '") + key + "'");
    return j.at(key);
}

} // namespace detail

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx cplx_from_json(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2) throw InvalidInput("complex value must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const Interval& r) { return json::array({r.lo, r.hi}); }

inline Interval interval_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw InvalidInput("interval must be [lo, hi]");
    Interval r{j[0].get<double>(), j[1].get<double>()};
    require(r.lo <= r.hi, "interval lo > hi");
    return r;
}

// FunctionSpec <-> {kind, params, input_range, K}
inline json to_json(const FunctionSpec& f) {
    json params = json::object();
    if (f.kind == FunctionKind::p_norm) params["p"] = f.param;
    if (is_approximate(f.kind)) params["p0"] = f.param;
    return {{"kind", to_string(f.kind)}, {"params", params}, {"input_range", to_json(f.input_range)}, {"K", f.K}};
}

inline FunctionSpec function_spec_from_json(const json& j) {
    FunctionSpec f;
    f.kind = function_kind_from_string(detail::field(j, "kind").get<std::string>());
    if (f.kind == FunctionKind::custom) throw InvalidInput("custom functions cannot be loaded from JSON");
    const json params = j.contains("params") ? j.at("params") : json::object();
    if (f.kind == FunctionKind::p_norm) f.param = detail::get_or(params, "p", 1.0);
    if (is_approximate(f.kind)) f.param = detail::get_or(params, "p0", 100.0);
    if (j.contains("input_range")) f.input_range = interval_from_json(j.at("input_range"));
    f.K = detail::get_or(j, "K", 1);
    f.validate();
    return f;
}

inline json to_json(const SchemeConfig& s) {
    json j{{"scheme", to_string(s.kind)}, {"levels", s.levels}};
    if (!s.label.empty()) j["label"] = s.label;
    switch (s.kind) {
    case SchemeKind::digital_bitwise: j["base"] = s.base; j["digits"] = s.digit_count(); break;
    case SchemeKind::tbma_fsk: j["tbma_threshold"] = s.tbma_threshold; break;
    case SchemeKind::log_fsk: j["alpha"] = s.alpha; j["duration"] = s.duration; j["samples"] = s.samples; break;
    case SchemeKind::dct_hybrid: j["coeffs"] = s.coeffs; j["duration"] = s.duration; j["samples"] = s.samples; break;
    case SchemeKind::goldenbaum: j["seq_len"] = s.seq_len; break;
    case SchemeKind::sumcomp: j["lattice_base"] = s.lattice_base; break;
    case SchemeKind::channelcomp: j["design"] = s.design; j["restarts"] = s.restarts; break;
    case SchemeKind::analog_da: break;
    }
    return j;
}

inline SchemeConfig scheme_from_json(const json& j) {
    SchemeConfig s;
    s.kind = scheme_kind_from_string(detail::field(j, "scheme").get<std::string>());
    s.label = detail::get_or<std::string>(j, "label", "");
    s.levels = detail::get_or(j, "levels", s.levels);
    s.base = detail::get_or(j, "base", s.base);
    s.digits = detail::get_or(j, "digits", s.digits);
    s.alpha = detail::get_or(j, "alpha", s.alpha);
    s.duration = detail::get_or(j, "duration", s.duration);
    s.samples = detail::get_or(j, "samples", s.samples);
    s.coeffs = detail::get_or(j, "coeffs", s.coeffs);
    s.seq_len = detail::get_or(j, "seq_len", s.seq_len);
    s.lattice_base = detail::get_or(j, "lattice_base", s.lattice_base);
    s.design = detail::get_or<std::string>(j, "design", s.design);
    s.tbma_threshold = detail::get_or(j, "tbma_threshold", s.tbma_threshold);
    s.restarts = detail::get_or(j, "restarts", s.restarts);
    s.validate();
    return s;
}

inline json to_json(const InputDistribution& d) {
    json j{{"kind", d.kind == InputKind::levels ? "levels" : "uniform"}, {"range", to_json(d.range)}};
    if (d.kind == InputKind::levels) j["count"] = d.level_count();
    return j;
}

inline InputDistribution input_from_json(const json& j) {
    InputDistribution d;
    const auto kind = detail::get_or<std::string>(j, "kind", "uniform");
    if (kind == "levels") d.kind = InputKind::levels;
    else if (kind == "uniform") d.kind = InputKind::continuous;
    else throw InvalidInput("input kind must be 'uniform' or 'levels'");
    d.range = interval_from_json(detail::field(j, "range"));
    d.count = detail::get_or(j, "count", 0);
    return d;
}

inline json to_json(const ChannelRealization& c) {
    json j{{"noise_variance", c.noise_variance}, {"flat_gains", json::array()}};
    for (cplx h : c.flat_gains) j["flat_gains"].push_back(to_json(h));
    if (c.has_taps()) {
        j["taps"] = json::array();
        for (const auto& node : c.taps) {
            json n = json::array();
            for (const Tap& t : node) n.push_back({{"gain", to_json(t.gain)}, {"delay", t.delay}});
            j["taps"].push_back(n);
        }
    }
    return j;
}

inline ChannelRealization channel_from_json(const json& j) {
    ChannelRealization c;
    for (const auto& h : detail::field(j, "flat_gains")) c.flat_gains.push_back(cplx_from_json(h));
    c.noise_variance = detail::get_or(j, "noise_variance", 0.0);
    if (j.contains("taps"))
        for (const auto& node : j.at("taps")) {
            std::vector<Tap> taps;
            for (const auto& t : node) taps.push_back({cplx_from_json(detail::field(t, "gain")), detail::get_or(t, "delay", 0.0)});
            c.taps.push_back(std::move(taps));
        }
    c.validate();
    return c;
}

inline json to_json(const ImpairmentProfile& p) {
    return {{"cfo", p.cfo}, {"to", p.to}, {"po", p.po}, {"rx_to", p.rx_to}, {"backoff", p.backoff}};
}

inline ImpairmentProfile impairment_from_json(const json& j, int K) {
    ImpairmentProfile p = ImpairmentProfile::zero(K);
    p.cfo = detail::get_or(j, "cfo", p.cfo);
    p.to = detail::get_or(j, "to", p.to);
    p.po = detail::get_or(j, "po", p.po);
    p.rx_to = detail::get_or(j, "rx_to", 0.0);
    p.backoff = detail::get_or(j, "backoff", 0.0);
    p.normalize();
    p.validate(K);
    return p;
}

inline json to_json(const OfdmConfig& c) {
    return {{"num_subcarriers", c.num_subcarriers}, {"symbol_duration", c.symbol_duration}, {"cp_duration", c.cp_duration},
            {"backoff", c.backoff}, {"oversampling", c.oversampling}};
}

inline OfdmConfig ofdm_config_from_json(const json& j) {
    OfdmConfig c;
    c.num_subcarriers = detail::get_or(j, "num_subcarriers", c.num_subcarriers);
    c.symbol_duration = detail::get_or(j, "symbol_duration", c.symbol_duration);
    c.cp_duration = detail::get_or(j, "cp_duration", c.cp_duration);
    c.backoff = detail::get_or(j, "backoff", c.backoff);
    c.oversampling = detail::get_or(j, "oversampling", c.oversampling);
    c.validate();
    return c;
}

inline json to_json(const PowerPolicy& p) {
    return {{"eta", p.eta}, {"powers", p.powers}, {"threshold_index", p.threshold_index}, {"objective", p.objective},
            {"order", p.order}};
}

inline json to_json(const MatC& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (int c = 0; c < m.cols(); ++c) r.push_back(to_json(m(i, c)));
        rows.push_back(r);
    }
    return rows;
}

inline MatC matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) throw InvalidInput("matrix must be a nonempty list of rows");
    const auto rows = static_cast<int>(j.size()), cols = static_cast<int>(j[0].size());
    MatC m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(j[static_cast<std::size_t>(i)].size()) != cols) throw InvalidInput("ragged matrix");
        for (int c = 0; c < cols; ++c) m(i, c) = cplx_from_json(j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)]);
    }
    return m;
}

inline json to_json(const MimoScenario& s) {
    json j{{"Nt", s.Nt}, {"Nr", s.Nr}, {"Q", s.Q}, {"P0", s.P0}, {"noise_variance", s.noise_variance}, {"H", json::array()}};
    for (const auto& h : s.H) j["H"].push_back(to_json(h));
    return j;
}

inline MimoScenario mimo_from_json(const json& j) {
    MimoScenario s;
    for (const auto& h : detail::field(j, "H")) s.H.push_back(matrix_from_json(h));
    require(!s.H.empty(), "MIMO scenario needs channels");
    s.Nr = static_cast<int>(s.H[0].rows());
    s.Nt = static_cast<int>(s.H[0].cols());
    s.Q = detail::get_or(j, "Q", 1);
    s.P0 = detail::get_or(j, "P0", 1.0);
    s.noise_variance = detail::get_or(j, "noise_variance", 0.0);
    s.validate();
    return s;
}

inline json to_json(const BeamformerSet& b) {
    json j{{"eta", b.eta}, {"F", to_json(b.F)}, {"B", json::array()}};
    for (const auto& m : b.B) j["B"].push_back(to_json(m));
    return j;
}

// Constellation file: {"values": [level values], "points": [[[re,im],...] per node], "budgets": [...]}
struct ConstellationFile {
    std::vector<double> values;
    std::vector<CVec> points;
    std::vector<double> budgets;
};

inline ConstellationFile constellation_file_from_json(const json& j) {
    ConstellationFile c;
    c.values = detail::field(j, "values").get<std::vector<double>>();
    for (const auto& node : detail::field(j, "points")) {
        CVec v;
        for (const auto& z : node) v.push_back(cplx_from_json(z));
        require(v.size() == c.values.size(), "each node needs one point per value");
        c.points.push_back(std::move(v));
    }
    require(!c.points.empty(), "constellation without nodes");
    c.budgets = detail::get_or(j, "budgets", std::vector<double>{});
    if (c.budgets.empty()) {
        double peak = 0.0;
        for (const auto& node : c.points)
            for (cplx z : node) peak = std::max(peak, std::norm(z));
        c.budgets.assign(c.points.size(), peak > 0.0 ? peak : 1.0);
    }
    require(c.budgets.size() == c.points.size(), "budget count != node count");
    return c;
}

inline Constellation build_constellation(const ConstellationFile& f, FunctionKind kind, double param = 1.0) {
    FunctionSpec spec;
    spec.kind = kind;
    spec.param = param;
    spec.K = static_cast<int>(f.points.size());
    spec.input_range = {*std::min_element(f.values.begin(), f.values.end()), *std::max_element(f.values.begin(), f.values.end())};
    const auto& vals = f.values;
    Constellation c;
    c.points = f.points;
    c.budgets = f.budgets;
    c.table = make_function_table(static_cast<int>(vals.size()), spec.K, [&](const std::vector<int>& t) {
        std::vector<double> v;
        for (int i : t) v.push_back(vals[static_cast<std::size_t>(i)]);
        return evaluate_function(spec, std::span<const double>(v));
    });
    return c;
}

inline json to_json(const Constellation& c, const std::vector<double>& values = {}) {
    json j{{"points", json::array()}, {"budgets", c.budgets}};
    for (const auto& node : c.points) {
        json n = json::array();
        for (cplx z : node) n.push_back(to_json(z));
        j["points"].push_back(n);
    }
    if (!values.empty()) j["values"] = values;
    return j;
}

inline json to_json(const FeasibilityReport& r) {
    json j{{"feasible", r.feasible}, {"violations", json::array()}};
    for (const auto& v : r.violations)
        j["violations"].push_back({{"f_a", v.f_a}, {"f_b", v.f_b}, {"point", to_json(v.point)}});
    return j;
}

// Scenario <-> JSON
inline json to_json(const Scenario& s) {
    json j{{"name", s.name},
           {"experiment", s.experiment == ExperimentKind::csi ? "csi" : "scheme_sweep"},
           {"function", to_json(s.function)},
           {"input", to_json(s.input)},
           {"channel", s.channel == ChannelKind::rayleigh ? "rayleigh" : "awgn"},
           {"snr_reference", s.snr_reference == SnrReference::total ? "total" : "per_user"},
           {"snr_db", s.snr_db},
           {"trials", s.trials},
           {"seed", s.seed},
           {"outage_epsilon", s.epsilon()}};
    if (s.experiment == ExperimentKind::scheme_sweep) {
        j["schemes"] = json::array();
        for (const auto& c : s.schemes) j["schemes"].push_back(to_json(c));
    } else {
        j["phase_deviation_deg"] = s.phase_deviation_deg;
        j["k_values"] = s.users();
        j["csi_axis"] = s.csi_axis == CsiAxis::users ? "users" : "phase";
    }
    return j;
}

inline Scenario scenario_from_json(const json& j) {
    if (!j.is_object()) throw InvalidInput("scenario must be a JSON object");
    Scenario s;
    s.name = detail::get_or<std::string>(j, "name", "scenario");
    const auto exp = detail::get_or<std::string>(j, "experiment", "scheme_sweep");
    if (exp == "csi") s.experiment = ExperimentKind::csi;
    else if (exp != "scheme_sweep") throw InvalidInput("experiment must be 'scheme_sweep' or 'csi'");
    s.function = function_spec_from_json(detail::field(j, "function"));
    s.input = j.contains("input") ? input_from_json(j.at("input")) : InputDistribution{InputKind::continuous, s.function.input_range, 0};
    const auto ch = detail::get_or<std::string>(j, "channel", "awgn");
    if (ch == "rayleigh") s.channel = ChannelKind::rayleigh;
    else if (ch != "awgn") throw InvalidInput("channel must be 'awgn' or 'rayleigh'");
    const auto ref = detail::get_or<std::string>(j, "snr_reference", "per_user");
    if (ref == "total") s.snr_reference = SnrReference::total;
    else if (ref != "per_user") throw InvalidInput("snr_reference must be 'per_user' or 'total'");
    s.snr_db = detail::get_or(j, "snr_db", s.snr_db);
    if (j.contains("schemes"))
        for (const auto& c : j.at("schemes")) s.schemes.push_back(scheme_from_json(c));
    s.phase_deviation_deg = detail::get_or(j, "phase_deviation_deg", s.phase_deviation_deg);
    s.k_values = detail::get_or(j, "k_values", s.k_values);
    const auto axis = detail::get_or<std::string>(j, "csi_axis", "phase");
    if (axis == "users") s.csi_axis = CsiAxis::users;
    else if (axis != "phase") throw InvalidInput("csi_axis must be 'phase' or 'users'");
    s.trials = detail::get_or(j, "trials", s.trials);
    s.seed = detail::get_or<std::uint64_t>(j, "seed", s.seed);
    s.outage_epsilon = detail::get_or(j, "outage_epsilon", 0.0);
    s.validate();
    return s;
}

// A bundle is {"name", "scenarios": [...]}; a bare scenario is a bundle of one.
inline std::vector<Scenario> scenarios_from_json(const json& j) {
    std::vector<Scenario> out;
    if (j.is_object() && j.contains("scenarios")) {
        for (const auto& s : j.at("scenarios")) out.push_back(scenario_from_json(s));
        require(!out.empty(), "bundle without scenarios");
    } else {
        out.push_back(scenario_from_json(j));
    }
    return out;
}

// FNV-1a over the canonical dump.
inline std::string fingerprint(const json& j) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline json to_json(const MetricsReport& r) {
    return {{"mse", r.mse}, {"nmse", r.nmse}, {"outage", r.outage_rate}, {"cer", r.cer}, {"ci", r.confidence_halfwidth},
            {"trials", r.trial_count}, {"epsilon", r.epsilon}, {"discrete", r.discrete}};
}

inline json to_json(const SweepResult& r) {
    json j{{"seed", r.seed}, {"trials", r.trials}, {"scenario_hash", r.scenario_hash}, {"wall_time_s", r.wall_time_s},
           {"series", json::array()}};
    for (const auto& s : r.series) {
        json js{{"series", s.series}, {"axis_name", s.axis_name}, {"axis", s.axis}, {"reports", json::array()}};
        for (const auto& m : s.reports) js["reports"].push_back(to_json(m));
        j["series"].push_back(js);
    }
    return j;
}

} // namespace aircomp

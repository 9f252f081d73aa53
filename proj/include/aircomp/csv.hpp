#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "aircomp/channel.hpp"
#include "aircomp/constellation.hpp"
#include "aircomp/ofdm.hpp"
#include "aircomp/simulator.hpp"

namespace aircomp {

// Round-trip exact decimal form.
inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline void write_results_csv(std::ostream& os, const SweepResult& r) {
    os << "series,axis,mse,nmse,outage,cer,ci\n";
    for (const auto& s : r.series)
        for (std::size_t i = 0; i < s.axis.size(); ++i) {
            const auto& m = s.reports[i];
            os << csv_field(s.series) << ',' << num(s.axis[i]) << ',' << num(m.mse) << ',' << num(m.nmse) << ','
               << num(m.outage_rate) << ',' << num(m.cer) << ',' << num(m.confidence_halfwidth) << '\n';
        }
}

// Plot-ready long format: one row per (series, x).
inline void write_long_csv(std::ostream& os, const SweepResult& r, const std::string& metric) {
    os << "series,x,y\n";
    for (const auto& s : r.series)
        for (std::size_t i = 0; i < s.axis.size(); ++i) {
            const auto& m = s.reports[i];
            const double y = metric == "mse" ? m.mse : metric == "outage" ? m.outage_rate : metric == "cer" ? m.cer : m.nmse;
            os << csv_field(s.series) << ',' << num(s.axis[i]) << ',' << num(y) << '\n';
        }
}

inline void write_waveform_csv(std::ostream& os, const CVec& x, double sample_rate, double t0 = 0.0) {
    os << "time,re,im\n";
    for (std::size_t n = 0; n < x.size(); ++n)
        os << num(t0 + static_cast<double>(n) / sample_rate) << ',' << num(x[n].real()) << ',' << num(x[n].imag()) << '\n';
}

inline void write_composite_csv(std::ostream& os, const CompositeMatrix& c) {
    os << "k,l,re,im\n";
    for (std::size_t k = 0; k < c.size(); ++k)
        for (std::size_t l = 0; l < c[k].size(); ++l)
            os << k << ',' << l << ',' << num(c[k][l].real()) << ',' << num(c[k][l].imag()) << '\n';
}

inline void write_constellation_csv(std::ostream& os, const Constellation& c) {
    os << "node,index,re,im\n";
    for (std::size_t k = 0; k < c.points.size(); ++k)
        for (std::size_t i = 0; i < c.points[k].size(); ++i)
            os << k << ',' << i << ',' << num(c.points[k][i].real()) << ',' << num(c.points[k][i].imag()) << '\n';
}

} // namespace aircomp

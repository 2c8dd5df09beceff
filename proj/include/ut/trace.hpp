#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ut/errors.hpp"

namespace ut {

/// Uniformly sampled closed-loop record. x is the measured output; x_clean
/// is the pre-noise output and is only populated by local simulation for
/// oracle checks. Sessions hand out traces without it.
struct Trace {
    double dt = 0.0;
    double t0 = 0.0;
    std::vector<double> r; // reference
    std::vector<double> u; // controller output
    std::vector<double> x; // measured output
    std::vector<double> d; // disturbance input
    std::vector<double> x_clean;
    std::vector<double> t_explicit; // set when loaded from file, keeps round-trips exact
    bool diverged = false;

    [[nodiscard]] std::size_t size() const { return r.size(); }

    [[nodiscard]] double time(std::size_t i) const {
        return t_explicit.empty() ? t0 + static_cast<double>(i) * dt : t_explicit[i];
    }

    [[nodiscard]] double duration() const {
        return size() < 2 ? 0.0 : time(size() - 1) - time(0);
    }

    [[nodiscard]] Trace without_clean() const {
        Trace t = *this;
        t.x_clean.clear();
        return t;
    }
};

namespace detail {

inline std::string format_g9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace detail

/// Serialize with 9 significant digits and LF line endings. Missing x_clean
/// is written as nan so the column layout never changes.
inline std::string trace_to_csv(const Trace& tr) {
    std::string out = "t,r,u,x,d,x_clean\n";
    for (std::size_t i = 0; i < tr.size(); ++i) {
        out += detail::format_g9(tr.time(i));
        out += ',';
        out += detail::format_g9(tr.r[i]);
        out += ',';
        out += detail::format_g9(tr.u[i]);
        out += ',';
        out += detail::format_g9(tr.x[i]);
        out += ',';
        out += detail::format_g9(tr.d[i]);
        out += ',';
        out += tr.x_clean.empty() ? "nan" : detail::format_g9(tr.x_clean[i]);
        out += '\n';
    }
    return out;
}

inline void write_trace_csv(const std::string& path, const Trace& tr) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for write: " + path);
    f << trace_to_csv(tr);
}

inline Trace trace_from_csv_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty trace file");
    if (line == "t,r,u,x,d,x_clean\r") line.pop_back();
    if (line != "t,r,u,x,d,x_clean")
        throw SchemaError("unexpected trace header: " + line);

    Trace tr;
    bool any_clean = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        double v[6];
        std::size_t pos = 0;
        for (int k = 0; k < 6; ++k) {
            const std::size_t next = line.find(',', pos);
            const std::string cell = line.substr(pos, next == std::string::npos
                                                          ? std::string::npos
                                                          : next - pos);
            try {
                v[k] = std::stod(cell);
            } catch (const std::exception&) {
                throw SchemaError("bad trace cell: " + cell);
            }
            pos = next == std::string::npos ? line.size() : next + 1;
        }
        tr.t_explicit.push_back(v[0]);
        tr.r.push_back(v[1]);
        tr.u.push_back(v[2]);
        tr.x.push_back(v[3]);
        tr.d.push_back(v[4]);
        tr.x_clean.push_back(v[5]);
        if (!std::isnan(v[5])) any_clean = true;
    }
    if (tr.size() < 2) throw TooShort("trace has fewer than two samples");
    if (!any_clean) tr.x_clean.clear();
    tr.t0 = tr.t_explicit.front();
    tr.dt = (tr.t_explicit.back() - tr.t_explicit.front()) /
            static_cast<double>(tr.size() - 1);
    return tr;
}

inline Trace read_trace_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for read: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return trace_from_csv_text(ss.str());
}

} // namespace ut

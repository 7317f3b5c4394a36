#pragma once

// CSV and key = value text formats shared by the harness and the CLI.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "profile_opt.hpp"

namespace vdsopt {

inline std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, std::string_view delims)
{
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto next = s.find_first_of(delims, pos);
        const auto tok = trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (!tok.empty()) out.push_back(tok);
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

inline double parse_double(const std::string& s, const std::string& what)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw Error("cannot parse " + what + " '" + s + "'");
    }
    if (used != s.size()) throw Error("cannot parse " + what + " '" + s + "'");
    return v;
}

inline std::uint64_t parse_uint(const std::string& s, const std::string& what)
{
    std::uint64_t v = 0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) throw Error("cannot parse " + what + " '" + s + "'");
    return v;
}

inline std::string format_double(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline std::ifstream open_input(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "'");
    return is;
}

inline std::ofstream open_output(const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    return os;
}

// Ordered key = value map; '#' starts a comment.
using KeyValues = std::map<std::string, std::string>;

inline KeyValues parse_key_values(std::istream& is, const std::string& origin = "<stream>")
{
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw Error(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const auto key = trim(std::string_view(t).substr(0, eq));
        if (key.empty()) throw Error(origin + ":" + std::to_string(lineno) + ": empty key");
        kv[key] = trim(std::string_view(t).substr(eq + 1));
    }
    return kv;
}

inline KeyValues read_key_values(const std::string& path)
{
    auto is = open_input(path);
    return parse_key_values(is, path);
}

inline void write_key_values(std::ostream& os, const KeyValues& kv)
{
    for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
}

inline void write_profile_csv(std::ostream& os, std::span<const double> p)
{
    os << "index,p\n" << std::setprecision(17);
    for (std::size_t i = 0; i < p.size(); ++i) os << i << "," << p[i] << "\n";
}

inline void write_profile_csv(const std::string& path, std::span<const double> p)
{
    auto os = open_output(path);
    write_profile_csv(os, p);
    if (!os) throw Error("write failed for '" + path + "'");
}

// Reads a two-column (index, value) CSV with header. Indices must be 0..N-1 in order.
inline rvec read_indexed_csv(std::istream& is, const std::string& origin = "<stream>")
{
    std::string line;
    if (!std::getline(is, line)) throw Error(origin + ": empty file");
    rvec out;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cols = split(line, ",");
        if (cols.size() != 2) throw Error(origin + ":" + std::to_string(lineno) + ": expected 2 columns");
        const auto idx = parse_uint(cols[0], "index");
        if (idx != out.size()) throw Error(origin + ":" + std::to_string(lineno) + ": indices must be consecutive from 0");
        out.push_back(parse_double(cols[1], "value"));
    }
    if (out.empty()) throw Error(origin + ": no data rows");
    return out;
}

inline rvec read_profile_csv(const std::string& path)
{
    auto is = open_input(path);
    return read_indexed_csv(is, path);
}

inline void write_trace_csv(std::ostream& os, const OptTrace& trace, const std::string& label = {})
{
    os << std::setprecision(17);
    for (const auto& r : trace.records) {
        if (!label.empty()) os << label << ",";
        os << r.iteration << "," << r.objective << "," << r.linf_term << "," << r.residual << "," << r.p_sum << ","
           << r.change << "," << r.q_iters << "," << r.p_iters << "\n";
    }
}

inline const char* trace_csv_header() { return "iteration,objective,linf_term,residual,p_sum,change,q_iters,p_iters"; }

} // namespace vdsopt

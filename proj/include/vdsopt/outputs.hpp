#pragma once

// Experiment artifacts: recovery curves, profiles, optimizer traces, the run
// manifest and a static SVG figure.

#include <filesystem>

#include "experiment.hpp"

namespace vdsopt {

inline void write_curve_csv(std::ostream& os, const RecoveryCurve& curve)
{
    os << "m,probability,successes,trials,ci_low,ci_high,solver_failures,mean_measurements\n"
       << std::setprecision(17);
    for (const auto& r : curve.rows) {
        os << r.m << "," << r.probability << "," << r.successes << "," << r.trials << "," << r.ci_low << ","
           << r.ci_high << "," << r.solver_failures << "," << r.mean_measurements << "\n";
    }
}

inline std::string profile_filename(const ArmProfile& ap)
{
    std::string m = format_double(ap.m);
    std::replace(m.begin(), m.end(), '.', 'p');
    return "profile_" + ap.arm + "_m" + m + ".csv";
}

namespace detail {

inline std::string svg_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

} // namespace detail

// Left panel: recovery curves with Wilson bands. Right panel: profiles at the
// largest budget.
inline void write_svg(std::ostream& os, const ExperimentSpec& spec, const ExperimentResult& res)
{
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
    const double W = 420, H = 300, L = 50, T = 20, PW = 340, PH = 240;
    const double m_lo = spec.m_grid.front(), m_hi = spec.m_grid.back();
    auto xm = [&](double m) { return L + (m_hi > m_lo ? (m - m_lo) / (m_hi - m_lo) : 0.5) * PW; };
    auto yp = [&](double v) { return T + (1.0 - v) * PH; };

    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * W << "\" height=\"" << H + 20
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << PW << "\" height=\"" << PH
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << L + PW / 2 << "\" y=\"" << T + PH + 30 << "\" text-anchor=\"middle\">m</text>\n";
    os << "<text x=\"" << L - 8 << "\" y=\"" << T + 4 << "\" text-anchor=\"end\">1</text>\n";
    os << "<text x=\"" << L - 8 << "\" y=\"" << T + PH << "\" text-anchor=\"end\">0</text>\n";
    os << "<text x=\"" << L << "\" y=\"" << T + PH + 14 << "\">" << m_lo << "</text>\n";
    os << "<text x=\"" << L + PW << "\" y=\"" << T + PH + 14 << "\" text-anchor=\"end\">" << m_hi << "</text>\n";
    for (std::size_t a = 0; a < res.curves.size(); ++a) {
        const auto& c = res.curves[a];
        const char* col = colors[a % std::size(colors)];
        os << "<polygon fill=\"" << col << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
        for (const auto& r : c.rows) os << xm(r.m) << "," << yp(r.ci_high) << " ";
        for (auto it = c.rows.rbegin(); it != c.rows.rend(); ++it) os << xm(it->m) << "," << yp(it->ci_low) << " ";
        os << "\"/>\n<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& r : c.rows) os << xm(r.m) << "," << yp(r.probability) << " ";
        os << "\"/>\n<text x=\"" << L + 6 << "\" y=\"" << T + 14 + 13 * a << "\" fill=\"" << col << "\">"
           << detail::svg_escape(c.arm) << "</text>\n";
    }

    const double L2 = W + L;
    os << "<rect x=\"" << L2 << "\" y=\"" << T << "\" width=\"" << PW << "\" height=\"" << PH
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << L2 + PW / 2 << "\" y=\"" << T + PH + 30 << "\" text-anchor=\"middle\">index (m = " << m_hi
       << ")</text>\n";
    const double nn = static_cast<double>(spec.n);
    std::size_t a = 0;
    for (const auto& ap : res.profiles) {
        if (ap.m != m_hi) continue;
        const char* col = colors[a++ % std::size(colors)];
        os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < ap.profile.p.size(); ++i) {
            os << L2 + (nn > 1 ? i / (nn - 1) : 0.5) * PW << "," << yp(ap.profile.p[i]) << " ";
        }
        os << "\"/>\n";
    }
    os << "</svg>\n";
}

// Writes every artifact into spec.outdir. The manifest is a valid spec file
// that reruns the experiment.
inline std::vector<std::string> emit_outputs(const ExperimentSpec& spec, const ExperimentResult& res)
{
    namespace fs = std::filesystem;
    fs::create_directories(spec.outdir);
    const fs::path dir(spec.outdir);
    std::vector<std::string> written;
    auto finish = [&](std::ofstream& os, const fs::path& path) {
        os.close();
        if (!os) throw Error("write failed for '" + path.string() + "'");
        written.push_back(path.string());
    };

    for (const auto& c : res.curves) {
        const auto path = dir / ("curve_" + c.arm + ".csv");
        auto os = open_output(path.string());
        write_curve_csv(os, c);
        finish(os, path);
    }
    for (const auto& ap : res.profiles) {
        const auto path = dir / profile_filename(ap);
        auto os = open_output(path.string());
        write_profile_csv(os, ap.profile.p);
        finish(os, path);
    }
    {
        const auto path = dir / "trace.csv";
        auto os = open_output(path.string());
        os << "arm,m," << trace_csv_header() << "\n";
        for (const auto& ap : res.profiles) {
            if (ap.trace) write_trace_csv(os, *ap.trace, ap.arm + "," + format_double(ap.m));
        }
        finish(os, path);
    }
    if (res.diag_B) {
        const auto path = dir / "diag_B.csv";
        auto os = open_output(path.string());
        write_diagonal_csv(os, *res.diag_B);
        finish(os, path);
    }
    if (res.diag_C) {
        const auto path = dir / "diag_C.csv";
        auto os = open_output(path.string());
        write_diagonal_csv(os, *res.diag_C);
        finish(os, path);
    }
    {
        const auto path = dir / "manifest.txt";
        auto os = open_output(path.string());
        os << "# vdsopt " << version << " experiment manifest\n";
        os << "# seed environment variable: " << seed_env_var << "\n";
        if (res.prior) os << "# prior provenance: " << res.prior->provenance << "\n";
        for (const auto& ap : res.profiles) {
            if (!ap.trace) continue;
            for (const auto& w : ap.trace->warnings) os << "# warning " << ap.arm << " m=" << ap.m << ": " << w << "\n";
        }
        write_key_values(os, spec.to_key_values());
        finish(os, path);
    }
    if (spec.plot) {
        const auto path = dir / "curves.svg";
        auto os = open_output(path.string());
        write_svg(os, spec, res);
        finish(os, path);
    }
    return written;
}

} // namespace vdsopt

#include "convexity/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "convexity/errors.hpp"

namespace cvx::plot {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 420;
constexpr int kMarginL = 70, kMarginR = 70, kMarginT = 30, kMarginB = 50;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct Scale {
    double lo = 0.0, hi = 1.0;
    double px0 = 0.0, px1 = 1.0;
    double at(double v) const {
        const double f = hi > lo ? (v - lo) / (hi - lo) : 0.5;
        return px0 + f * (px1 - px0);
    }
};

void header(std::ofstream& out) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void frame(std::ofstream& out) {
    out << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\""
        << (kWidth - kMarginL - kMarginR) << "\" height=\"" << (kHeight - kMarginT - kMarginB)
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
}

void text(std::ofstream& out, double x, double y, const std::string& s, const char* anchor,
          const char* fill = "#222") {
    out << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"12\" fill=\"" << fill
        << "\" text-anchor=\"" << anchor << "\">" << s << "</text>\n";
}

}  // namespace

void write_time_series(const std::string& path, const std::vector<double>& t,
                       const std::vector<double>& loss,
                       const std::vector<std::optional<double>>& normalized,
                       double clip_ceiling) {
    if (t.empty() || t.size() != loss.size() || t.size() != normalized.size())
        throw InvalidInput("time series lengths must match and be nonempty");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot open '" + path + "' for writing");

    Scale xs{*std::min_element(t.begin(), t.end()), *std::max_element(t.begin(), t.end()),
             static_cast<double>(kMarginL), static_cast<double>(kWidth - kMarginR)};
    if (xs.hi == xs.lo) xs.hi = xs.lo + 1.0;

    Scale ls{*std::min_element(loss.begin(), loss.end()),
             *std::max_element(loss.begin(), loss.end()),
             static_cast<double>(kHeight - kMarginB), static_cast<double>(kMarginT)};
    if (ls.hi == ls.lo) ls.hi = ls.lo + 1.0;

    double nlo = std::numeric_limits<double>::infinity(), nhi = -nlo;
    for (const auto& v : normalized)
        if (v) {
            const double c = std::min(*v, clip_ceiling);
            nlo = std::min(nlo, c);
            nhi = std::max(nhi, c);
        }
    if (!std::isfinite(nlo)) {
        nlo = 0.0;
        nhi = 1.0;
    }
    if (nhi == nlo) nhi = nlo + 1.0;
    Scale ns{nlo, nhi, static_cast<double>(kHeight - kMarginB), static_cast<double>(kMarginT)};

    header(out);
    frame(out);

    out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < t.size(); ++i)
        out << num(xs.at(t[i])) << ',' << num(ls.at(loss[i])) << ' ';
    out << "\"/>\n";

    // Clipped normalized curve; absent samples break the line into segments.
    bool open = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (normalized[i]) {
            if (!open) {
                out << "<polyline fill=\"none\" stroke=\"#ff7f0e\" stroke-width=\"1.5\" "
                       "points=\"";
                open = true;
            }
            out << num(xs.at(t[i])) << ',' << num(ns.at(std::min(*normalized[i], clip_ceiling)))
                << ' ';
        } else if (open) {
            out << "\"/>\n";
            open = false;
        }
    }
    if (open) out << "\"/>\n";

    text(out, kMarginL, kMarginT - 8, "loss", "start", "#1f77b4");
    text(out, kWidth - kMarginR, kMarginT - 8,
         "normalized 2nd derivative (clip " + num(clip_ceiling) + ")", "end", "#ff7f0e");
    text(out, kMarginL, kHeight - kMarginB + 16, num(xs.lo), "middle");
    text(out, kWidth - kMarginR, kHeight - kMarginB + 16, num(xs.hi), "middle");
    text(out, kMarginL - 6, kHeight - kMarginB, num(ls.lo), "end", "#1f77b4");
    text(out, kMarginL - 6, kMarginT + 10, num(ls.hi), "end", "#1f77b4");
    text(out, kWidth - kMarginR + 6, kHeight - kMarginB, num(ns.lo), "start", "#ff7f0e");
    text(out, kWidth - kMarginR + 6, kMarginT + 10, num(ns.hi), "start", "#ff7f0e");
    text(out, (kMarginL + kWidth - kMarginR) / 2.0, kHeight - 12, "t", "middle");
    out << "</svg>\n";
}

void write_histogram(const std::string& path, const std::vector<double>& values, int bins,
                     double lo, double hi, const std::string& x_label) {
    if (values.empty()) throw InvalidInput("histogram needs at least one value");
    if (bins < 1) throw InvalidInput("histogram needs at least one bin");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot open '" + path + "' for writing");

    double vlo = lo, vhi = hi;
    if (!(vhi > vlo)) {
        vlo = *std::min_element(values.begin(), values.end());
        vhi = *std::max_element(values.begin(), values.end());
        if (vhi == vlo) {
            vlo -= 0.5;
            vhi += 0.5;
        }
    }

    std::vector<int> counts(static_cast<std::size_t>(bins), 0);
    for (double v : values) {
        int b = static_cast<int>((v - vlo) / (vhi - vlo) * bins);
        b = std::clamp(b, 0, bins - 1);
        ++counts[static_cast<std::size_t>(b)];
    }
    const int cmax = *std::max_element(counts.begin(), counts.end());

    header(out);
    frame(out);
    const double plot_w = kWidth - kMarginL - kMarginR;
    const double plot_h = kHeight - kMarginT - kMarginB;
    for (int b = 0; b < bins; ++b) {
        const double frac = cmax > 0 ? static_cast<double>(counts[static_cast<std::size_t>(b)]) / cmax : 0.0;
        const double bh = frac * plot_h;
        const double bw = plot_w / bins;
        out << "<rect class=\"bin\" data-count=\"" << counts[static_cast<std::size_t>(b)]
            << "\" x=\"" << num(kMarginL + b * bw + 1) << "\" y=\""
            << num(kHeight - kMarginB - bh) << "\" width=\"" << num(bw - 2) << "\" height=\""
            << num(bh) << "\" fill=\"#1f77b4\"/>\n";
    }
    text(out, kMarginL, kHeight - kMarginB + 16, num(vlo), "middle");
    text(out, kWidth - kMarginR, kHeight - kMarginB + 16, num(vhi), "middle");
    text(out, kMarginL - 6, kMarginT + 10, std::to_string(cmax), "end");
    text(out, kMarginL - 6, kHeight - kMarginB, "0", "end");
    text(out, (kMarginL + kWidth - kMarginR) / 2.0, kHeight - 12, x_label, "middle");
    out << "</svg>\n";
}

}  // namespace cvx::plot

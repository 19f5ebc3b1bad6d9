#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace basinlab::svg {

/// Thrown on malformed plot input; line() is the 1-based line number in the
/// CSV file.
class PlotError : public std::runtime_error {
public:
    PlotError(const std::string& message, std::size_t line)
        : std::runtime_error(message + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct HistogramPoint {
    double center;
    int type;
    double count;
};

struct SweepPoint {
    double tau;
    double eps;
    double ratio;  // NaN when undefined
};

namespace detail {

inline std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            return out;
        }
        out.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline double parse_double(const std::string& field, std::size_t line) {
    char* end = nullptr;
    double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0')
        throw PlotError("expected a number, got \"" + field + "\"", line);
    return v;
}

inline std::vector<std::vector<std::string>> parse_csv(std::string_view text,
                                                       const std::string& expect_header,
                                                       std::size_t n_fields) {
    std::vector<std::vector<std::string>> rows;
    bool seen_header = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (!seen_header) {
            if (line != expect_header)
                throw PlotError("unexpected header; expected \"" + expect_header + "\"", line_no);
            seen_header = true;
            continue;
        }
        auto fields = split_fields(line);
        if (fields.size() != n_fields)
            throw PlotError("expected " + std::to_string(n_fields) + " fields, got " +
                                std::to_string(fields.size()),
                            line_no);
        rows.push_back(std::move(fields));
    }
    if (!seen_header) throw PlotError("empty input", 1);
    return rows;
}

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// round a positive magnitude up to 1/2/5 * 10^k
inline double nice_ceil(double v) {
    if (v <= 0.0) return 1.0;
    double mag = std::pow(10.0, std::floor(std::log10(v)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (v <= m * mag * (1.0 + 1e-12)) return m * mag;
    return 10.0 * mag;
}

inline const char* type_color(int type) {
    static const char* palette[] = {"#4878cf", "#d65f5f", "#6acc65",
                                    "#956cb4", "#c4ad66", "#77bedb"};
    return palette[type >= 0 ? type % 6 : 0];
}

struct Canvas {
    std::string body;

    void rect(double x, double y, double w, double h, const std::string& fill) {
        body += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(w) +
                "\" height=\"" + fmt(h) + "\" fill=\"" + fill + "\"/>\n";
    }
    void line(double x1, double y1, double x2, double y2, const char* stroke = "#222222") {
        body += "<line x1=\"" + fmt(x1) + "\" y1=\"" + fmt(y1) + "\" x2=\"" + fmt(x2) +
                "\" y2=\"" + fmt(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"1\"/>\n";
    }
    void text(double x, double y, const std::string& s, const char* anchor = "middle",
              int size = 11) {
        body += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" text-anchor=\"" + anchor +
                "\" font-family=\"sans-serif\" font-size=\"" + std::to_string(size) + "\">" + s +
                "</text>\n";
    }
    std::string finish(double width, double height) const {
        return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
               fmt(width) + "\" height=\"" + fmt(height) + "\" viewBox=\"0 0 " + fmt(width) +
               " " + fmt(height) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
               body + "</svg>\n";
    }
};

}  // namespace detail

// --- input parsing -----------------------------------------------------------

/// Histogram CSV as written by `run`: index,center,type,count.
inline std::vector<HistogramPoint> parse_histogram_csv(std::string_view text) {
    auto rows = detail::parse_csv(text, "index,center,type,count", 4);
    std::vector<HistogramPoint> out;
    std::size_t line = 1;
    for (const auto& f : rows) {
        ++line;
        HistogramPoint p;
        p.center = detail::parse_double(f[1], line);
        p.type = static_cast<int>(detail::parse_double(f[2], line));
        p.count = detail::parse_double(f[3], line);
        out.push_back(p);
    }
    return out;
}

/// Sweep CSV as written by `sweep` (ratio fields may be "nan").
inline std::vector<SweepPoint> parse_sweep_csv(std::string_view text) {
    auto rows = detail::parse_csv(
        text, "tau,epsilon,trials,in_interval,escaped,ratio_per_well,ratio_total", 7);
    std::vector<SweepPoint> out;
    std::size_t line = 1;
    for (const auto& f : rows) {
        ++line;
        SweepPoint p;
        p.tau = detail::parse_double(f[0], line);
        p.eps = detail::parse_double(f[1], line);
        p.ratio = detail::parse_double(f[5], line);
        out.push_back(p);
    }
    return out;
}

// --- rendering ----------------------------------------------------------------
//
// Output is a pure function of the parsed rows: no timestamps, fixed float
// formatting, so identical CSV input produces byte-identical SVG.

inline std::string render_histogram(const std::vector<HistogramPoint>& rows) {
    const double W = 720, H = 440, ml = 64, mr = 20, mt = 28, mb = 52;
    const double pw = W - ml - mr, ph = H - mt - mb;
    detail::Canvas c;

    c.line(ml, mt + ph, ml + pw, mt + ph);
    c.line(ml, mt, ml, mt + ph);
    c.text(ml + pw / 2, H - 12, "terminal position (well center)");
    c.text(14, mt + ph / 2, "count", "middle", 11);

    if (rows.empty()) {
        c.text(ml + pw / 2, mt + ph / 2, "no data");
        return c.finish(W, H);
    }

    double xmin = rows.front().center, xmax = rows.front().center, cmax = 0.0;
    double spacing = 0.0;
    for (const auto& r : rows) {
        xmin = std::min(xmin, r.center);
        xmax = std::max(xmax, r.center);
        cmax = std::max(cmax, r.count);
    }
    if (rows.size() > 1) {
        std::vector<double> centers;
        for (const auto& r : rows) centers.push_back(r.center);
        std::sort(centers.begin(), centers.end());
        spacing = centers[1] - centers[0];
        for (std::size_t i = 2; i < centers.size(); ++i)
            spacing = std::min(spacing, centers[i] - centers[i - 1]);
    }
    if (spacing <= 0.0) spacing = 1.0;
    xmin -= spacing;
    xmax += spacing;
    double ymax = detail::nice_ceil(cmax);

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return mt + ph - y / ymax * ph; };

    // y ticks
    for (int i = 0; i <= 4; ++i) {
        double v = ymax * i / 4;
        c.line(ml - 4, py(v), ml, py(v));
        c.text(ml - 8, py(v) + 4, detail::fmt(v), "end", 10);
    }
    // bars and center labels
    double barw = spacing * 0.75 / (xmax - xmin) * pw;
    for (const auto& r : rows) {
        double x = px(r.center);
        if (r.count > 0.0)
            c.rect(x - barw / 2, py(r.count), barw, py(0.0) - py(r.count),
                   detail::type_color(r.type));
        c.line(x, mt + ph, x, mt + ph + 4);
        if (rows.size() <= 16) c.text(x, mt + ph + 16, detail::fmt(r.center), "middle", 10);
    }
    return c.finish(W, H);
}

inline std::string render_sweep(const std::vector<SweepPoint>& rows) {
    // one panel per distinct tau, in order of first appearance
    std::vector<double> taus;
    for (const auto& r : rows)
        if (std::find(taus.begin(), taus.end(), r.tau) == taus.end()) taus.push_back(r.tau);

    const double panel_w = 180, panel_h = 250, gap = 22, ml = 56, mt = 34, mb = 52;
    const std::size_t n_panels = std::max<std::size_t>(1, taus.size());
    const double W = ml + n_panels * (panel_w + gap), H = mt + panel_h + mb;
    detail::Canvas c;

    double rmax = 0.0, emin = 0.0, emax = 1.0;
    bool have_e = false;
    for (const auto& r : rows) {
        if (std::isfinite(r.ratio)) rmax = std::max(rmax, r.ratio);
        if (!have_e) {
            emin = emax = r.eps;
            have_e = true;
        } else {
            emin = std::min(emin, r.eps);
            emax = std::max(emax, r.eps);
        }
    }
    double ymax = detail::nice_ceil(std::max(1.0, rmax));
    if (emax <= emin) emax = emin + 1.0;

    c.text(14, mt + panel_h / 2, "r", "middle", 12);
    if (rows.empty()) {
        c.line(ml, mt + panel_h, ml + panel_w, mt + panel_h);
        c.line(ml, mt, ml, mt + panel_h);
        c.text(ml + panel_w / 2, mt + panel_h / 2, "no data");
        c.text(ml + panel_w / 2, H - 12, "epsilon");
        return c.finish(W, H);
    }

    for (std::size_t pi = 0; pi < taus.size(); ++pi) {
        double x0 = ml + pi * (panel_w + gap);
        auto px = [&](double e) { return x0 + (e - emin) / (emax - emin) * panel_w; };
        auto py = [&](double r) { return mt + panel_h - r / ymax * panel_h; };

        c.line(x0, mt + panel_h, x0 + panel_w, mt + panel_h);
        c.line(x0, mt, x0, mt + panel_h);
        c.text(x0 + panel_w / 2, mt - 10, "tau = " + detail::fmt(taus[pi]), "middle", 11);
        c.text(x0 + panel_w / 2, H - 12, "epsilon", "middle", 10);
        for (int i = 0; i <= 2; ++i) {
            double e = emin + (emax - emin) * i / 2;
            c.line(px(e), mt + panel_h, px(e), mt + panel_h + 4);
            c.text(px(e), mt + panel_h + 16, detail::fmt(e), "middle", 9);
        }
        if (pi == 0)
            for (int i = 0; i <= 4; ++i) {
                double v = ymax * i / 4;
                c.line(x0 - 4, py(v), x0, py(v));
                c.text(x0 - 8, py(v) + 4, detail::fmt(v), "end", 9);
            }

        std::vector<const SweepPoint*> panel;
        for (const auto& r : rows)
            if (r.tau == taus[pi]) panel.push_back(&r);
        double spacing = panel.size() > 1 ? (emax - emin) / (panel.size() - 1) : emax - emin;
        double barw = std::max(1.0, spacing * 0.8 / (emax - emin) * panel_w);
        for (const auto* r : panel) {
            if (!std::isfinite(r->ratio)) continue;  // undefined ratio: no bar
            double x = px(r->eps);
            if (r->ratio > 0.0)
                c.rect(x - barw / 2, py(r->ratio), barw, py(0.0) - py(r->ratio), "#4878cf");
        }
    }
    return c.finish(W, H);
}

}  // namespace basinlab::svg

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "basinlab/expr.hpp"

namespace basinlab {

class CatalogError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A 1-D objective on a finite interval, bundled with its exact derivative.
/// Builtins use hand-derived closed forms; expression landscapes use the
/// symbolic derivative.
struct Landscape {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
    std::function<double(double)> value;
    std::function<double(double)> deriv;
    std::string source;  // expression text, empty for builtins
};

enum class BuiltinLandscape { two_depths, two_widths };

/// two_depths: sin(pi x) + cos(2 pi x) + 2 on [-5.92, 6.08] — wells of two
/// depths. two_widths: (sin(pi x) + sin(2 pi x)/2)^2 on [-7/3, 7/3] — wells
/// of two widths. The two_widths closures use factored forms so the
/// derivative keeps a correct sign arbitrarily close to the flat minima at
/// odd integers, where the naive sum cancels catastrophically.
inline Landscape builtin(BuiltinLandscape which) {
    constexpr double pi = std::numbers::pi;
    if (which == BuiltinLandscape::two_depths) {
        return Landscape{
            "two_depths", -5.92, 6.08,
            [](double x) { return std::sin(pi * x) + std::cos(2.0 * pi * x) + 2.0; },
            // pi cos(pi x) - 2 pi sin(2 pi x) = pi cos(pi x) (1 - 4 sin(pi x))
            [](double x) {
                return pi * std::cos(pi * x) * (1.0 - 4.0 * std::sin(pi * x));
            },
            ""};
    }
    // g = h^2 with h = sin(pi x) (1 + cos(pi x)) = 2 sin(pi x) cos^2(pi x / 2);
    // g' = 8 pi sin(pi x) cos^4(pi x / 2) (2 cos(pi x) - 1).
    return Landscape{
        "two_widths", -7.0 / 3.0, 7.0 / 3.0,
        [](double x) {
            double hc = std::cos(0.5 * pi * x);
            double h = 2.0 * std::sin(pi * x) * hc * hc;
            return h * h;
        },
        [](double x) {
            double hc = std::cos(0.5 * pi * x);
            double hc2 = hc * hc;
            double c = 2.0 * hc2 - 1.0;  // cos(pi x)
            return 8.0 * pi * std::sin(pi * x) * hc2 * hc2 * (2.0 * c - 1.0);
        },
        ""};
}

inline std::optional<BuiltinLandscape> builtin_by_name(std::string_view name) {
    if (name == "two_depths") return BuiltinLandscape::two_depths;
    if (name == "two_widths") return BuiltinLandscape::two_widths;
    return std::nullopt;
}

inline Landscape expression_landscape(std::string_view text, double lo, double hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw ConfigError("interval must be finite with lo < hi");
    expr::Expression value = expr::parse(text);
    expr::Expression deriv = expr::differentiate(value);
    return Landscape{std::string(text), lo, hi,
                     [value](double x) { return value(x); },
                     [deriv](double x) { return deriv(x); },
                     std::string(text)};
}

// --- critical points -------------------------------------------------------

enum class CritKind { minimum, maximum };

struct CriticalPoint {
    double x;
    CritKind kind;
};

namespace detail {

inline int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

/// Bisect a sign change of fn inside [a, b] (sa = sign at a) down to width
/// `tol`; returns the midpoint of the final bracket.
inline double bisect_sign_change(const std::function<double(double)>& fn, double a, double b,
                                 int sa, double tol) {
    while (b - a > tol) {
        double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;  // bracket at representable resolution
        int sm = sign_of(fn(m));
        if (sm == 0) return m;
        if (sm == sa) a = m;
        else b = m;
    }
    return 0.5 * (a + b);
}

}  // namespace detail

/// Scan grid_n+1 uniform samples of the derivative over [lo, hi]; refine
/// each interior sign change by bisection. Returns the interior critical
/// points in ascending order; interval endpoints are handled by
/// build_well_catalog, not here.
inline std::vector<CriticalPoint> find_critical_points(const Landscape& l, int grid_n = 100000,
                                                       double tol = 1e-10) {
    if (grid_n < 1) throw CatalogError("grid_n must be >= 1");
    if (!(tol > 0.0)) throw CatalogError("tol must be > 0");

    const double step = (l.hi - l.lo) / grid_n;
    std::vector<CriticalPoint> out;

    std::vector<int> signs(static_cast<std::size_t>(grid_n) + 1);
    std::vector<double> xs(static_cast<std::size_t>(grid_n) + 1);
    for (int i = 0; i <= grid_n; ++i) {
        xs[i] = (i == grid_n) ? l.hi : l.lo + i * step;
        double d = l.deriv(xs[i]);
        if (!std::isfinite(d))
            throw CatalogError("derivative is not finite at x = " + std::to_string(xs[i]));
        signs[i] = detail::sign_of(d);
    }

    for (int i = 0; i < grid_n; ++i) {
        if (signs[i] == 0) {
            if (i == 0) continue;  // endpoint zeros belong to the boundary logic
            if (signs[i + 1] == 0)
                throw CatalogError(
                    "derivative vanishes on a whole grid segment near x = " +
                    std::to_string(xs[i]) + "; unsupported landscape (flat region)");
            int before = signs[i - 1];
            int after = signs[i + 1];
            if (before > 0 && after < 0) out.push_back({xs[i], CritKind::maximum});
            else if (before < 0 && after > 0) out.push_back({xs[i], CritKind::minimum});
            // equal signs: a zero-derivative touch, not an extremum
            continue;
        }
        if (signs[i + 1] == 0 || signs[i + 1] == signs[i]) continue;
        double x = detail::bisect_sign_change(l.deriv, xs[i], xs[i + 1], signs[i], tol);
        out.push_back({x, signs[i] > 0 ? CritKind::maximum : CritKind::minimum});
    }
    return out;
}

// --- well catalog ----------------------------------------------------------

/// One basin: the open interval between two adjacent maxima (or an interval
/// edge standing in for one), with the unique minimum it drains to.
struct Well {
    int index = 0;
    double center = 0.0;     // minimum location
    double min_value = 0.0;  // value at the minimum
    double left = 0.0;
    double right = 0.0;
    double width = 0.0;
    double depth = 0.0;      // min(value(left), value(right)) - min_value
    int type = 0;
};

struct WellType {
    int label = 0;
    int count = 0;
    double mean_width = 0.0;
    double mean_depth = 0.0;
};

struct WellCatalog {
    double interval_lo = 0.0;  // landscape interval; escapes are judged here
    double interval_hi = 0.0;
    double coverage_lo = 0.0;  // outermost well boundaries after clip/snap
    double coverage_hi = 0.0;
    std::vector<Well> wells;
    std::vector<WellType> types;
    std::vector<std::string> warnings;
};

namespace detail {

// Absolute tolerance for grouping wells into types by (width, depth).
inline constexpr double kTypeTol = 1e-3;
// How far beyond an interval endpoint we look for the true bounding maximum
// when the outermost interior critical point is a minimum.
inline constexpr double kBoundarySnap = 1e-2;
// Endpoint adjustments larger than this get a warning.
inline constexpr double kEdgeQuiet = 1e-8;

/// Search from `from` toward `to` (either direction) for the nearest
/// critical point of l, and return it if it is a maximum. Used only to
/// resolve interval endpoints that sit near but not exactly on a bounding
/// maximum.
inline std::optional<double> nearest_maximum(const Landscape& l, double from, double to,
                                             double cell, double tol) {
    int n = std::max(2, static_cast<int>(std::ceil(std::fabs(to - from) / cell)));
    double step = (to - from) / n;
    double x0 = from;
    int s0 = sign_of(l.deriv(x0));
    for (int i = 1; i <= n; ++i) {
        double x1 = (i == n) ? to : from + i * step;
        int s1 = sign_of(l.deriv(x1));
        if (s0 != 0 && s1 != 0 && s0 != s1) {
            double a = std::min(x0, x1), b = std::max(x0, x1);
            int sa = (x0 < x1) ? s0 : s1;
            double m = bisect_sign_change(l.deriv, a, b, sa, tol);
            // a maximum has derivative going + -> - left to right
            return sa > 0 ? std::optional<double>(m) : std::nullopt;
        }
        if (s1 == 0 && s0 != 0) {
            // grid point sitting on the critical point itself
            double probe = x1 + 0.5 * step;
            int after = sign_of(l.deriv(probe));
            int left_sign = (to > from) ? s0 : after;
            int right_sign = (to > from) ? after : s0;
            return (left_sign > 0 && right_sign < 0) ? std::optional<double>(x1) : std::nullopt;
        }
        x0 = x1;
        s0 = s1;
    }
    return std::nullopt;
}

inline std::string edge_warning(const char* what, double endpoint, double boundary) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s endpoint %.12g is not a maximum; %s %.12g", what,
                  endpoint, "basin boundary placed at", boundary);
    return buf;
}

}  // namespace detail

/// Build the well catalog for a landscape.
///
/// The interval endpoints are expected to be maxima of the function. When
/// one is not, the catalog warns and adjusts: if a true maximum lies within
/// a small snap distance (outside or inside), the outermost well closes at
/// that maximum; otherwise, if the outermost interior critical point is a
/// maximum, the uncovered sliver is clipped away (flow from it exits the
/// interval); otherwise the endpoint itself stands in as the boundary.
inline WellCatalog build_well_catalog(const Landscape& l, int grid_n = 100000,
                                      double tol = 1e-10) {
    auto crit = find_critical_points(l, grid_n, tol);

    WellCatalog cat;
    cat.interval_lo = l.lo;
    cat.interval_hi = l.hi;

    long n_min = std::count_if(crit.begin(), crit.end(),
                               [](const CriticalPoint& c) { return c.kind == CritKind::minimum; });
    if (n_min < 1)
        throw CatalogError("fewer than one minimum found on [" + std::to_string(l.lo) + ", " +
                           std::to_string(l.hi) + "]");
    for (std::size_t i = 1; i < crit.size(); ++i)
        if (crit[i].kind == crit[i - 1].kind)
            throw CatalogError("non-alternating min/max sequence near x = " +
                               std::to_string(crit[i].x));

    const double cell = (l.hi - l.lo) / grid_n;
    std::vector<double> boundaries;
    std::size_t first = 0, last = crit.size();  // crit[first, last) = interior points

    // left edge
    if (crit.front().kind == CritKind::maximum) {
        boundaries.push_back(crit.front().x);
        ++first;
        if (crit.front().x - l.lo > detail::kEdgeQuiet)
            cat.warnings.push_back(detail::edge_warning("left", l.lo, crit.front().x));
    } else {
        auto m = detail::nearest_maximum(l, l.lo, l.lo - detail::kBoundarySnap, cell, tol);
        double edge = m.value_or(l.lo);
        boundaries.push_back(edge);
        if (!m || l.lo - edge > detail::kEdgeQuiet)
            cat.warnings.push_back(detail::edge_warning("left", l.lo, edge));
    }

    // right edge
    double right_edge;
    std::optional<std::string> right_warn;
    if (crit.back().kind == CritKind::maximum) {
        right_edge = crit.back().x;
        --last;
        if (l.hi - crit.back().x > detail::kEdgeQuiet)
            right_warn = detail::edge_warning("right", l.hi, crit.back().x);
    } else {
        auto m = detail::nearest_maximum(l, l.hi, l.hi + detail::kBoundarySnap, cell, tol);
        right_edge = m.value_or(l.hi);
        if (!m || right_edge - l.hi > detail::kEdgeQuiet)
            right_warn = detail::edge_warning("right", l.hi, right_edge);
    }

    std::vector<CriticalPoint> interior(crit.begin() + first, crit.begin() + last);
    for (const auto& c : interior)
        if (c.kind == CritKind::maximum) boundaries.push_back(c.x);
    boundaries.push_back(right_edge);
    if (right_warn) cat.warnings.push_back(*right_warn);

    std::vector<double> minima;
    for (const auto& c : interior)
        if (c.kind == CritKind::minimum) minima.push_back(c.x);

    if (minima.size() + 1 != boundaries.size())
        throw CatalogError("non-alternating min/max sequence (boundary/minimum count mismatch)");

    for (std::size_t i = 0; i < minima.size(); ++i) {
        if (!(boundaries[i] < minima[i] && minima[i] < boundaries[i + 1]))
            throw CatalogError("non-alternating min/max sequence near x = " +
                               std::to_string(minima[i]));
        Well w;
        w.index = static_cast<int>(i);
        w.center = minima[i];
        w.min_value = l.value(w.center);
        w.left = boundaries[i];
        w.right = boundaries[i + 1];
        w.width = w.right - w.left;
        w.depth = std::min(l.value(w.left), l.value(w.right)) - w.min_value;
        if (!(w.width > 0.0) || !(w.depth > 0.0))
            throw CatalogError("degenerate well around x = " + std::to_string(w.center));
        cat.wells.push_back(w);
    }

    // type labels: group wells whose (width, depth) agree within kTypeTol
    // with the first member of an existing group; labels in order of first
    // appearance, left to right
    std::vector<std::pair<double, double>> reps;  // (width, depth) of first member
    for (auto& w : cat.wells) {
        int label = -1;
        for (std::size_t t = 0; t < reps.size(); ++t) {
            if (std::fabs(w.width - reps[t].first) <= detail::kTypeTol &&
                std::fabs(w.depth - reps[t].second) <= detail::kTypeTol) {
                label = static_cast<int>(t);
                break;
            }
        }
        if (label < 0) {
            label = static_cast<int>(reps.size());
            reps.emplace_back(w.width, w.depth);
        }
        w.type = label;
    }
    cat.types.resize(reps.size());
    for (std::size_t t = 0; t < reps.size(); ++t) cat.types[t].label = static_cast<int>(t);
    for (const auto& w : cat.wells) {
        auto& t = cat.types[static_cast<std::size_t>(w.type)];
        ++t.count;
        t.mean_width += w.width;
        t.mean_depth += w.depth;
    }
    for (auto& t : cat.types) {
        t.mean_width /= t.count;
        t.mean_depth /= t.count;
    }

    cat.coverage_lo = cat.wells.front().left;
    cat.coverage_hi = cat.wells.back().right;
    return cat;
}

/// Terminal-position classification. kEscaped for positions outside the
/// landscape interval (and for the clipped slivers a warning reported).
inline constexpr int kEscaped = -1;

inline int locate_basin(const WellCatalog& cat, double x) {
    if (!(x >= cat.interval_lo && x <= cat.interval_hi)) return kEscaped;
    // in-interval but outside the catalog's coverage: a clipped sliver whose
    // flow leaves the interval
    if (cat.wells.empty() || x < cat.wells.front().left || x > cat.wells.back().right)
        return kEscaped;
    if (x == cat.wells.back().right) return static_cast<int>(cat.wells.size()) - 1;
    // last well with left <= x; wells are half-open [left, right)
    std::size_t lo = 0, hi = cat.wells.size() - 1;
    while (lo < hi) {
        std::size_t mid = (lo + hi + 1) / 2;
        if (cat.wells[mid].left <= x) lo = mid;
        else hi = mid - 1;
    }
    return static_cast<int>(lo);
}

// --- step-size bound --------------------------------------------------------

/// The heuristic descent regime 0 < tau < w / g_bar: mean well width over
/// mean |derivative| on the interval (composite midpoint rule).
struct TauBound {
    double mean_width = 0.0;
    double mean_gradient = 0.0;
    double bound = 0.0;
};

inline TauBound tau_bound(const Landscape& l, const WellCatalog& cat, long quad_n = 100000) {
    if (quad_n < 1) throw CatalogError("quad_n must be >= 1");
    TauBound r;
    for (const auto& w : cat.wells) r.mean_width += w.width;
    r.mean_width /= static_cast<double>(cat.wells.size());
    const double h = (l.hi - l.lo) / static_cast<double>(quad_n);
    double acc = 0.0;
    for (long i = 0; i < quad_n; ++i) {
        double x = l.lo + (static_cast<double>(i) + 0.5) * h;
        acc += std::fabs(l.deriv(x));
    }
    r.mean_gradient = acc / static_cast<double>(quad_n);
    r.bound = r.mean_width / r.mean_gradient;
    return r;
}

}  // namespace basinlab

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "basinlab/dynamics.hpp"
#include "basinlab/parallel.hpp"

namespace basinlab {

/// Where the objective comes from: a builtin name, or an expression with a
/// user-supplied interval. Kept as text so configs round-trip.
struct LandscapeSpec {
    std::string function = "two_depths";
    std::optional<std::pair<double, double>> interval;

    Landscape resolve() const {
        if (auto b = builtin_by_name(function)) {
            Landscape l = builtin(*b);
            if (interval) {
                l.lo = interval->first;
                l.hi = interval->second;
                if (!(l.lo < l.hi)) throw ConfigError("interval must satisfy lo < hi");
            }
            return l;
        }
        if (!interval)
            throw ConfigError("an explicit --interval is required for expression landscapes");
        return expression_landscape(function, interval->first, interval->second);
    }
};

struct ExperimentConfig {
    LandscapeSpec landscape;
    double tau = 0.01;
    double eps = 0.0;
    int max_steps = 5000;
    long trials = 20000;
    std::uint64_t seed = 42;  // published default so stock runs reproduce
    bool flow = true;         // use flow mode (early stop) when eps == 0
    std::optional<std::pair<int, int>> ratio_types;  // explicit (disfavored, favored)

    void validate() const {
        if (!(tau > 0.0)) throw ConfigError("tau must be > 0");
        if (eps < 0.0) throw ConfigError("eps must be >= 0");
        if (max_steps < 1) throw ConfigError("steps must be >= 1");
        if (trials < 1) throw ConfigError("trials must be >= 1");
    }
};

struct ExperimentResult {
    long trials = 0;
    std::vector<long> counts;  // aligned with catalog wells
    long escaped = 0;
    long in_interval = 0;
    std::vector<long> type_totals;  // aligned with catalog types
    int disfavored_type = 0;
    int favored_type = 0;
    std::optional<double> ratio_per_well;  // the paper-style r
    std::optional<double> ratio_total;
};

/// (disfavored, favored) type labels for the ratio r: the shallower type
/// when depths differ, else the narrower; fully tied types fall back to the
/// type of the leftmost well. Requires exactly two types unless the caller
/// designates the pair explicitly.
inline std::pair<int, int> type_ordering(const WellCatalog& cat) {
    if (cat.types.size() != 2)
        throw CatalogError("landscape has " + std::to_string(cat.types.size()) +
                           " well type(s); designate disfavored/favored types explicitly");
    const WellType& t0 = cat.types[0];
    const WellType& t1 = cat.types[1];
    int disfavored;
    if (std::fabs(t0.mean_depth - t1.mean_depth) > detail::kTypeTol)
        disfavored = t0.mean_depth < t1.mean_depth ? 0 : 1;
    else if (std::fabs(t0.mean_width - t1.mean_width) > detail::kTypeTol)
        disfavored = t0.mean_width < t1.mean_width ? 0 : 1;
    else
        disfavored = cat.wells.front().type;
    return {disfavored, 1 - disfavored};
}

/// Basin-measure prediction of the flow-mode r: mean disfavored width over
/// mean favored width.
inline double flow_ratio_prediction(const WellCatalog& cat) {
    auto [dis, fav] = type_ordering(cat);
    return cat.types[static_cast<std::size_t>(dis)].mean_width /
           cat.types[static_cast<std::size_t>(fav)].mean_width;
}

/// Monte-Carlo experiment: trial i draws its start uniformly on [lo, hi]
/// from the substream (seed, i), descends, and tallies its terminal well.
/// The tally is a pure function of (config, seed) for any thread count.
/// Ratios are conditioned on the trials that end inside the interval.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const Landscape& l,
                                       const WellCatalog& cat, int threads = 1) {
    cfg.validate();
    const std::size_t n_wells = cat.wells.size();
    const bool flow_mode = cfg.eps == 0.0 && cfg.flow;

    threads = std::max(1, threads);
    std::vector<std::vector<long>> local(static_cast<std::size_t>(threads),
                                         std::vector<long>(n_wells + 1, 0));
    parallel_slices(cfg.trials, threads, [&](int worker, long begin, long end) {
        auto& tally = local[static_cast<std::size_t>(worker)];
        for (long i = begin; i < end; ++i) {
            RngStream s = RngStream::derive(cfg.seed, static_cast<std::uint64_t>(i));
            double p0 = s.uniform(l.lo, l.hi);
            TrialOutcome o = flow_mode
                                 ? gradient_flow(l, cat, p0, cfg.tau, kFlowGradTol, cfg.max_steps)
                                 : run_trajectory(l, cat, p0, cfg.tau, cfg.eps, cfg.max_steps, s);
            if (o.well == kEscaped) ++tally[n_wells];
            else ++tally[static_cast<std::size_t>(o.well)];
        }
    });

    ExperimentResult res;
    res.trials = cfg.trials;
    res.counts.assign(n_wells, 0);
    for (const auto& tally : local) {
        for (std::size_t w = 0; w < n_wells; ++w) res.counts[w] += tally[w];
        res.escaped += tally[n_wells];
    }
    res.in_interval = res.trials - res.escaped;

    res.type_totals.assign(cat.types.size(), 0);
    for (std::size_t w = 0; w < n_wells; ++w)
        res.type_totals[static_cast<std::size_t>(cat.wells[w].type)] += res.counts[w];

    auto ordering = cfg.ratio_types ? *cfg.ratio_types : type_ordering(cat);
    if (ordering.first < 0 || ordering.second < 0 ||
        ordering.first >= static_cast<int>(cat.types.size()) ||
        ordering.second >= static_cast<int>(cat.types.size()) ||
        ordering.first == ordering.second)
        throw ConfigError("invalid disfavored/favored type designation");
    res.disfavored_type = ordering.first;
    res.favored_type = ordering.second;

    long dis_total = res.type_totals[static_cast<std::size_t>(res.disfavored_type)];
    long fav_total = res.type_totals[static_cast<std::size_t>(res.favored_type)];
    long dis_wells = cat.types[static_cast<std::size_t>(res.disfavored_type)].count;
    long fav_wells = cat.types[static_cast<std::size_t>(res.favored_type)].count;
    if (fav_total > 0) {
        // undefined (not zero, not infinity) when no favored-type hits exist
        res.ratio_total = static_cast<double>(dis_total) / static_cast<double>(fav_total);
        res.ratio_per_well = (static_cast<double>(dis_total) / static_cast<double>(dis_wells)) /
                             (static_cast<double>(fav_total) / static_cast<double>(fav_wells));
    }
    return res;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 1) {
    Landscape l = cfg.landscape.resolve();
    WellCatalog cat = build_well_catalog(l);
    return run_experiment(cfg, l, cat, threads);
}

struct HistogramRow {
    int index;
    double center;
    int type;
    long count;
};

inline std::vector<HistogramRow> histogram(const ExperimentResult& res, const WellCatalog& cat) {
    std::vector<HistogramRow> rows;
    rows.reserve(cat.wells.size());
    for (std::size_t w = 0; w < cat.wells.size(); ++w)
        rows.push_back({cat.wells[w].index, cat.wells[w].center, cat.wells[w].type,
                        res.counts[w]});
    return rows;
}

}  // namespace basinlab

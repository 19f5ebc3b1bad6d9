#pragma once

#include <cmath>
#include <cstdio>
#include <ctime>
#include <string>
#include <vector>

#include <json.hpp>

#include "basinlab/ensemble.hpp"
#include "basinlab/sweep.hpp"
#include "basinlab/version.hpp"

namespace basinlab {

using nlohmann::json;

namespace detail {

inline std::string fmt(double v, const char* spec = "%.12g") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

inline std::string fmt_ratio(const std::optional<double>& r) {
    return r ? fmt(*r, "%.6f") : "nan";
}

}  // namespace detail

// --- config <-> json --------------------------------------------------------
//
// Flat keys mirroring the CLI flags, so a manifest's config echo can be fed
// back through --config unchanged.

inline json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["function"] = cfg.landscape.function;
    if (cfg.landscape.interval)
        j["interval"] = {cfg.landscape.interval->first, cfg.landscape.interval->second};
    j["tau"] = cfg.tau;
    j["eps"] = cfg.eps;
    j["steps"] = cfg.max_steps;
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["flow"] = cfg.flow;
    if (cfg.ratio_types) j["ratio_types"] = {cfg.ratio_types->first, cfg.ratio_types->second};
    return j;
}

inline void config_from_json(const json& j, ExperimentConfig& cfg) {
    if (j.contains("function")) cfg.landscape.function = j.at("function").get<std::string>();
    if (j.contains("interval")) {
        auto iv = j.at("interval");
        if (!iv.is_array() || iv.size() != 2)
            throw ConfigError("config: \"interval\" must be [lo, hi]");
        cfg.landscape.interval = {iv[0].get<double>(), iv[1].get<double>()};
    }
    if (j.contains("tau")) cfg.tau = j.at("tau").get<double>();
    if (j.contains("eps")) cfg.eps = j.at("eps").get<double>();
    if (j.contains("steps")) cfg.max_steps = j.at("steps").get<int>();
    if (j.contains("trials")) cfg.trials = j.at("trials").get<long>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("flow")) cfg.flow = j.at("flow").get<bool>();
    if (j.contains("ratio_types")) {
        auto rt = j.at("ratio_types");
        if (!rt.is_array() || rt.size() != 2)
            throw ConfigError("config: \"ratio_types\" must be [disfavored, favored]");
        cfg.ratio_types = {rt[0].get<int>(), rt[1].get<int>()};
    }
}

inline json sweep_config_to_json(const SweepConfig& sc) {
    json j = config_to_json(sc.base);
    j.erase("tau");
    j.erase("eps");
    j["taus"] = sc.taus;
    j["eps_grid"] = {sc.eps_min, sc.eps_max, sc.eps_count};
    j["trials"] = sc.trials_per_cell;
    j["steps"] = sc.steps_per_cell;
    return j;
}

inline void sweep_config_from_json(const json& j, SweepConfig& sc) {
    config_from_json(j, sc.base);
    if (j.contains("taus")) sc.taus = j.at("taus").get<std::vector<double>>();
    if (j.contains("eps_grid")) {
        auto g = j.at("eps_grid");
        if (!g.is_array() || g.size() != 3)
            throw ConfigError("config: \"eps_grid\" must be [min, max, count]");
        sc.eps_min = g[0].get<double>();
        sc.eps_max = g[1].get<double>();
        sc.eps_count = g[2].get<int>();
    }
    if (j.contains("trials")) sc.trials_per_cell = j.at("trials").get<long>();
    if (j.contains("steps")) sc.steps_per_cell = j.at("steps").get<int>();
}

// --- catalog ----------------------------------------------------------------

inline json catalog_to_json(const Landscape& l, const WellCatalog& cat) {
    json wells = json::array();
    for (const auto& w : cat.wells)
        wells.push_back({{"index", w.index},
                         {"center", w.center},
                         {"min_value", w.min_value},
                         {"left", w.left},
                         {"right", w.right},
                         {"width", w.width},
                         {"depth", w.depth},
                         {"type", w.type}});
    json types = json::array();
    for (const auto& t : cat.types)
        types.push_back({{"type", t.label},
                         {"count", t.count},
                         {"mean_width", t.mean_width},
                         {"mean_depth", t.mean_depth}});
    return json{{"function", l.name},
                {"interval", {l.lo, l.hi}},
                {"coverage", {cat.coverage_lo, cat.coverage_hi}},
                {"wells", wells},
                {"types", types},
                {"warnings", cat.warnings}};
}

inline std::string catalog_to_csv(const WellCatalog& cat) {
    std::string out = "index,center,min_value,left,right,width,depth,type\n";
    for (const auto& w : cat.wells) {
        out += std::to_string(w.index) + ',' + detail::fmt(w.center) + ',' +
               detail::fmt(w.min_value) + ',' + detail::fmt(w.left) + ',' +
               detail::fmt(w.right) + ',' + detail::fmt(w.width) + ',' +
               detail::fmt(w.depth) + ',' + std::to_string(w.type) + '\n';
    }
    return out;
}

inline std::string catalog_to_text(const Landscape& l, const WellCatalog& cat) {
    char buf[200];
    std::string out;
    std::snprintf(buf, sizeof buf, "landscape %s on [%.12g, %.12g]: %zu wells, %zu types\n",
                  l.name.c_str(), l.lo, l.hi, cat.wells.size(), cat.types.size());
    out += buf;
    out += "index      center   min_value        left       right       width       depth  type\n";
    for (const auto& w : cat.wells) {
        std::snprintf(buf, sizeof buf, "%5d %11.6f %11.6f %11.6f %11.6f %11.6f %11.6f %5d\n",
                      w.index, w.center, w.min_value, w.left, w.right, w.width, w.depth, w.type);
        out += buf;
    }
    for (const auto& t : cat.types) {
        std::snprintf(buf, sizeof buf,
                      "type %d: %d wells, mean width %.6f, mean depth %.6f\n", t.label, t.count,
                      t.mean_width, t.mean_depth);
        out += buf;
    }
    for (const auto& w : cat.warnings) out += "warning: " + w + "\n";
    return out;
}

// --- experiment results -------------------------------------------------------

inline json result_to_json(const ExperimentConfig& cfg, const WellCatalog& cat,
                           const ExperimentResult& res) {
    json per_type = json::array();
    for (std::size_t t = 0; t < res.type_totals.size(); ++t)
        per_type.push_back({{"type", static_cast<int>(t)}, {"count", res.type_totals[t]}});
    json hist = json::array();
    for (const auto& row : histogram(res, cat))
        hist.push_back({{"index", row.index},
                        {"center", row.center},
                        {"type", row.type},
                        {"count", row.count}});
    json j{{"config", config_to_json(cfg)},
           {"trials", res.trials},
           {"in_interval", res.in_interval},
           {"escaped", res.escaped},
           {"counts", res.counts},
           {"type_totals", per_type},
           {"disfavored_type", res.disfavored_type},
           {"favored_type", res.favored_type},
           {"histogram", hist}};
    j["ratio_per_well"] = res.ratio_per_well ? json(*res.ratio_per_well) : json(nullptr);
    j["ratio_total"] = res.ratio_total ? json(*res.ratio_total) : json(nullptr);
    return j;
}

inline std::string histogram_csv(const ExperimentResult& res, const WellCatalog& cat) {
    std::string out = "index,center,type,count\n";
    for (const auto& row : histogram(res, cat))
        out += std::to_string(row.index) + ',' + detail::fmt(row.center) + ',' +
               std::to_string(row.type) + ',' + std::to_string(row.count) + '\n';
    return out;
}

inline constexpr const char* kSweepCsvHeader =
    "tau,epsilon,trials,in_interval,escaped,ratio_per_well,ratio_total";

inline std::string sweep_csv(const SweepTable& t) {
    std::string out = std::string(kSweepCsvHeader) + '\n';
    for (const auto& r : t.rows) {
        out += detail::fmt(r.tau) + ',' + detail::fmt(r.eps) + ',' + std::to_string(r.trials) +
               ',' + std::to_string(r.in_interval) + ',' + std::to_string(r.escaped) + ',' +
               detail::fmt_ratio(r.ratio_per_well) + ',' + detail::fmt_ratio(r.ratio_total) +
               '\n';
    }
    return out;
}

inline json sweep_to_json(const SweepConfig& sc, const SweepTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows) {
        json row{{"tau", r.tau},
                 {"epsilon", r.eps},
                 {"trials", r.trials},
                 {"in_interval", r.in_interval},
                 {"escaped", r.escaped}};
        row["ratio_per_well"] = r.ratio_per_well ? json(*r.ratio_per_well) : json(nullptr);
        row["ratio_total"] = r.ratio_total ? json(*r.ratio_total) : json(nullptr);
        if (!r.error.empty()) row["error"] = r.error;
        rows.push_back(row);
    }
    return json{{"config", sweep_config_to_json(sc)}, {"rows", rows}};
}

inline std::string trace_csv(const Landscape& l, const TrialOutcome& o) {
    std::string out = "step,position,value,gradient\n";
    for (std::size_t i = 0; i < o.trajectory.size(); ++i) {
        double p = o.trajectory[i];
        out += std::to_string(i) + ',' + detail::fmt(p, "%.17g") + ',' +
               detail::fmt(l.value(p)) + ',' + detail::fmt(l.deriv(p)) + '\n';
    }
    return out;
}

// --- manifest ----------------------------------------------------------------

inline std::string iso_timestamp() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

inline json manifest_json(const json& config_echo, std::uint64_t seed,
                          const std::vector<std::string>& outputs) {
    return json{{"tool", "basinlab"},
                {"version", kVersion},
                {"seed", seed},
                {"timestamp", iso_timestamp()},
                {"config", config_echo},
                {"outputs", outputs}};
}

}  // namespace basinlab

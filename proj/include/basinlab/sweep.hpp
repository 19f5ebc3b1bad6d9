#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "basinlab/ensemble.hpp"

namespace basinlab {

/// Grid experiment over (tau, eps). Defaults follow the histogram/sweep
/// experiment scale: eps from 0 to 0.5 in 26 cells, 1000 trials of 5000
/// steps per cell.
struct SweepConfig {
    ExperimentConfig base;  // landscape, seed, flow flag
    std::vector<double> taus{0.001, 0.01, 0.02, 0.04, 0.06};
    double eps_min = 0.0;
    double eps_max = 0.5;
    int eps_count = 26;
    long trials_per_cell = 1000;
    int steps_per_cell = 5000;

    void validate() const {
        if (taus.empty()) throw ConfigError("sweep needs at least one tau");
        for (double t : taus)
            if (!(t > 0.0)) throw ConfigError("tau must be > 0");
        if (eps_min < 0.0 || eps_max < eps_min) throw ConfigError("bad eps grid");
        if (eps_count < 1) throw ConfigError("eps_count must be >= 1");
        if (trials_per_cell < 1) throw ConfigError("trials must be >= 1");
        if (steps_per_cell < 1) throw ConfigError("steps must be >= 1");
    }

    double eps_at(int i) const {
        if (eps_count == 1) return eps_min;
        return eps_min + (eps_max - eps_min) * i / (eps_count - 1);
    }
};

struct SweepRow {
    double tau = 0.0;
    double eps = 0.0;
    long trials = 0;
    long in_interval = 0;
    long escaped = 0;
    std::optional<double> ratio_per_well;
    std::optional<double> ratio_total;
    std::string error;  // empty on success
};

struct SweepTable {
    std::vector<SweepRow> rows;  // ordered by (tau, eps)
};

/// A cell's trial-stream family is seeded from (master seed, tau, eps) — the
/// cell's identity, not its position — so cells are independent and editing
/// the grid leaves every remaining row bit-identical. Cell failures are
/// recorded in the row, not fatal.
inline std::uint64_t sweep_cell_seed(std::uint64_t master, double tau, double eps) {
    return RngStream::substream_seed(
        RngStream::substream_seed(master, std::bit_cast<std::uint64_t>(tau)),
        std::bit_cast<std::uint64_t>(eps));
}

inline SweepTable run_sweep(const SweepConfig& sc, int threads = 1) {
    sc.validate();
    std::vector<double> taus = sc.taus;
    std::sort(taus.begin(), taus.end());

    Landscape l = sc.base.landscape.resolve();
    WellCatalog cat = build_well_catalog(l);

    SweepTable table;
    for (double tau : taus) {
        for (int e = 0; e < sc.eps_count; ++e) {
            SweepRow row;
            row.tau = tau;
            row.eps = sc.eps_at(e);
            row.trials = sc.trials_per_cell;
            ExperimentConfig cfg = sc.base;
            cfg.tau = tau;
            cfg.eps = row.eps;
            cfg.trials = sc.trials_per_cell;
            cfg.max_steps = sc.steps_per_cell;
            cfg.seed = sweep_cell_seed(sc.base.seed, tau, row.eps);
            try {
                ExperimentResult res = run_experiment(cfg, l, cat, threads);
                row.in_interval = res.in_interval;
                row.escaped = res.escaped;
                row.ratio_per_well = res.ratio_per_well;
                row.ratio_total = res.ratio_total;
            } catch (const std::exception& ex) {
                row.error = ex.what();
            }
            table.rows.push_back(row);
        }
    }
    return table;
}

/// Noise-induced bias signature per tau: the widest contiguous run of eps
/// cells whose r sits below `threshold`. Width counts cells times grid
/// spacing, so a single qualifying cell has nonzero width; no qualifying
/// cell gives width 0 and no onset. Cells with undefined r break a run.
struct GapMetrics {
    double tau = 0.0;
    double width = 0.0;
    std::optional<double> onset;  // left edge (eps of the first cell in the gap)
};

inline std::vector<GapMetrics> gap_metrics(const SweepTable& t, double threshold = 0.1) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ConfigError("gap threshold must be in (0, 1)");
    std::vector<GapMetrics> out;
    std::size_t i = 0;
    while (i < t.rows.size()) {
        std::size_t j = i;
        while (j < t.rows.size() && t.rows[j].tau == t.rows[i].tau) ++j;
        double spacing = (j - i > 1) ? t.rows[i + 1].eps - t.rows[i].eps : 0.0;
        GapMetrics gm;
        gm.tau = t.rows[i].tau;
        std::size_t run_len = 0, best_len = 0, best_start = 0;
        for (std::size_t k = i; k < j; ++k) {
            bool in_gap = t.rows[k].ratio_per_well && *t.rows[k].ratio_per_well < threshold &&
                          t.rows[k].error.empty();
            if (!in_gap) {
                run_len = 0;
                continue;
            }
            ++run_len;
            if (run_len > best_len) {
                best_len = run_len;
                best_start = k + 1 - run_len;
            }
        }
        if (best_len > 0) {
            gm.width = static_cast<double>(best_len) * spacing;
            gm.onset = t.rows[best_start].eps;
        }
        out.push_back(gm);
        i = j;
    }
    return out;
}

}  // namespace basinlab

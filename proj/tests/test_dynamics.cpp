#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "basinlab/dynamics.hpp"

using namespace basinlab;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double pi = std::numbers::pi;

struct Fixture {
    Landscape f = builtin(BuiltinLandscape::two_depths);
    Landscape g = builtin(BuiltinLandscape::two_widths);
    WellCatalog fc = build_well_catalog(f);
    WellCatalog gc = build_well_catalog(g);
};

const Fixture& fx() {
    static Fixture f;
    return f;
}

// chi-square 0.99 quantiles for dof 1..13
constexpr double kChi2_99[] = {6.635,  9.210,  11.345, 13.277, 15.086, 16.812, 18.475,
                               20.090, 21.666, 23.209, 24.725, 26.217, 27.688};

}  // namespace

TEST_CASE("jitter_step with no noise is plain descent") {
    RngStream s = RngStream::derive(1, 1);
    // derivative vanishes at a minimum: fixed point
    CHECK_THAT(jitter_step(fx().f, 1.5, 0.01, 0.0, s), WithinAbs(1.5, 1e-14));
    // f'(1) = -pi, so one step from 1.0 moves to 1 + 0.01 pi
    CHECK_THAT(jitter_step(fx().f, 1.0, 0.01, 0.0, s), WithinAbs(1.0 + 0.01 * pi, 1e-14));
}

TEST_CASE("jitter_step noise is a bounded kick with the configured spread") {
    RngStream s = RngStream::derive(42, 5);
    const double p = 1.0, tau = 0.01, eps = 0.15;
    RngStream quiet = RngStream::derive(0, 0);
    const double base = jitter_step(fx().f, p, tau, 0.0, quiet);
    const int n = 100000;
    double sum = 0.0, sq = 0.0, biggest = 0.0;
    for (int i = 0; i < n; ++i) {
        double d = jitter_step(fx().f, p, tau, eps, s) - base;
        sum += d;
        sq += d * d;
        biggest = std::max(biggest, std::fabs(d));
    }
    double mean = sum / n;
    CHECK_THAT(mean, WithinAbs(0.0, 0.002));
    // uniform on [-eps, eps]: standard deviation eps/sqrt(3), support bounded
    CHECK_THAT(std::sqrt(sq / n - mean * mean), WithinAbs(eps / std::sqrt(3.0), 0.002));
    CHECK(biggest <= eps);
    CHECK(biggest > 0.99 * eps);
}

TEST_CASE("run_trajectory with eps 0 stays at a minimum") {
    RngStream s = RngStream::derive(2, 2);
    TrialOutcome o = run_trajectory(fx().f, fx().fc, 1.5, 0.01, 0.0, 100, s);
    CHECK(o.steps == 100);  // the jitter path never stops early
    CHECK_THAT(o.position, WithinAbs(1.5, 1e-12));
    CHECK(o.well == 7);
}

TEST_CASE("trajectory from inside the shallow basin lands at its minimum") {
    RngStream s = RngStream::derive(2, 3);
    // 0.3 lies in the shallow basin (0.0804, 0.9196)
    TrialOutcome o = run_trajectory(fx().f, fx().fc, 0.3, 0.01, 0.0, 1000, s);
    CHECK(o.well == locate_basin(fx().fc, 0.3));
    CHECK_THAT(o.position, WithinAbs(0.5, 1e-6));

    // oracle: dense Euler integration with a 1000x smaller step
    double p = 0.3;
    for (int i = 0; i < 2000000 && std::fabs(fx().f.deriv(p)) > 1e-10; ++i)
        p -= 1e-5 * fx().f.deriv(p);
    CHECK(locate_basin(fx().fc, p) == o.well);
    CHECK_THAT(p, WithinAbs(o.position, 1e-4));
}

TEST_CASE("recording captures every position") {
    RngStream s = RngStream::derive(3, 3);
    TrialOutcome o = run_trajectory(fx().f, fx().fc, 0.3, 0.01, 0.1, 50, s, true);
    REQUIRE(o.trajectory.size() == 51);  // p0 plus 50 steps
    CHECK(o.trajectory.front() == 0.3);
    CHECK(o.trajectory.back() == o.position);
}

TEST_CASE("eps 0 determinism") {
    RngStream s1 = RngStream::derive(4, 4), s2 = RngStream::derive(4, 4);
    TrialOutcome a = run_trajectory(fx().f, fx().fc, -2.2, 0.02, 0.0, 500, s1, true);
    TrialOutcome b = run_trajectory(fx().f, fx().fc, -2.2, 0.02, 0.0, 500, s2, true);
    REQUIRE(a.trajectory.size() == b.trajectory.size());
    for (std::size_t i = 0; i < a.trajectory.size(); ++i)
        REQUIRE(a.trajectory[i] == b.trajectory[i]);
}

TEST_CASE("noisy trajectories are reproducible per stream identity") {
    RngStream s1 = RngStream::derive(6, 9), s2 = RngStream::derive(6, 9);
    TrialOutcome a = run_trajectory(fx().f, fx().fc, 0.0, 0.01, 0.2, 400, s1, true);
    TrialOutcome b = run_trajectory(fx().f, fx().fc, 0.0, 0.01, 0.2, 400, s2, true);
    REQUIRE(a.trajectory == b.trajectory);
}

TEST_CASE("diverged trials are cut off and escape") {
    Landscape steep = fx().f;
    Landscape base = builtin(BuiltinLandscape::two_depths);
    steep.deriv = [base](double x) { return 1e9 * base.deriv(x); };
    RngStream s = RngStream::derive(5, 5);
    TrialOutcome o = run_trajectory(steep, fx().fc, 1.0, 1.0, 0.0, 1000, s);
    CHECK(o.well == kEscaped);
    CHECK(o.steps < 1000);
}

TEST_CASE("gradient_flow converges inside the deep basin") {
    TrialOutcome o = gradient_flow(fx().f, fx().fc, 1.1, 0.01, 1e-8, 100000);
    CHECK_THAT(o.position, WithinAbs(1.5, 1e-6));
    CHECK(o.well == 7);
    CHECK(o.steps < 100000);  // stopped on the gradient tolerance
}

TEST_CASE("gradient_flow stops immediately at a critical start") {
    double max_loc = fx().fc.wells[3].left;  // an interior maximum
    TrialOutcome o = gradient_flow(fx().f, fx().fc, max_loc, 0.01, 1e-8, 1000);
    CHECK(o.steps == 0);
    CHECK(o.position == max_loc);
    CHECK(o.well == 3);  // boundaries belong to the well on their right
}

TEST_CASE("fixed-point property: any point with a tiny gradient is terminal") {
    RngStream s = RngStream::derive(12, 0);
    for (int i = 0; i < 50; ++i) {
        const Well& w = fx().fc.wells[static_cast<std::size_t>(
            s.next_u64() % fx().fc.wells.size())];
        TrialOutcome o = gradient_flow(fx().f, fx().fc, w.center, 0.01, 1e-6, 1000);
        CHECK(o.steps == 0);
        CHECK(o.position == w.center);
    }
}

TEST_CASE("flow on two_widths reaches the narrow well slowly") {
    TrialOutcome o = gradient_flow(fx().g, fx().gc, 0.2, 0.01, 1e-8, 100000);
    CHECK(o.well == 2);  // the narrow well at 0
    CHECK_THAT(o.position, WithinAbs(0.0, 1e-6));
    // near the flat wide-well minima the derivative vanishes to fifth order:
    // 1000 steps land close but the gradient tolerance needs many more
    TrialOutcome slow = gradient_flow(fx().g, fx().gc, 0.8, 0.01, 1e-8, 1000);
    CHECK(slow.well == 3);
    CHECK(slow.steps == 1000);
    CHECK_THAT(slow.position, WithinAbs(1.0, 0.1));
}

TEST_CASE("basin correctness: eps 0 descent never hops basins at tau 0.01") {
    for (bool use_g : {false, true}) {
        const Landscape& l = use_g ? fx().g : fx().f;
        const WellCatalog& cat = use_g ? fx().gc : fx().fc;
        RngStream starts = RngStream::derive(77, use_g ? 1 : 0);
        for (int i = 0; i < 1000; ++i) {
            double p0 = starts.uniform(l.lo, l.hi);
            TrialOutcome o = gradient_flow(l, cat, p0, 0.01, 1e-8, 2000);
            INFO((use_g ? "g" : "f") << " p0 = " << p0);
            REQUIRE(o.well == locate_basin(cat, p0));
        }
    }
}

TEST_CASE("noise symmetry: negated noise leaves terminal tallies unchanged") {
    const Landscape& f = fx().f;
    const WellCatalog& cat = fx().fc;
    const int trials = 20000, steps = 300;
    const double tau = 0.01, eps = 0.15;

    std::vector<long> tally_a(cat.wells.size() + 1, 0), tally_b(cat.wells.size() + 1, 0);
    for (int i = 0; i < trials; ++i) {
        RngStream sa = RngStream::derive(1001, i);
        double p0 = sa.uniform(f.lo, f.hi);
        TrialOutcome o = run_trajectory(f, cat, p0, tau, eps, steps, sa);
        ++tally_a[o.well == kEscaped ? cat.wells.size() : o.well];

        // same trial with the stream's kick output negated
        RngStream sb = RngStream::derive(1001, i);
        double q = sb.uniform(f.lo, f.hi);
        for (int t = 0; t < steps; ++t) {
            q = q - tau * f.deriv(q) + sb.kick(eps);
            if (!std::isfinite(q) || std::fabs(q) > kDivergenceBound) break;
        }
        int wb = locate_basin(cat, q);
        ++tally_b[wb == kEscaped ? cat.wells.size() : wb];
    }

    // two-sample chi-square across bins, merging sparse ones
    double chi2 = 0.0;
    int bins = 0;
    long rest_a = 0, rest_b = 0;
    for (std::size_t k = 0; k < tally_a.size(); ++k) {
        long o1 = tally_a[k], o2 = tally_b[k];
        if (o1 + o2 < 10) {
            rest_a += o1;
            rest_b += o2;
            continue;
        }
        chi2 += static_cast<double>((o1 - o2) * (o1 - o2)) / static_cast<double>(o1 + o2);
        ++bins;
    }
    if (rest_a + rest_b > 0) {
        chi2 += static_cast<double>((rest_a - rest_b) * (rest_a - rest_b)) /
                static_cast<double>(rest_a + rest_b);
        ++bins;
    }
    REQUIRE(bins >= 2);
    REQUIRE(bins <= 14);
    INFO("chi2 = " << chi2 << " with " << bins - 1 << " dof");
    CHECK(chi2 < kChi2_99[bins - 2]);
}

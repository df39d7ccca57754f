#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "sicover/sampler.hpp"

using namespace sicover;

namespace {

SampleConfig ball_cfg(double lambda, int depth, uint64_t seed = 11) {
    SampleConfig sc;
    sc.measure = ball_model(2);
    sc.lambda = lambda;
    sc.depth = depth;
    sc.window = AxisBox::unit(2);
    sc.seed = seed;
    return sc;
}

}  // namespace

TEST_CASE("sampler determinism: same seed, bit-identical realization") {
    auto cfg = ball_cfg(0.7, 5);
    auto r1 = sample_process(cfg, 3);
    auto r2 = sample_process(cfg, 3);
    REQUIRE(r1.total_count() == r2.total_count());
    for (size_t b = 0; b < r1.bands.size(); ++b)
        for (size_t i = 0; i < r1.bands[b].size(); ++i) {
            CHECK(r1.bands[b][i].rho == r2.bands[b][i].rho);
            CHECK(r1.bands[b][i].pos[0] == r2.bands[b][i].pos[0]);
            CHECK(r1.bands[b][i].pos[1] == r2.bands[b][i].pos[1]);
            CHECK(r1.bands[b][i].mark == r2.bands[b][i].mark);
        }
    auto r3 = sample_process(cfg, 4);
    CHECK(r1.total_count() != r3.total_count());  // different replicate stream
}

TEST_CASE("lambda zero: exactly empty") {
    auto cfg = ball_cfg(0.0, 4);
    CHECK(sample_process(cfg, 0).total_count() == 0);
}

TEST_CASE("zero-volume atoms are rejected") {
    SampleConfig cfg;
    cfg.measure = loop_soup_reference();
    cfg.lambda = 1;
    cfg.depth = 3;
    CHECK_THROWS_AS(sample_process(cfg, 0), std::invalid_argument);
}

TEST_CASE("band diameters live in their bands") {
    auto cfg = ball_cfg(1.0, 6);
    auto r = sample_process(cfg, 0);
    for (int l = 1; l <= 6; ++l)
        for (const auto& g : r.bands[size_t(l - 1)]) {
            CHECK(g.rho >= std::pow(2.0, -l));
            CHECK(g.rho < std::pow(2.0, -l + 1));
        }
}

TEST_CASE("empirical band counts match the exact Poisson means") {
    auto cfg = ball_cfg(0.4, 5, 99);
    const long reps = 2000;
    std::vector<double> sums(5, 0.0);
    for (long rep = 0; rep < reps; ++rep) {
        auto r = sample_process(cfg, uint64_t(rep));
        for (int l = 1; l <= 5; ++l) sums[size_t(l - 1)] += double(r.bands[size_t(l - 1)].size());
    }
    for (int l = 1; l <= 5; ++l) {
        const double mean = expected_band_count(cfg, l);
        // independent oracle for the band mass (Simpson on the diameter kernel)
        const double mass = oracles::simpson([&](double rho) { return std::pow(rho, -3.0); },
                                             std::pow(2.0, -l), std::pow(2.0, -l + 1));
        const double win = cfg.window.enlarged(cfg.band_margin(l)).volume();
        CHECK(mean ==
              doctest::Approx(cfg.lambda * ball_radius_kernel_weight(2) * mass * win).epsilon(1e-9));
        const double emp = sums[size_t(l - 1)] / double(reps);
        const double se = std::sqrt(mean / double(reps));  // Poisson variance = mean
        CHECK(std::abs(emp - mean) < 3.2 * se);
    }
}

TEST_CASE("scale invariance: band mean in a rescaled window equals band one") {
    auto cfg = ball_cfg(0.8, 6);
    for (int l = 2; l <= 6; ++l) {
        SampleConfig scaled = cfg;
        const double s = std::pow(2.0, -(l - 1));
        scaled.window = AxisBox::unit(2);
        scaled.window.hi = Vec(s, s);
        CHECK(expected_band_count(scaled, l) ==
              doctest::Approx(expected_band_count(cfg, 1)).epsilon(1e-12));
    }
}

TEST_CASE("thinning: identity, halving, subset") {
    auto cfg = ball_cfg(1.2, 5, 17);
    auto r = sample_process(cfg, 0);
    auto same = thin_process(r, 1.2);
    CHECK(same.total_count() == r.total_count());
    CHECK_THROWS_AS(thin_process(r, 2.0), std::invalid_argument);

    const long reps = 3000;
    double kept = 0, total = 0;
    for (long rep = 0; rep < reps; ++rep) {
        auto rr = sample_process(cfg, uint64_t(rep));
        auto th = thin_process(rr, 0.6);
        kept += double(th.total_count());
        total += double(rr.total_count());
        // subset property: every retained set appears in the parent band list
        for (size_t b = 0; b < th.bands.size(); ++b)
            for (const auto& g : th.bands[b]) CHECK(g.mark < 0.5);
    }
    const double ratio = kept / total;
    CHECK(std::abs(ratio - 0.5) < 0.01);
    // iterated thinning composes: thin to 0.6 then 0.3 equals thin to 0.3
    auto t1 = thin_process(thin_process(r, 0.6), 0.3);
    auto t2 = thin_process(r, 0.3);
    CHECK(t1.total_count() == t2.total_count());
}

TEST_CASE("edge correction: banded margins match blanket margins") {
    // Statistics of window-intersecting sets are unchanged when sampling on a
    // larger enlargement and discarding.
    auto count_hits = [](const SampleConfig& cfg, long reps) {
        double acc = 0;
        AxisBox win = cfg.window;
        for (long rep = 0; rep < reps; ++rep) {
            auto r = sample_process(cfg, uint64_t(rep));
            r.for_each([&](const PlacedSet& g) { acc += touches_box(g, win) ? 1 : 0; });
        }
        return acc / double(reps);
    };
    auto banded = ball_cfg(0.5, 4, 2024);
    auto blanket = banded;
    blanket.exact_band_margins = false;
    auto wide = banded;
    wide.exact_band_margins = false;
    wide.anchor_margin = 2.0;
    const long reps = 1500;
    double h1 = count_hits(banded, reps), h2 = count_hits(blanket, reps), h3 = count_hits(wide, reps);
    const double se = std::sqrt(h1 / double(reps)) * 3.5;
    CHECK(std::abs(h1 - h2) < se);
    CHECK(std::abs(h1 - h3) < se);
}

TEST_CASE("realization dump: header plus one line per set") {
    auto cfg = ball_cfg(0.5, 3);
    auto r = sample_process(cfg, 0);
    std::ostringstream os;
    dump_realization(os, cfg, r);
    std::string text = os.str();
    size_t lines = 0;
    for (char c : text) lines += c == '\n' ? 1 : 0;
    CHECK(lines == r.total_count() + 1);
    CHECK(text.find("\"type\":\"header\"") != std::string::npos);
    CHECK(text.find("\"family\":\"ball-closed\"") != std::string::npos);
}

#include <cmath>
#include <random>

#include "doctest.h"
#include "plisskit/cocycle.hpp"
#include "plisskit/cp.hpp"
#include "plisskit/pliss.hpp"

using namespace plisskit;
using maps::Direction;
using maps::MapBounds;
using maps::MapDescriptor;
using maps::TorusPoint;
using maps::Vec2;

namespace {

constexpr double kLamPlus = 2.618033988749895;
constexpr double kLamMinus = 0.3819660112501051;

MapBounds cat_bounds() {
    return maps::estimate_bounds(MapDescriptor::cat(1), 64);
}

cp::CPConstants cat_constants(double t = 0.96) {
    return cp::schedule_constants({t, std::nullopt, cat_bounds(), 1});
}

TorusPoint rand_point(std::mt19937_64& g) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return {u(g), u(g)};
}

}  // namespace

TEST_CASE("schedule for the cat map at t=0.96 reproduces the formulas") {
    cp::CPConstants c = cat_constants();
    double delta_t = 0.96 * std::log(kLamPlus);
    double s_lo = 3.0 / (4.0 * 0.96);
    double s_hi = (5.0 * 0.96 - 4.0) / 0.96;
    double s = 0.5 * (s_lo + s_hi);
    CHECK(c.t == 0.96);
    CHECK(c.s == doctest::Approx(s).epsilon(1e-14));
    CHECK(c.s_lo == doctest::Approx(s_lo).epsilon(1e-14));
    CHECK(c.s_hi == doctest::Approx(s_hi).epsilon(1e-14));
    CHECK(c.delta_t == doctest::Approx(delta_t).epsilon(1e-13));
    CHECK(c.sigma == doctest::Approx(std::exp(-s * delta_t)).epsilon(1e-13));
    CHECK(c.rho == doctest::Approx(c.sigma * c.sigma).epsilon(1e-14));
    CHECK(c.sigma_t1 == doctest::Approx(kLamMinus).epsilon(1e-13));
    CHECK(c.sigma_t2 == doctest::Approx(1.0 / kLamPlus).epsilon(1e-13));
    CHECK(c.rho_t1 == doctest::Approx(kLamMinus / kLamPlus).epsilon(1e-13));
    CHECK(c.rho_t2 == c.rho_t1);
    CHECK(c.eta ==
          doctest::Approx(1.0 - std::pow(1.0 / c.sigma - c.sigma, 2) /
                                    (2.0 * kLamPlus * kLamPlus))
              .epsilon(1e-13));
    CHECK(c.N == 1);

    // the rounded reference values
    CHECK(c.s == doctest::Approx(0.8072917).epsilon(1e-6));
    CHECK(c.delta_t == doctest::Approx(0.9239267).epsilon(1e-6));
    CHECK(c.sigma == doctest::Approx(0.47432).epsilon(1e-4));
    CHECK(c.rho == doctest::Approx(0.22498).epsilon(1e-4));
    CHECK(c.rho_t1 == doctest::Approx(0.14590).epsilon(1e-4));
    CHECK(c.eta == doctest::Approx(0.80524).epsilon(1e-4));
    double side = c.sigma_t1 * c.rho_t1 / (c.sigma * c.rho);
    CHECK(side == doctest::Approx(0.5222).epsilon(1e-3));
    CHECK(side > c.sigma);
}

TEST_CASE("t gate: the interval is empty at and below 19/20") {
    MapBounds b = cat_bounds();
    CHECK_THROWS_AS(cp::schedule_constants({0.95, std::nullopt, b, 1}), TTooSmall);
    CHECK_THROWS_AS(cp::schedule_constants({19.0 / 20.0, std::nullopt, b, 1}), TTooSmall);
    CHECK_THROWS_AS(cp::schedule_constants({0.2, std::nullopt, b, 1}), TTooSmall);
    CHECK_THROWS_WITH_AS(cp::schedule_constants({0.95, std::nullopt, b, 1}),
                         "t must exceed 19/20", TTooSmall);
    CHECK_NOTHROW(cp::schedule_constants({0.950001, std::nullopt, b, 1}));
    CHECK_THROWS_AS(cp::schedule_constants({1.0, std::nullopt, b, 1}), SchedulerError);
    CHECK_THROWS_AS(cp::schedule_constants({1.4, std::nullopt, b, 1}), SchedulerError);
}

TEST_CASE("explicit s must fall in the open interval") {
    MapBounds b = cat_bounds();
    CHECK_THROWS_AS(cp::schedule_constants({0.96, 0.9, b, 1}), SOutOfRange);
    CHECK_THROWS_AS(cp::schedule_constants({0.96, 0.78125, b, 1}), SOutOfRange);
    CHECK_THROWS_AS(cp::schedule_constants({0.96, 0.5, b, 1}), SOutOfRange);
    cp::CPConstants c = cp::schedule_constants({0.96, 0.8, b, 1});
    CHECK(c.s == 0.8);
    CHECK_THROWS_AS(cp::schedule_constants({0.96, c.s_hi, b, 1}), SOutOfRange);
}

TEST_CASE("the s-interval is nonempty on all of (0.95, 1)") {
    std::mt19937_64 g(211);
    std::uniform_real_distribution<double> td(0.9500001, 0.9999999);
    MapBounds b = cat_bounds();
    for (int i = 0; i < 1000; ++i) {
        double t = td(g);
        cp::CPConstants c = cp::schedule_constants({t, std::nullopt, b, 1});
        CHECK(c.s_lo < c.s_hi);
        CHECK(c.s_lo < c.s);
        CHECK(c.s < c.s_hi);
    }
}

TEST_CASE("side condition holds on random scheduler inputs") {
    std::mt19937_64 g(223);
    std::uniform_real_distribution<double> td(0.951, 0.999);
    std::uniform_real_distribution<double> ad(0.01, 0.99);
    std::uniform_real_distribution<double> bd(1.01, 10.0);
    for (int i = 0; i < 1000; ++i) {
        MapBounds b;
        b.alpha = ad(g);
        b.beta = bd(g);
        b.r_estimate = std::max(-std::log(b.alpha), std::log(b.beta));
        b.grid_density = 2;
        cp::CPConstants c = cp::schedule_constants({td(g), std::nullopt, b, 1});
        CHECK(c.sigma_t1 * c.rho_t1 / (c.sigma * c.rho) > c.sigma);
        CHECK(c.sigma_t2 * c.rho_t2 / (c.sigma * c.rho) > c.sigma);
        CHECK(c.sigma > 0.0);
        CHECK(c.sigma < 1.0);
        CHECK(c.rho == doctest::Approx(c.sigma * c.sigma).epsilon(1e-13));
    }
}

TEST_CASE("eta lands in (0,1) for bounds of the built-in maps") {
    std::mt19937_64 g(227);
    std::uniform_real_distribution<double> td(0.951, 0.999);
    MapBounds bs[] = {cat_bounds(),
                      maps::estimate_bounds(MapDescriptor::perturbed_cat(0.3, 1), 64),
                      maps::estimate_bounds(MapDescriptor::standard_map(1.5, 1), 64)};
    for (const auto& b : bs)
        for (int i = 0; i < 100; ++i) {
            cp::CPConstants c = cp::schedule_constants({td(g), std::nullopt, b, 1});
            CHECK(c.eta > 0.0);
            CHECK(c.eta < 1.0);
        }
}

TEST_CASE("hypothesis check against the growth estimate") {
    MapDescriptor cat = MapDescriptor::cat(1);
    MapBounds b = cat_bounds();
    cocycle::LyapunovEstimate ly = cocycle::ftle(cat, {0.2, 0.3}, 100000);
    CHECK(cp::check_hypothesis(ly, b));

    MapDescriptor shear = MapDescriptor::standard_map(0.0, 1);
    MapBounds bs = maps::estimate_bounds(shear, 64);
    cocycle::LyapunovEstimate lys = cocycle::ftle(shear, {0.4, 0.6}, 10000);
    CHECK_FALSE(cp::check_hypothesis(lys, bs));

    MapDescriptor pc = MapDescriptor::perturbed_cat(1e-3, 1);
    MapBounds bp = maps::estimate_bounds(pc, 256);
    cocycle::LyapunovEstimate lyp = cocycle::ftle(pc, {0.2, 0.3}, 1000000);
    CHECK(cp::check_hypothesis(lyp, bp));

    cocycle::LyapunovEstimate junk{1.0, -1.0, 10, 0.5};
    CHECK_THROWS_AS(cp::check_hypothesis(junk, b), NotConverged);
}

TEST_CASE("cat map satisfies all five conditions at horizon 64") {
    MapDescriptor cat = MapDescriptor::cat(1);
    cp::CPConstants c = cat_constants();
    std::mt19937_64 g(229);
    for (int i = 0; i < 5; ++i) {
        TorusPoint p = rand_point(g);
        cocycle::DirectionPair d = cocycle::oseledets_directions(cat, p, 40);
        cp::DeltaFlags f = cp::check_membership(cat, p, d, c, 64);
        CHECK(f.d1);
        CHECK(f.d2);
        CHECK(f.d3);
        CHECK(f.d4);
        CHECK(f.d5);
        CHECK(f.all());
        CHECK(f.horizon == 64);
    }
}

TEST_CASE("swapping E and F breaks the contraction bound") {
    MapDescriptor cat = MapDescriptor::cat(1);
    cp::CPConstants c = cat_constants();
    TorusPoint p{0.37, 0.58};
    cocycle::DirectionPair d = cocycle::oseledets_directions(cat, p, 40);
    cocycle::DirectionPair swapped{d.F, d.E, d.cos_angle};
    cp::DeltaFlags f = cp::check_membership(cat, p, swapped, c, 1);
    CHECK_FALSE(f.d1);
}

TEST_CASE("membership flags are prefix-closed in the horizon") {
    // strong perturbation so the flags are not uniformly true
    MapDescriptor m = MapDescriptor::perturbed_cat(0.5, 1);
    cp::CPConstants c = cp::schedule_constants(
        {0.96, std::nullopt, maps::estimate_bounds(m, 128), 1});
    std::mt19937_64 g(233);
    int seen_false = 0, seen_true = 0;
    for (int i = 0; i < 40; ++i) {
        TorusPoint p = rand_point(g);
        cocycle::DirectionPair d;
        try {
            d = cocycle::oseledets_directions(m, p, 40);
        } catch (const DegenerateSplitting&) {
            continue;
        }
        cp::DeltaFlags f64 = cp::check_membership(m, p, d, c, 64);
        cp::DeltaFlags f8 = cp::check_membership(m, p, d, c, 8);
        if (f64.d1) CHECK(f8.d1);
        if (f64.d2) CHECK(f8.d2);
        if (f64.d3) CHECK(f8.d3);
        if (f64.d4) CHECK(f8.d4);
        if (f64.d5) CHECK(f8.d5);
        (f64.all() ? seen_true : seen_false)++;
    }
    CHECK(seen_true + seen_false > 0);
}

TEST_CASE("Delta1 intersect pulled-back Delta3 lies inside Delta5") {
    MapDescriptor fams[] = {MapDescriptor::cat(1), MapDescriptor::perturbed_cat(0.05, 1),
                            MapDescriptor::perturbed_cat(0.5, 1),
                            MapDescriptor::standard_map(5.0, 1)};
    std::mt19937_64 g(239);
    int checked = 0;
    for (const auto& m : fams) {
        cp::CPConstants c = cp::schedule_constants(
            {0.96, std::nullopt, maps::estimate_bounds(m, 128), 1});
        for (int i = 0; i < 30; ++i) {
            TorusPoint p = rand_point(g);
            TorusPoint fp = maps::apply(m, p, Direction::Forward);
            cocycle::DirectionPair dp, dfp;
            try {
                dp = cocycle::oseledets_directions(m, p, 40);
                dfp = cocycle::oseledets_directions(m, fp, 40);
            } catch (const DegenerateSplitting&) {
                continue;
            }
            cp::DeltaFlags at_x = cp::check_membership(m, p, dp, c, 16);
            cp::DeltaFlags at_fx = cp::check_membership(m, fp, dfp, c, 16);
            if (at_x.d1 && at_fx.d3) {
                CHECK(at_x.d5);
                CHECK(cp::angle_bound_check(c, at_x, at_fx, dp));
                ++checked;
            }
        }
    }
    CHECK(checked > 0);  // the claim must not pass vacuously
}

TEST_CASE("angle check needs its precondition and rejects wide angles") {
    cp::CPConstants c = cat_constants();
    cp::DeltaFlags good;
    good.d1 = good.d2 = good.d3 = good.d4 = good.d5 = true;
    good.horizon = 16;
    cp::DeltaFlags bad = good;
    bad.d1 = false;
    cp::DeltaFlags bad3 = good;
    bad3.d3 = false;

    double cosv = 0.9;  // above eta ~ 0.805
    double th = std::acos(cosv);
    cocycle::DirectionPair wide{{1.0, 0.0}, {std::cos(th), std::sin(th)}, cosv};
    CHECK_FALSE(cp::angle_bound_check(c, good, good, wide));
    CHECK_THROWS_AS(cp::angle_bound_check(c, bad, good, wide), PreconditionNotMet);
    CHECK_THROWS_AS(cp::angle_bound_check(c, good, bad3, wide), PreconditionNotMet);

    cocycle::DirectionPair ortho{{1.0, 0.0}, {0.0, 1.0}, 0.0};
    CHECK(cp::angle_bound_check(c, good, good, ortho));
}

TEST_CASE("degenerate splitting precludes membership evaluation") {
    MapDescriptor shear = MapDescriptor::standard_map(0.0, 1);
    CHECK_THROWS_AS(cocycle::oseledets_directions(shear, {0.21, 0.84}, 40),
                    DegenerateSplitting);
}

TEST_CASE("Pliss times of the bundle contraction logs certify the CP1 upper bound") {
    // The one-step logs must come from per-point window estimates (the same
    // arithmetic check_membership sums); transporting one fixed vector decays
    // onto the expanding direction within ~15 steps and has no Pliss times.
    MapDescriptor fams[] = {MapDescriptor::cat(1), MapDescriptor::perturbed_cat(0.05, 1)};
    for (const auto& m : fams) {
        cp::CPConstants c = cp::schedule_constants(
            {0.96, std::nullopt, maps::estimate_bounds(m, 128), 1});
        cp::OrbitBundle b = cp::build_orbit_bundle(m, {0.27, 0.66}, 0, 200, 40);
        REQUIRE(b.j_hi == 200);
        for (long j = 0; j <= 200; ++j) REQUIRE(b.valid[b.slot(j)]);

        double thr = std::log(c.sigma);
        std::vector<std::size_t> times = pliss::pliss_times(b.a_fwd, thr);
        REQUIRE(!times.empty());
        if (m.family == maps::Family::ArnoldCat)
            CHECK(times.size() == b.a_fwd.size());  // every index, not vacuous
        for (std::size_t k : times)
            for (std::size_t n = 1; k + n < b.s_a_fwd.size(); ++n)
                CHECK(b.s_a_fwd[k + n] - b.s_a_fwd[k] <=
                      double(n) * thr + cp::kCompareSlack);
    }
}

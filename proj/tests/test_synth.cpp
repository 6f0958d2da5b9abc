#include <doctest.h>

#include <cmath>

#include "tgad/errors.hpp"
#include "tgad/geo.hpp"
#include "tgad/rng.hpp"
#include "tgad/synth.hpp"

using namespace tgad;

namespace {

Track track_from_sog_cog(const std::vector<double>& sog, const std::vector<double>& cog) {
    Track tr;
    tr.ship_id = "S";
    tr.track_id = "S#0";
    for (std::size_t i = 0; i < sog.size(); ++i)
        tr.points.push_back({"S", static_cast<double>(i), -31.0, 115.0, sog[i], cog[i]});
    return tr;
}

} // namespace

TEST_SUITE_BEGIN("synth");

TEST_CASE("rate stats: constant speed") {
    const Track tr = track_from_sog_cog({10, 10, 10, 10}, {90, 90, 90, 90});
    const RateStats s = fit_rate_stats(tr);
    CHECK(s.mu_a == 0.0);
    CHECK(s.sigma_a == 0.0);
}

TEST_CASE("rate stats: linear ramp") {
    const Track tr = track_from_sog_cog({10, 12, 14}, {90, 90, 90});
    const RateStats s = fit_rate_stats(tr);
    CHECK(s.mu_a == doctest::Approx(2.0));
    CHECK(s.sigma_a == doctest::Approx(0.0));
}

TEST_CASE("rate stats: course unwraps across north") {
    const Track tr = track_from_sog_cog({10, 10, 10}, {359, 1, 3});
    const RateStats s = fit_rate_stats(tr);
    CHECK(s.mu_omega == doctest::Approx(2.0)); // +2 deg/h, not -358
    CHECK(s.sigma_omega == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("rate stats: invariant under adding full turns") {
    Rng rng(41);
    std::vector<double> sog, cog;
    for (int i = 0; i < 20; ++i) {
        sog.push_back(rng.uniform(8.0, 12.0));
        cog.push_back(rng.uniform(0.0, 360.0));
    }
    const RateStats a = fit_rate_stats(track_from_sog_cog(sog, cog));
    for (double& c : cog) c = wrap360(c + 360.0);
    const RateStats b = fit_rate_stats(track_from_sog_cog(sog, cog));
    CHECK(a.mu_omega == doctest::Approx(b.mu_omega).epsilon(1e-12));
    CHECK(a.sigma_omega == doctest::Approx(b.sigma_omega).epsilon(1e-12));
}

TEST_CASE("inject: speed update follows the perturbed rate") {
    // mu_a=0, sigma_a=0.5, k=3.5, SOG_{i-1}=10 -> 11.75 under a positive sign
    RateStats stats;
    stats.sigma_a = 0.5;
    const double a_star = stats.mu_a + 3.5 * stats.sigma_a;
    CHECK(10.0 + a_star * 1.0 == doctest::Approx(11.75));
    // course wraps: 359 + 7 -> 6
    RateStats cs;
    cs.sigma_omega = 2.0;
    const double w_star = cs.mu_omega + 3.5 * cs.sigma_omega;
    CHECK(wrap360(359.0 + w_star * 1.0) == doctest::Approx(6.0));
}

TEST_CASE("inject: only speed, course and labels change") {
    Rng rng(55);
    std::vector<double> sog, cog;
    for (int i = 0; i < 30; ++i) {
        sog.push_back(10.0 + rng.normal(0.0, 0.5));
        cog.push_back(wrap360(45.0 + rng.normal(0.0, 3.0)));
    }
    Track tr = track_from_sog_cog(sog, cog);
    const Track before = tr;
    const RateStats stats = fit_rate_stats(tr);
    InjectionConfig cfg;
    bool skipped = false;
    const auto idx = inject(tr, stats, cfg, 999, skipped);
    REQUIRE_FALSE(skipped);
    REQUIRE_FALSE(idx.empty());
    CHECK(idx.front() >= 1); // index 0 never selected
    // count matches the configured ratio within one point
    CHECK(std::fabs(static_cast<double>(idx.size()) / tr.points.size() - cfg.point_ratio) <=
          1.0 / tr.points.size());
    // positions and timestamps untouched everywhere
    for (std::size_t i = 0; i < tr.points.size(); ++i) {
        CHECK(tr.points[i].lat == before.points[i].lat);
        CHECK(tr.points[i].lon == before.points[i].lon);
        CHECK(tr.points[i].t == before.points[i].t);
    }
    // unselected points keep original speed and course
    std::size_t next = 0;
    for (std::size_t i = 0; i < tr.points.size(); ++i) {
        const bool selected = next < idx.size() && idx[next] == static_cast<int>(i);
        if (selected) {
            ++next;
            CHECK(tr.labels[i] == 1);
        } else {
            CHECK(tr.labels[i] == 0);
            CHECK(tr.points[i].sog == before.points[i].sog);
            CHECK(tr.points[i].cog == before.points[i].cog);
        }
    }
}

TEST_CASE("inject: k = 0 degenerates to the mean-rate prediction") {
    Track tr = track_from_sog_cog({10, 11, 12, 11, 10, 11, 12, 11, 10, 11, 12},
                                  {10, 12, 14, 12, 10, 12, 14, 12, 10, 12, 14});
    const RateStats stats = fit_rate_stats(tr);
    InjectionConfig cfg;
    cfg.k = 1e-12; // validated as > 0; vanishing severity
    bool skipped = false;
    const auto idx = inject(tr, stats, cfg, 7, skipped);
    REQUIRE_FALSE(skipped);
    for (int i : idx) {
        const double predicted = tr.points[i - 1].sog + stats.mu_a;
        CHECK(tr.points[i].sog == doctest::Approx(predicted).epsilon(1e-6));
    }
}

TEST_CASE("inject: zero-variance track is skipped and flagged") {
    Track tr = track_from_sog_cog(std::vector<double>(15, 10.0), std::vector<double>(15, 90.0));
    const RateStats stats = fit_rate_stats(tr);
    InjectionConfig cfg;
    bool skipped = false;
    const auto idx = inject(tr, stats, cfg, 7, skipped);
    CHECK(skipped);
    CHECK(idx.empty());
    CHECK_FALSE(tr.has_labels());
}

TEST_CASE("select_tracks: counts and determinism") {
    InjectionConfig cfg;
    cfg.seed = 31;
    CHECK(select_tracks(10, cfg).size() == 1);
    cfg.track_ratio = 1.0;
    CHECK(select_tracks(10, cfg).size() == 10);
    cfg.track_ratio = 0.1;
    const auto a = select_tracks(50, cfg);
    const auto b = select_tracks(50, cfg);
    CHECK(a == b);
    CHECK(a.size() == 5);
}

TEST_CASE("position delta: cardinal courses") {
    const auto [dphi_n, dlam_n] = position_delta(10.0, 0.0, -30.0, 1.0);
    CHECK(dlam_n == doctest::Approx(0.0));
    CHECK(dphi_n > 0.0);
    const auto [dphi_e, dlam_e] = position_delta(10.0, 90.0, 0.0, 1.0);
    CHECK(dphi_e == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(dlam_e == doctest::Approx(10.0 / kEarthRadiusNm));
    const auto [dphi_0, dlam_0] = position_delta(0.0, 123.0, 45.0, 1.0);
    CHECK(dphi_0 == 0.0);
    CHECK(dlam_0 == 0.0);
}

TEST_CASE("position delta: refuses near-polar latitudes") {
    CHECK_THROWS_AS(position_delta(10.0, 0.0, 89.95, 1.0), DataError);
    CHECK_THROWS_AS(position_delta(10.0, 0.0, -90.0, 1.0), DataError);
}

TEST_CASE("theorem check: zero perturbation passes trivially") {
    const BoundCheck c = theorem1_check(10.0, 45.0, -30.0, 0.0, 0.0, 0.0);
    CHECK(c.applicable);
    CHECK(c.pass);
    CHECK(c.d_lat == 0.0);
    CHECK(c.d_lon == 0.0);
}

TEST_CASE("theorem check: maximal allowed perturbation at eps = 1e-3") {
    const double eps = 1e-3;
    const double sog = 10.0;
    const double cog = 45.0; // pi/4 rad
    const double a_star = eps * sog;
    const double w_star_deg = rad2deg(eps * deg2rad(cog));
    const BoundCheck c = theorem1_check(sog, cog, -30.0, a_star, w_star_deg, eps);
    CHECK(c.applicable);
    CHECK(c.pass);
    CHECK(std::fabs(c.d_lat) <= eps);
    CHECK(std::fabs(c.d_lon) <= eps);
}

TEST_CASE("theorem check: a k=3.5 injection violates the premise") {
    Rng rng(21);
    std::vector<double> sog, cog;
    for (int i = 0; i < 30; ++i) {
        sog.push_back(10.0 + rng.normal(0.0, 0.3));
        cog.push_back(wrap360(45.0 + rng.normal(0.0, 2.0)));
    }
    const RateStats stats = fit_rate_stats(track_from_sog_cog(sog, cog));
    const double a_star = stats.mu_a + 3.5 * stats.sigma_a;
    const double w_star = stats.mu_omega + 3.5 * stats.sigma_omega;
    const double eps = 1e-3;
    CHECK(std::fabs(a_star) > eps * 10.0); // the typical case the paper still injects
    const BoundCheck c = theorem1_check(10.0, 45.0, -30.0, a_star, w_star, eps);
    CHECK_FALSE(c.applicable);
}

TEST_CASE("theorem check: property holds across eps grid") {
    Rng rng(31415);
    for (double eps : {1e-4, 1e-3, 1e-2}) {
        for (int i = 0; i < 1000; ++i) {
            const double sog = rng.uniform(1.0, 30.0);
            const double cog = rng.uniform(1.0, 359.0);
            const double lat = rng.uniform(-60.0, 60.0);
            const double a_star = rng.uniform(-eps * sog, eps * sog);
            const double w_max = rad2deg(eps * deg2rad(cog));
            const double w_star = rng.uniform(-w_max, w_max);
            const BoundCheck c = theorem1_check(sog, cog, lat, a_star, w_star, eps);
            REQUIRE(c.applicable);
            CHECK(c.pass);
        }
    }
}

TEST_SUITE_END();

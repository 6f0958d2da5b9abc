#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tgad/errors.hpp"
#include "tgad/geo.hpp"
#include "tgad/ingest.hpp"
#include "tgad/rng.hpp"

using namespace tgad;

namespace {

std::vector<AisPoint> hourly_points(const std::string& ship, int n, double sog = 10.0) {
    std::vector<AisPoint> pts;
    for (int i = 0; i < n; ++i)
        pts.push_back({ship, static_cast<double>(i), -31.0, 115.0, sog, 90.0});
    return pts;
}

Track make_track(std::vector<AisPoint> pts) {
    Track tr;
    tr.ship_id = pts.front().ship_id;
    tr.track_id = tr.ship_id + "#0";
    tr.points = std::move(pts);
    return tr;
}

} // namespace

TEST_SUITE_BEGIN("ingest");

TEST_CASE("parse: direct field mapping") {
    std::istringstream in("ship_id,t,lat,lon,sog,cog\nS1,0,-31.9,115.8,12.0,90.0\n");
    const auto res = parse_ais(in);
    REQUIRE(res.points.size() == 1);
    CHECK(res.rejects.empty());
    const AisPoint& p = res.points[0];
    CHECK(p.ship_id == "S1");
    CHECK(p.t == 0.0);
    CHECK(p.lat == doctest::Approx(-31.9));
    CHECK(p.lon == doctest::Approx(115.8));
    CHECK(p.sog == doctest::Approx(12.0));
    CHECK(p.cog == doctest::Approx(90.0));
}

TEST_CASE("parse: course reduced mod 360") {
    std::istringstream in("ship_id,t,lat,lon,sog,cog\nS1,0,0,0,1,370\n");
    const auto res = parse_ais(in);
    REQUIRE(res.points.size() == 1);
    CHECK(res.points[0].cog == doctest::Approx(10.0));
}

TEST_CASE("parse: negative speed row rejected, run continues") {
    std::istringstream in("ship_id,t,lat,lon,sog,cog\nS1,0,0,0,-1,90\nS1,1,0,0,5,90\n");
    const auto res = parse_ais(in);
    REQUIRE(res.points.size() == 1);
    REQUIRE(res.rejects.size() == 1);
    CHECK(res.rejects[0].line_no == 2);
    CHECK(res.rejects[0].reason == "negative or bad speed");
}

TEST_CASE("parse: missing required column is fatal") {
    std::istringstream in("ship_id,t,lat,lon,sog\nS1,0,0,0,1\n");
    CHECK_THROWS_AS(parse_ais(in), ConfigError);
}

TEST_CASE("parse: custom column names and delimiter") {
    std::istringstream in("mmsi;hours;y;x;speed;course\nA;1;2;3;4;5\n");
    ColumnMap cols;
    cols.ship_id = "mmsi";
    cols.t = "hours";
    cols.lat = "y";
    cols.lon = "x";
    cols.sog = "speed";
    cols.cog = "course";
    cols.delimiter = ';';
    const auto res = parse_ais(in, cols);
    REQUIRE(res.points.size() == 1);
    CHECK(res.points[0].lat == 2.0);
}

TEST_CASE("segment: no split condition fires") {
    const auto tracks = segment_tracks(hourly_points("S1", 12));
    REQUIRE(tracks.size() == 1);
    CHECK(tracks[0].points.size() == 12);
}

TEST_CASE("segment: stoppage splits and the zero point joins both halves") {
    auto pts = hourly_points("S1", 24);
    pts[11].sog = 0.0;
    const auto tracks = segment_tracks(pts);
    REQUIRE(tracks.size() == 2);
    CHECK(tracks[0].duration_h() == doctest::Approx(11.0));
    CHECK(tracks[1].duration_h() == doctest::Approx(12.0));
    CHECK(tracks[0].points.back().t == 11.0);
    CHECK(tracks[1].points.front().t == 11.0);
}

TEST_CASE("segment: below minimum duration yields nothing") {
    CHECK(segment_tracks(hourly_points("S1", 8)).empty());
}

TEST_CASE("segment: gap splits, halves kept only when long enough") {
    std::vector<AisPoint> pts;
    for (int i = 0; i < 12; ++i)
        pts.push_back({"S1", static_cast<double>(i), 0, 0, 5, 0});
    for (int i = 0; i < 12; ++i)
        pts.push_back({"S1", 16.0 + i, 0, 0, 5, 0}); // 4 h gap
    const auto tracks = segment_tracks(pts);
    REQUIRE(tracks.size() == 2);
    CHECK(tracks[0].points.front().t == 0.0);
    CHECK(tracks[1].points.front().t == 16.0);
}

TEST_CASE("segment: idempotent over random gap patterns") {
    Rng rng(404);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<AisPoint> pts;
        double t = 0.0;
        const int n = rng.uniform_int(5, 60);
        for (int i = 0; i < n; ++i) {
            const double sog = rng.uniform01() < 0.07 ? 0.0 : rng.uniform(1.0, 15.0);
            pts.push_back({"S1", t, 0, 0, sog, 0});
            t += rng.uniform01() < 0.1 ? rng.uniform(3.6, 8.0) : 1.0;
        }
        const auto once = segment_tracks(pts);
        // run every produced segment through again; partition must be stable
        std::vector<Track> twice;
        for (const Track& tr : once)
            for (const Track& t2 : segment_tracks(tr.points)) twice.push_back(t2);
        REQUIRE(twice.size() == once.size());
        for (std::size_t i = 0; i < once.size(); ++i) {
            CHECK(once[i].points.size() == twice[i].points.size());
            CHECK(once[i].points.front().t == twice[i].points.front().t);
        }
        // track invariants
        for (const Track& tr : once) {
            CHECK(tr.duration_h() >= 10.0);
            for (std::size_t i = 1; i < tr.points.size(); ++i) {
                CHECK(tr.points[i].t > tr.points[i - 1].t);
                CHECK(tr.points[i].t - tr.points[i - 1].t <= 3.5);
            }
        }
    }
}

TEST_CASE("interpolate: midpoint of a linear map") {
    Track tr = make_track({{"S1", 0.0, 0, 0, 10, 90}, {"S1", 2.0, 2, 4, 14, 90}});
    const Track out = interpolate(tr);
    REQUIRE(out.points.size() == 3);
    CHECK(out.points[1].t == 1.0);
    CHECK(out.points[1].sog == doctest::Approx(12.0));
    CHECK(out.points[1].lat == doctest::Approx(1.0));
    CHECK(out.points[1].lon == doctest::Approx(2.0));
}

TEST_CASE("interpolate: course crosses north on the shortest arc") {
    Track tr = make_track({{"S1", 0.0, 0, 0, 10, 350}, {"S1", 2.0, 0, 0, 10, 10}});
    const Track out = interpolate(tr);
    REQUIRE(out.points.size() == 3);
    // oracle: compare both arc directions explicitly
    const double ccw = std::fabs(350.0 + 0.5 * 20.0 - 360.0); // through north
    const double cw = std::fabs(350.0 - 0.5 * 340.0);         // the long way
    CHECK(ccw < cw);
    CHECK(out.points[1].cog == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("interpolate: gridded track returned unchanged") {
    Track tr = make_track(hourly_points("S1", 5));
    const Track out = interpolate(tr);
    REQUIRE(out.points.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(out.points[i].t == tr.points[i].t);
        CHECK(out.points[i].lat == tr.points[i].lat);
        CHECK(out.points[i].sog == tr.points[i].sog);
        CHECK(out.points[i].cog == tr.points[i].cog);
    }
}

TEST_CASE("interpolate: endpoints preserved") {
    Track tr = make_track({{"S1", 0.0, -31.123456789, 115.987654321, 11.5, 123.4},
                           {"S1", 1.5, -31.2, 116.0, 12.5, 130.0},
                           {"S1", 3.0, -31.3, 116.1, 13.0, 140.0}});
    const Track out = interpolate(tr);
    REQUIRE(out.points.size() == 4);
    CHECK(out.points.front().lat == doctest::Approx(tr.points.front().lat).epsilon(1e-12));
    CHECK(out.points.back().lat == doctest::Approx(tr.points.back().lat).epsilon(1e-12));
    CHECK(out.points.back().t == 3.0);
}

TEST_CASE("featurize: cardinal courses") {
    AisPoint p{"S1", 0, -31, 115, 10, 0};
    auto f = featurize(p);
    CHECK(f[3] == doctest::Approx(0.0));
    CHECK(f[4] == doctest::Approx(1.0));
    p.cog = 90.0;
    f = featurize(p);
    CHECK(f[3] == doctest::Approx(1.0));
    CHECK(f[4] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("featurize: continuity across the wrap") {
    const AisPoint a{"S1", 0, 0, 0, 1, 359.0};
    const AisPoint b{"S1", 0, 0, 0, 1, 1.0};
    const auto fa = featurize(a);
    const auto fb = featurize(b);
    CHECK(std::fabs(fa[3] - fb[3]) <= 0.035);
    CHECK(std::fabs(fa[4] - fb[4]) <= 0.035);
}

TEST_CASE("featurize: sin^2 + cos^2 == 1") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        AisPoint p{"S1", 0, 0, 0, 1, rng.uniform(0.0, 360.0)};
        const auto f = featurize(p);
        CHECK(std::fabs(f[3] * f[3] + f[4] * f[4] - 1.0) < 1e-9);
    }
}

TEST_SUITE_END();

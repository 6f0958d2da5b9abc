#include "tgad/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tgad/geo.hpp"
#include "tgad/rng.hpp"
#include "tgad/synth.hpp"

namespace tgad {

namespace {

struct Lane {
    double lat;
    double lon;
    double bearing;
};

// Busy stretch of ocean well away from the poles.
constexpr Lane kLanes[] = {
    {-32.0, 114.5, 330.0}, {-20.5, 116.5, 60.0},  {-25.0, 112.5, 5.0},
    {-30.5, 113.8, 200.0}, {-22.5, 114.8, 120.0},
};

} // namespace

std::vector<Track> simulate_tracks(const SimConfig& cfg) {
    std::vector<Track> tracks;
    Rng pick(hash_mix(cfg.seed, 0x51c0ULL));

    int prev_lane = 0;
    int prev_start_hour = 0;
    int prev_len = 0;
    for (int s = 0; s < cfg.n_tracks; ++s) {
        Rng rng(hash_mix(cfg.seed, 0x7e57ULL + static_cast<std::uint64_t>(s)));
        const bool convoy = s > 0 && pick.uniform01() < cfg.convoy_prob;

        int lane_idx;
        int start_hour;
        int len;
        double lat;
        double lon;
        if (convoy) {
            lane_idx = prev_lane;
            start_hour = prev_start_hour;
            len = prev_len;
            const Lane& lane = kLanes[lane_idx];
            // a few kilometers abeam of the convoy leader
            lat = lane.lat + rng.uniform(-0.03, 0.03);
            lon = lane.lon + rng.uniform(-0.03, 0.03);
        } else {
            lane_idx = pick.uniform_int(0, static_cast<int>(std::size(kLanes)) - 1);
            start_hour = pick.uniform_int(0, 24);
            len = pick.uniform_int(cfg.min_len_h, cfg.max_len_h);
            const Lane& lane = kLanes[lane_idx];
            lat = lane.lat + rng.uniform(-0.4, 0.4);
            lon = lane.lon + rng.uniform(-0.4, 0.4);
        }
        prev_lane = lane_idx;
        prev_start_hour = start_hour;
        prev_len = len;

        const Lane& lane = kLanes[lane_idx];
        // open-water transit legs: speed and heading drift smoothly over
        // many hours while the hour-to-hour jitter stays small
        const double base_speed = std::clamp(rng.normal(12.0, 2.0), 6.0, 18.0);
        const double speed_amp = rng.uniform(1.0, 2.5);
        const double speed_period = rng.uniform(24.0, 40.0);
        const double speed_phase = rng.uniform(0.0, 2.0 * M_PI);
        const double meander_deg = rng.uniform(5.0, 12.0);
        const double meander_period = rng.uniform(24.0, 48.0);
        const double meander_phase = rng.uniform(0.0, 2.0 * M_PI);

        char ship_name[16];
        std::snprintf(ship_name, sizeof(ship_name), "S%03d", s);
        Track tr;
        tr.ship_id = ship_name;
        tr.track_id = tr.ship_id + std::string("#0");
        for (int h = 0; h <= len; ++h) {
            AisPoint p;
            p.ship_id = tr.ship_id;
            p.t = static_cast<double>(start_hour + h);
            p.lat = lat;
            p.lon = lon;
            p.sog = std::max(3.0, base_speed +
                                      speed_amp * std::sin(2.0 * M_PI * h / speed_period +
                                                           speed_phase) +
                                      rng.normal(0.0, 0.05));
            p.cog = wrap360(lane.bearing +
                            meander_deg * std::sin(2.0 * M_PI * h / meander_period + meander_phase) +
                            rng.normal(0.0, 0.25));
            tr.points.push_back(p);
            const auto [d_phi, d_lam] = position_delta(p.sog, p.cog, p.lat, 1.0);
            lat += rad2deg(d_phi);
            lon += rad2deg(d_lam);
        }
        tracks.push_back(std::move(tr));
    }
    return tracks;
}

} // namespace tgad

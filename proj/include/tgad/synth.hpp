#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tgad/ingest.hpp"

namespace tgad {

// Fitted speed / course change-rate distributions of one track.
struct RateStats {
    double mu_a = 0.0;     // knots per hour
    double sigma_a = 0.0;
    double mu_omega = 0.0; // degrees per hour
    double sigma_omega = 0.0;
};

struct InjectionConfig {
    double k = 3.5;           // severity factor
    double track_ratio = 0.1; // share of tracks designated anomalous
    double point_ratio = 0.3; // share of points perturbed inside a track
    std::uint64_t seed = 1;
};

// Result of the bounded-position-change verification for one perturbation.
// d_lat / d_lon are the perturbation-induced changes of the one-step
// position deltas, in radians.
struct BoundCheck {
    bool applicable = false; // preconditions |a*|<=eps*SOG, |w*|<=eps*COG held
    bool pass = false;
    double eps = 0.0;
    double bound = 0.0;      // eps * dt
    double d_lat = 0.0;
    double d_lon = 0.0;
};

struct InjectionOutcome {
    std::vector<std::string> designated;          // track ids picked for injection
    std::vector<std::string> skipped;             // designated but zero-variance
    std::vector<std::vector<int>> injected_index; // aligned with `designated`
};

// Sample mean/std of consecutive SOG differences and circularly-unwrapped
// COG differences, divided by the consecutive time step.
RateStats fit_rate_stats(const Track& track);

// Perturbs SOG/COG at randomly selected indices (never index 0) with
//   a* = mu_a + s*k*sigma_a,  w* = mu_w + s*k*sigma_w,  s in {+1,-1}
// applied iteratively: the new value builds on the (possibly already
// modified) previous point. SOG clamps at 0, COG wraps mod 360. Positions
// and timestamps are never touched. Returns the labeled indices; empty and
// flagged when both fitted stds are zero.
std::vector<int> inject(Track& track, const RateStats& stats, const InjectionConfig& cfg,
                        std::uint64_t track_seed, bool& skipped);

// Uniformly designates ceil(track_ratio * n) tracks for injection.
std::vector<std::size_t> select_tracks(std::size_t n_tracks, const InjectionConfig& cfg);

// Applies select + fit + inject over a corpus; labels are attached to the
// designated tracks.
InjectionOutcome inject_corpus(std::vector<Track>& tracks, const InjectionConfig& cfg);

// One-step flat-earth position change in radians:
//   d_phi = sog*cos(cog)/R * dt,  d_lam = sog*sin(cog)/(R cos(lat)) * dt
// with R in nautical miles. Throws for |lat| >= 89.9 degrees.
std::pair<double, double> position_delta(double sog_kn, double cog_deg, double lat_deg,
                                         double dt_h);

// Verifies the bounded-position-change claim: when |a*| <= eps*SOG and
// |w*| <= eps*COG (course taken in radians), the perturbation changes each
// of the position deltas by at most eps*dt. a_star is in knots/h, w_star in
// degrees/h.
BoundCheck theorem1_check(double sog_kn, double cog_deg, double lat_deg, double a_star,
                          double w_star_deg, double eps, double dt_h = 1.0);

} // namespace tgad

#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace tgad {

// One AIS record. Timestamps are hours; cog is normalized to [0, 360).
struct AisPoint {
    std::string ship_id;
    double t = 0.0;
    double lat = 0.0;
    double lon = 0.0;
    double sog = 0.0;
    double cog = 0.0;
};

// A segmented vessel journey. `labels` is empty until anomaly injection and
// then holds one flag per point (1 = anomalous).
struct Track {
    std::string ship_id;
    std::string track_id; // ship_id plus segment ordinal, unique per journey
    std::vector<AisPoint> points;
    std::vector<std::uint8_t> labels;

    bool has_labels() const { return !labels.empty(); }
    double duration_h() const {
        return points.empty() ? 0.0 : points.back().t - points.front().t;
    }
};

// lat, lon, sog, sin(cog), cos(cog) in physical units.
using FeatureVector = std::array<double, 5>;

struct ColumnMap {
    std::string ship_id = "ship_id";
    std::string t = "t";
    std::string lat = "lat";
    std::string lon = "lon";
    std::string sog = "sog";
    std::string cog = "cog";
    char delimiter = ',';
};

struct RejectedRow {
    std::size_t line_no = 0; // 1-based, header is line 1
    std::string reason;
    std::string raw;
};

struct ParseResult {
    std::vector<AisPoint> points; // sorted by (ship_id, t)
    std::vector<RejectedRow> rejects;
};

// Parses delimited text with a header row. Malformed rows land in the
// rejects report; a missing required column throws ConfigError.
ParseResult parse_ais(std::istream& source, const ColumnMap& columns = {});

// Splits at zero-speed points and at gaps > gap_h, then drops segments
// shorter than min_h of duration. A zero-speed point at an interior index
// ends one segment and starts the next (it belongs to both).
std::vector<Track> segment_tracks(const std::vector<AisPoint>& points, double gap_h = 3.5,
                                  double min_h = 10.0);

// Resamples onto the 1 h grid anchored at the first point. lat/lon/sog are
// linear in time; cog follows the shortest angular arc.
Track interpolate(const Track& track);

FeatureVector featurize(const AisPoint& p);

} // namespace tgad

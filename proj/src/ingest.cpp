#include "tgad/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tgad/errors.hpp"
#include "tgad/geo.hpp"

namespace tgad {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) out.push_back(field);
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
    // Accepts the unicode minus some exports use.
    std::string t = trim(s);
    if (t.rfind("−", 0) == 0) t = "-" + t.substr(3);
    if (t.empty()) return false;
    try {
        std::size_t pos = 0;
        out = std::stod(t, &pos);
        return pos == t.size() && std::isfinite(out);
    } catch (const std::exception&) {
        return false;
    }
}

} // namespace

ParseResult parse_ais(std::istream& source, const ColumnMap& columns) {
    std::string header_line;
    if (!std::getline(source, header_line))
        throw ConfigError("parse_ais: empty input, expected a header row");
    const auto header = split_line(header_line, columns.delimiter);

    auto column_index = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (trim(header[i]) == name) return static_cast<int>(i);
        throw ConfigError("parse_ais: required column '" + name + "' not found in header");
    };
    const int c_ship = column_index(columns.ship_id);
    const int c_t = column_index(columns.t);
    const int c_lat = column_index(columns.lat);
    const int c_lon = column_index(columns.lon);
    const int c_sog = column_index(columns.sog);
    const int c_cog = column_index(columns.cog);
    const int needed = std::max({c_ship, c_t, c_lat, c_lon, c_sog, c_cog});

    ParseResult result;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(source, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_line(line, columns.delimiter);
        auto reject = [&](const std::string& reason) {
            result.rejects.push_back({line_no, reason, line});
        };
        if (static_cast<int>(fields.size()) <= needed) {
            reject("too few fields");
            continue;
        }
        AisPoint p;
        p.ship_id = trim(fields[c_ship]);
        if (p.ship_id.empty()) {
            reject("empty ship id");
            continue;
        }
        if (!parse_double(fields[c_t], p.t)) {
            reject("bad timestamp");
            continue;
        }
        if (!parse_double(fields[c_lat], p.lat) || p.lat < -90.0 || p.lat > 90.0) {
            reject("latitude out of range");
            continue;
        }
        if (!parse_double(fields[c_lon], p.lon)) {
            reject("bad longitude");
            continue;
        }
        // wrap into (-180, 180]
        p.lon = std::fmod(p.lon, 360.0);
        if (p.lon > 180.0) p.lon -= 360.0;
        if (p.lon <= -180.0) p.lon += 360.0;
        if (!parse_double(fields[c_sog], p.sog) || p.sog < 0.0) {
            reject("negative or bad speed");
            continue;
        }
        if (!parse_double(fields[c_cog], p.cog)) {
            reject("bad course");
            continue;
        }
        p.cog = wrap360(p.cog);
        result.points.push_back(std::move(p));
    }
    std::stable_sort(result.points.begin(), result.points.end(),
                     [](const AisPoint& a, const AisPoint& b) {
                         if (a.ship_id != b.ship_id) return a.ship_id < b.ship_id;
                         return a.t < b.t;
                     });
    return result;
}

std::vector<Track> segment_tracks(const std::vector<AisPoint>& points, double gap_h,
                                  double min_h) {
    std::vector<Track> out;
    std::map<std::string, int> segment_counter;

    auto flush = [&](std::vector<AisPoint>&& seg) {
        if (seg.size() < 2) return;
        const double duration = seg.back().t - seg.front().t;
        if (duration < min_h) return;
        Track tr;
        tr.ship_id = seg.front().ship_id;
        tr.track_id = tr.ship_id + "#" + std::to_string(segment_counter[tr.ship_id]++);
        tr.points = std::move(seg);
        out.push_back(std::move(tr));
    };

    std::vector<AisPoint> current;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const AisPoint& p = points[i];
        const bool new_ship = current.empty() || current.back().ship_id != p.ship_id;
        if (new_ship) {
            flush(std::move(current));
            current = {p};
            continue;
        }
        if (p.t <= current.back().t) continue; // duplicate/non-increasing timestamp, drop
        if (p.t - current.back().t > gap_h) {
            flush(std::move(current));
            current = {p};
            continue;
        }
        current.push_back(p);
        // Interior stoppage: the zero-speed point closes this segment and
        // seeds the next one.
        if (p.sog == 0.0) {
            std::vector<AisPoint> next = {p};
            flush(std::move(current));
            current = std::move(next);
        }
    }
    flush(std::move(current));
    return out;
}

Track interpolate(const Track& track) {
    Track out;
    out.ship_id = track.ship_id;
    out.track_id = track.track_id;
    if (track.points.empty()) return out;

    const double t0 = track.points.front().t;
    const double t_end = track.points.back().t;
    const int steps = static_cast<int>(std::floor(t_end - t0 + 1e-9));
    out.points.reserve(steps + 1);
    std::size_t hi = 1;
    for (int k = 0; k <= steps; ++k) {
        const double t = t0 + k;
        while (hi + 1 < track.points.size() && track.points[hi].t < t - 1e-12) ++hi;
        const AisPoint& a = track.points[hi - 1];
        const AisPoint& b = track.points[std::min(hi, track.points.size() - 1)];
        AisPoint q;
        q.ship_id = track.ship_id;
        q.t = t;
        if (t <= a.t + 1e-12 || b.t <= a.t) {
            q.lat = a.lat;
            q.lon = a.lon;
            q.sog = a.sog;
            q.cog = a.cog;
        } else if (std::fabs(t - b.t) <= 1e-12) {
            q.lat = b.lat;
            q.lon = b.lon;
            q.sog = b.sog;
            q.cog = b.cog;
        } else {
            const double f = (t - a.t) / (b.t - a.t);
            q.lat = a.lat + f * (b.lat - a.lat);
            q.lon = a.lon + f * (b.lon - a.lon);
            q.sog = a.sog + f * (b.sog - a.sog);
            q.cog = wrap360(a.cog + f * angle_diff_deg(a.cog, b.cog));
        }
        out.points.push_back(std::move(q));
    }
    return out;
}

FeatureVector featurize(const AisPoint& p) {
    const double rad = deg2rad(p.cog);
    return {p.lat, p.lon, p.sog, std::sin(rad), std::cos(rad)};
}

} // namespace tgad

#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

namespace tgad {

inline constexpr int kNoise = -1;

struct OpticsParams {
    int min_pts = 3;
    double max_eps_km = 10.0;
    double xi = 0.05;
};

struct ShipPosition {
    std::string ship_id; // track id in pipeline use; any stable key works
    double lat = 0.0;
    double lon = 0.0;
};

// OPTICS output in processing order. reach/core are +inf when undefined;
// predecessor is the index (into `positions`) the reachability came from,
// or -1.
struct OpticsOrdering {
    std::vector<int> order;         // positions index, in output order
    std::vector<double> reach;      // aligned with `order`
    std::vector<double> core;       // aligned with `order`
    std::vector<int> predecessor;   // aligned with `order`
};

// map ship -> cluster label (contiguous from 0) or kNoise
struct ClusterAssignment {
    std::map<std::string, int> label;
    int cluster_count = 0;

    int of(const std::string& ship) const {
        auto it = label.find(ship);
        return it == label.end() ? kNoise : it->second;
    }
};

// Haversine-metric OPTICS over lat/lon positions. Seeds are expanded in
// reachability order with index tie-breaking, so output is deterministic.
OpticsOrdering optics_order(const std::vector<ShipPosition>& positions,
                            const OpticsParams& params);

// Steep-area (xi) cluster extraction over the reachability plot. Points in
// no extracted cluster, including those never reached within max_eps, are
// labeled kNoise.
ClusterAssignment extract_clusters(const std::vector<ShipPosition>& positions,
                                   const OpticsOrdering& ordering, const OpticsParams& params);

// Convenience: ordering + extraction in one call.
ClusterAssignment cluster_ships(const std::vector<ShipPosition>& positions,
                                const OpticsParams& params);

} // namespace tgad

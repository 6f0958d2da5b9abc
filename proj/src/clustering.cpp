#include "tgad/clustering.hpp"

#include <algorithm>
#include <cmath>

#include "tgad/geo.hpp"

namespace tgad {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ClusterInterval {
    int start;
    int end; // inclusive, positions in the ordering
};

// Extends a steep region beginning at `start`. At most min_pts consecutive
// non-steep points going the same direction are tolerated; a point going the
// opposite way ends the region. Returns one past the last steep index.
int extend_region(const std::vector<char>& steep, const std::vector<char>& opposite, int start,
                  int min_pts) {
    const int n = static_cast<int>(steep.size());
    int end = start;
    int slack = 0;
    for (int i = start; i < n; ++i) {
        if (steep[i]) {
            slack = 0;
            end = i;
        } else if (!opposite[i]) {
            if (++slack > min_pts) break;
        } else {
            break;
        }
    }
    return end + 1;
}

struct SteepDownArea {
    int start;
    int end;
    double mib; // maximum reachability seen after the area
};

void update_filter_sdas(std::vector<SteepDownArea>& sdas, double mib, double xi_complement,
                        const std::vector<double>& r) {
    if (std::isinf(mib)) {
        sdas.clear();
        return;
    }
    std::vector<SteepDownArea> kept;
    for (const auto& sda : sdas) {
        if (mib <= r[sda.start] * xi_complement) {
            SteepDownArea s = sda;
            s.mib = std::max(s.mib, mib);
            kept.push_back(s);
        }
    }
    sdas = std::move(kept);
}

// Shrinks the cluster tail until the end point's predecessor lies inside the
// cluster; drops the candidate if that never happens.
bool correct_predecessor(const std::vector<double>& r, const std::vector<int>& pred,
                         const std::vector<int>& order, int& s, int& e) {
    while (s < e) {
        if (r[s] > r[e]) return true;
        const int p_e = pred[e];
        bool inside = false;
        for (int i = s; i < e; ++i) {
            if (p_e == order[i]) {
                inside = true;
                break;
            }
        }
        if (inside) return true;
        --e;
    }
    return false;
}

std::vector<ClusterInterval> xi_clusters(const std::vector<double>& reach_plot,
                                         const std::vector<int>& pred_plot,
                                         const std::vector<int>& order, double xi, int min_pts) {
    const int n = static_cast<int>(reach_plot.size());
    if (n < 2) return {};
    const double xi_complement = 1.0 - xi;

    // Trailing sentinel lets a cluster running to the end of the plot close.
    std::vector<double> r(reach_plot);
    r.push_back(kInf);

    std::vector<char> steep_up(n), steep_down(n), upward(n), downward(n);
    for (int i = 0; i < n; ++i) {
        const double ratio = r[i] / r[i + 1]; // inf/inf -> nan: all flags false
        steep_up[i] = ratio <= xi_complement;
        steep_down[i] = ratio >= 1.0 / xi_complement;
        upward[i] = ratio < 1.0;
        downward[i] = ratio > 1.0;
    }

    std::vector<ClusterInterval> clusters;
    std::vector<SteepDownArea> sdas;
    double mib = 0.0;
    int index = 0;
    while (index < n) {
        mib = std::max(mib, r[index]);
        if (steep_down[index]) {
            update_filter_sdas(sdas, mib, xi_complement, r);
            const int d_start = index;
            index = extend_region(steep_down, upward, d_start, min_pts);
            sdas.push_back({d_start, index - 1, 0.0});
            mib = r[index];
        } else if (steep_up[index]) {
            update_filter_sdas(sdas, mib, xi_complement, r);
            const int u_start = index;
            index = extend_region(steep_up, downward, u_start, min_pts);
            const int u_end = index - 1;
            mib = r[index];
            std::vector<ClusterInterval> found;
            for (const auto& sda : sdas) {
                int c_start = sda.start;
                int c_end = u_end;
                // the region between must stay below both cluster borders
                if (r[c_end + 1] * xi_complement < sda.mib) continue;
                const double d_max = r[sda.start];
                if (d_max * xi_complement >= r[c_end + 1]) {
                    // start side is higher: trim it down to the end level
                    while (c_start < sda.end && r[c_start + 1] > r[c_end + 1]) ++c_start;
                } else if (r[c_end + 1] * xi_complement >= d_max) {
                    // end side is higher: trim it back to the start level
                    while (c_end > u_start && r[c_end] > d_max) --c_end;
                }
                if (!correct_predecessor(r, pred_plot, order, c_start, c_end)) continue;
                if (c_end - c_start + 1 < std::max(min_pts, 2)) continue;
                if (c_start > sda.end) continue;
                if (c_end < u_start) continue;
                found.push_back({c_start, c_end});
            }
            clusters.insert(clusters.end(), found.begin(), found.end());
        } else {
            ++index;
        }
    }
    return clusters;
}

} // namespace

OpticsOrdering optics_order(const std::vector<ShipPosition>& positions,
                            const OpticsParams& params) {
    const int n = static_cast<int>(positions.size());
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            dist[i][j] = dist[j][i] = haversine_km(positions[i].lat, positions[i].lon,
                                                   positions[j].lat, positions[j].lon);

    // Core distance: distance to the min_pts-th closest point, the point
    // itself included; undefined past max_eps.
    std::vector<double> core(n, kInf);
    std::vector<std::vector<int>> neighbors(n);
    for (int i = 0; i < n; ++i) {
        std::vector<double> ds;
        ds.reserve(n);
        for (int j = 0; j < n; ++j) {
            if (dist[i][j] <= params.max_eps_km) {
                neighbors[i].push_back(j);
                ds.push_back(dist[i][j]);
            }
        }
        if (static_cast<int>(ds.size()) >= params.min_pts) {
            std::nth_element(ds.begin(), ds.begin() + (params.min_pts - 1), ds.end());
            core[i] = ds[params.min_pts - 1];
        }
    }

    OpticsOrdering out;
    std::vector<char> processed(n, 0);
    std::vector<double> reach(n, kInf);
    std::vector<int> pred(n, -1);

    auto emit = [&](int idx) {
        processed[idx] = 1;
        out.order.push_back(idx);
        out.reach.push_back(reach[idx]);
        out.core.push_back(core[idx]);
        out.predecessor.push_back(pred[idx]);
    };

    std::vector<char> in_seeds(n, 0);
    for (int start = 0; start < n; ++start) {
        if (processed[start]) continue;
        emit(start);
        if (std::isinf(core[start])) continue;

        std::fill(in_seeds.begin(), in_seeds.end(), 0);
        auto update_seeds = [&](int center) {
            for (int q : neighbors[center]) {
                if (processed[q]) continue;
                const double nd = std::max(core[center], dist[center][q]);
                if (nd < reach[q]) {
                    reach[q] = nd;
                    pred[q] = center;
                }
                in_seeds[q] = 1;
            }
        };
        update_seeds(start);
        for (;;) {
            // linear scan: snapshots hold at most a few hundred ships
            int best = -1;
            for (int q = 0; q < n; ++q) {
                if (!in_seeds[q] || processed[q]) continue;
                if (best == -1 || reach[q] < reach[best] ||
                    (reach[q] == reach[best] && q < best))
                    best = q;
            }
            if (best == -1) break;
            emit(best);
            if (!std::isinf(core[best])) update_seeds(best);
        }
    }
    return out;
}

ClusterAssignment extract_clusters(const std::vector<ShipPosition>& positions,
                                   const OpticsOrdering& ordering, const OpticsParams& params) {
    const int n = static_cast<int>(ordering.order.size());
    ClusterAssignment out;
    std::vector<int> labels(n, kNoise);

    auto intervals = xi_clusters(ordering.reach, ordering.predecessor, ordering.order,
                                 params.xi, params.min_pts);
    // Flatten the hierarchy outermost-first: the widest interval of each
    // reachability valley claims its points, so cleanly separated regions
    // come out exactly as the density-connected components.
    std::sort(intervals.begin(), intervals.end(), [](const auto& a, const auto& b) {
        const int la = a.end - a.start;
        const int lb = b.end - b.start;
        if (la != lb) return la > lb;
        return a.start < b.start;
    });
    int next_label = 0;
    for (const auto& c : intervals) {
        bool free_range = true;
        for (int i = c.start; i <= c.end && free_range; ++i) free_range = labels[i] == kNoise;
        if (!free_range) continue; // overlaps a cluster that already claimed points
        for (int i = c.start; i <= c.end; ++i) labels[i] = next_label;
        ++next_label;
    }
    out.cluster_count = next_label;
    for (int i = 0; i < n; ++i) out.label[positions[ordering.order[i]].ship_id] = labels[i];
    return out;
}

ClusterAssignment cluster_ships(const std::vector<ShipPosition>& positions,
                                const OpticsParams& params) {
    return extract_clusters(positions, optics_order(positions, params), params);
}

} // namespace tgad

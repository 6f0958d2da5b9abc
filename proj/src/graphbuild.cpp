#include "tgad/graphbuild.hpp"

#include <algorithm>
#include <cmath>

#include "tgad/errors.hpp"

namespace tgad {

Tensor TemporalGraph::adjacency() const {
    Tensor a({static_cast<int>(nodes.size()), static_cast<int>(nodes.size())});
    for (const auto& [src, dst] : edges) a(src, dst) = 1.0;
    return a;
}

Tensor TemporalGraph::inverse_standardized() const {
    Tensor raw = X;
    if (!standardized) return raw;
    for (int i = 0; i < raw.rows(); ++i)
        for (int j = 0; j < raw.cols(); ++j)
            raw(i, j) = raw(i, j) * feat_std[j] + feat_mean[j];
    return raw;
}

std::vector<int> window_offsets(const Track& track, const WindowConfig& cfg) {
    std::vector<int> out;
    const int n = static_cast<int>(track.points.size());
    for (int s = 0; s + cfg.w <= n; s += cfg.step) out.push_back(s);
    return out;
}

namespace {

void fill_features(TemporalGraph& g,
                   const std::vector<std::pair<const Track*, int>>& member_windows, int w) {
    g.X = Tensor({static_cast<int>(g.nodes.size()), 5});
    int row = 0;
    for (const auto& [track, offset] : member_windows) {
        for (int k = 0; k < w; ++k) {
            const FeatureVector f = featurize(track->points[offset + k]);
            for (int j = 0; j < 5; ++j) g.X(row, j) = f[j];
            ++row;
        }
    }
}

// Nodes are laid out track-major: all w nodes of the first member track,
// then the next. Edges connect every strictly-earlier node to every
// strictly-later one, across tracks too.
TemporalGraph assemble(const std::vector<std::pair<const Track*, int>>& member_windows,
                       const WindowConfig& cfg) {
    TemporalGraph g;
    g.window_len = cfg.w;
    g.window_start = member_windows.front().first->points[member_windows.front().second].t;
    for (const auto& [track, offset] : member_windows) {
        for (int k = 0; k < cfg.w; ++k) {
            const AisPoint& p = track->points[offset + k];
            g.ship_index[track->track_id].push_back(static_cast<int>(g.nodes.size()));
            g.nodes.push_back({p.ship_id, track->track_id, p.t});
        }
    }
    const int n = static_cast<int>(g.nodes.size());
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (g.nodes[u].t < g.nodes[v].t) g.edges.emplace_back(u, v);

    fill_features(g, member_windows, cfg.w);

    g.forecast_next.assign(n, -1);
    for (const auto& [tid, idxs] : g.ship_index) {
        for (std::size_t k = 0; k + 1 < idxs.size(); ++k)
            g.forecast_next[idxs[k]] = idxs[k + 1];
    }
    return g;
}

} // namespace

TemporalGraph init_graph(const Track& ship, int offset, const WindowConfig& cfg) {
    if (offset < 0 || offset + cfg.w > static_cast<int>(ship.points.size()))
        throw DataError("init_graph: window does not fit track " + ship.track_id);
    return assemble({{&ship, offset}}, cfg);
}

std::vector<TemporalGraph> build_multiship(
    const std::map<std::string, std::pair<const Track*, int>>& members,
    const WindowConfig& cfg, const ClusterAssignment& clusters) {
    // Group member tracks by cluster label; map iteration keeps the grouping
    // deterministic (sorted by track_id).
    std::map<int, std::vector<std::pair<const Track*, int>>> by_label;
    std::vector<std::pair<const Track*, int>> noise;
    for (const auto& [track_id, tw] : members) {
        const int label = clusters.of(track_id);
        if (label == kNoise)
            noise.push_back(tw);
        else
            by_label[label].push_back(tw);
    }
    std::vector<TemporalGraph> out;
    for (auto& [label, group] : by_label) out.push_back(assemble(group, cfg));
    for (const auto& [track, offset] : noise) out.push_back(init_graph(*track, offset, cfg));
    return out;
}

void standardize(TemporalGraph& graph) {
    const int n = graph.X.rows();
    if (n == 0) return;
    for (int j = 0; j < 5; ++j) {
        double mean = 0.0;
        for (int i = 0; i < n; ++i) mean += graph.X(i, j);
        mean /= n;
        double var = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = graph.X(i, j) - mean;
            var += d * d;
        }
        var /= n; // population variance, deterministic on tiny graphs
        double std = std::sqrt(var);
        if (std < 1e-12) std = 1.0; // constant column -> all zeros
        for (int i = 0; i < n; ++i) graph.X(i, j) = (graph.X(i, j) - mean) / std;
        if (graph.standardized) {
            // composition with the previous transform, so the stored pair
            // still maps standardized values back to raw units
            graph.feat_mean[j] = graph.feat_mean[j] + graph.feat_std[j] * mean;
            graph.feat_std[j] = graph.feat_std[j] * std;
        } else {
            graph.feat_mean[j] = mean;
            graph.feat_std[j] = std;
        }
    }
    graph.standardized = true;
}

bool is_dag(const TemporalGraph& graph) {
    const int n = static_cast<int>(graph.nodes.size());
    std::vector<int> indeg(n, 0);
    std::vector<std::vector<int>> adj(n);
    for (const auto& [u, v] : graph.edges) {
        adj[u].push_back(v);
        ++indeg[v];
    }
    std::vector<int> queue;
    for (int i = 0; i < n; ++i)
        if (indeg[i] == 0) queue.push_back(i);
    int visited = 0;
    while (!queue.empty()) {
        const int u = queue.back();
        queue.pop_back();
        ++visited;
        for (int v : adj[u])
            if (--indeg[v] == 0) queue.push_back(v);
    }
    return visited == n;
}

} // namespace tgad

#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tgad/clustering.hpp"
#include "tgad/ingest.hpp"
#include "tgad/tensor.hpp"

namespace tgad {

struct NodeId {
    std::string ship_id;
    std::string track_id;
    double t = 0.0;
};

struct WindowConfig {
    int w = 10;
    int step = 1;
};

// Timestamp-node graph over one window: every directed edge runs from a
// strictly earlier node to a strictly later one, so the graph is a DAG by
// construction. Features are standardized per graph (population std); the
// (mean, std) pair is retained for inverse transforms.
struct TemporalGraph {
    std::string id;
    std::vector<NodeId> nodes;
    Tensor X; // |V| x 5
    std::vector<std::pair<int, int>> edges; // (src, dst) node indices
    double window_start = 0.0;
    int window_len = 0;
    std::map<std::string, std::vector<int>> ship_index; // track_id -> node positions
    std::array<double, 5> feat_mean{};
    std::array<double, 5> feat_std{1, 1, 1, 1, 1};
    bool standardized = false;
    // Same-ship next-timestamp node, -1 for a window's final timestamp.
    std::vector<int> forecast_next;

    int edge_count() const { return static_cast<int>(edges.size()); }
    // Dense 0/1 adjacency over the node ordering; has exactly edge_count() ones.
    Tensor adjacency() const;
    // Raw-unit feature recovery: X * std + mean.
    Tensor inverse_standardized() const;
};

// Window start offsets (into the track's point list). Tracks shorter than w
// yield none.
std::vector<int> window_offsets(const Track& track, const WindowConfig& cfg);

// Complete temporal DAG over one ship's window: w(w-1)/2 edges.
TemporalGraph init_graph(const Track& ship, int offset, const WindowConfig& cfg);

// One merged graph per cluster label; the pair rule applies across all nodes
// of all member ships (cross-ship edges included, equal timestamps excluded),
// giving N^2 * w(w-1)/2 edges for N members. NOISE ships get solo graphs.
// `members` maps track_id -> (track, window offset).
std::vector<TemporalGraph> build_multiship(
    const std::map<std::string, std::pair<const Track*, int>>& members,
    const WindowConfig& cfg, const ClusterAssignment& clusters);

// In-place per-graph standardization of the feature columns. Constant
// columns use divisor 1 and become all-zero. Idempotent.
void standardize(TemporalGraph& graph);

// Topological-sort check used by tests and the acceptance suite.
bool is_dag(const TemporalGraph& graph);

} // namespace tgad

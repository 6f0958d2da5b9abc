#pragma once

#include <string>
#include <vector>

#include "tgad/clustering.hpp"
#include "tgad/detect.hpp"
#include "tgad/graphbuild.hpp"
#include "tgad/ingest.hpp"
#include "tgad/model.hpp"
#include "tgad/optim.hpp"
#include "tgad/synth.hpp"

namespace tgad {

// Canonical track file: one JSON object per line with ship_id, track_id, t,
// lat, lon, sog, cog, label. Readers tolerate a missing track_id (tracks are
// then re-derived by segmentation, which is idempotent) and missing labels.
void write_tracks_jsonl(const std::string& path, const std::vector<Track>& tracks);
std::vector<Track> read_tracks_jsonl(const std::string& path);

// Raw delimited form, suitable as parse_ais input.
void write_tracks_csv(const std::string& path, const std::vector<Track>& tracks,
                      const ColumnMap& columns = {});

void write_rejects_jsonl(const std::string& path, const std::vector<RejectedRow>& rejects);

// Line-delimited anomaly report: a summary object (gamma, GPD fit fields)
// first, then one line per point.
void write_report_jsonl(const std::string& path, const AnomalyReport& report);
AnomalyReport read_report_jsonl(const std::string& path);

// Debug/plot dump of one graph: node list, edge list, feature matrix.
std::string graph_to_json(const TemporalGraph& graph);

} // namespace tgad

#include "tgad/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tgad/errors.hpp"

namespace tgad {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open " + path + " for writing");
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open " + path);
    return is;
}

} // namespace

void write_tracks_jsonl(const std::string& path, const std::vector<Track>& tracks) {
    auto os = open_out(path);
    for (const Track& tr : tracks) {
        for (std::size_t i = 0; i < tr.points.size(); ++i) {
            const AisPoint& p = tr.points[i];
            json row{{"ship_id", p.ship_id}, {"track_id", tr.track_id}, {"t", p.t},
                     {"lat", p.lat},         {"lon", p.lon},            {"sog", p.sog},
                     {"cog", p.cog},
                     {"label", tr.has_labels() ? static_cast<int>(tr.labels[i]) : 0}};
            os << row.dump() << '\n';
        }
    }
}

std::vector<Track> read_tracks_jsonl(const std::string& path) {
    auto is = open_in(path);
    std::map<std::string, Track> by_track;
    std::vector<std::string> order;
    std::string line;
    std::size_t line_no = 0;
    bool any_missing_track_id = false;
    std::vector<AisPoint> loose_points;
    std::map<std::pair<std::string, long long>, int> loose_labels;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": bad JSON: " + e.what());
        }
        AisPoint p;
        p.ship_id = row.at("ship_id").get<std::string>();
        p.t = row.at("t").get<double>();
        p.lat = row.at("lat").get<double>();
        p.lon = row.at("lon").get<double>();
        p.sog = row.at("sog").get<double>();
        p.cog = row.at("cog").get<double>();
        const int label = row.value("label", 0);
        if (row.contains("track_id")) {
            const auto tid = row.at("track_id").get<std::string>();
            auto [it, inserted] = by_track.try_emplace(tid);
            if (inserted) {
                it->second.ship_id = p.ship_id;
                it->second.track_id = tid;
                order.push_back(tid);
            }
            it->second.points.push_back(p);
            it->second.labels.push_back(static_cast<std::uint8_t>(label != 0));
        } else {
            any_missing_track_id = true;
            loose_labels[{p.ship_id, std::llround(p.t * 1e6)}] = label;
            loose_points.push_back(std::move(p));
        }
    }
    std::vector<Track> out;
    for (const auto& tid : order) {
        Track tr = std::move(by_track.at(tid));
        bool labeled = false;
        for (auto l : tr.labels) labeled = labeled || l != 0;
        if (!labeled) tr.labels.clear();
        out.push_back(std::move(tr));
    }
    if (any_missing_track_id) {
        std::sort(loose_points.begin(), loose_points.end(),
                  [](const AisPoint& a, const AisPoint& b) {
                      return a.ship_id != b.ship_id ? a.ship_id < b.ship_id : a.t < b.t;
                  });
        for (Track& tr : segment_tracks(loose_points)) {
            bool labeled = false;
            tr.labels.assign(tr.points.size(), 0);
            for (std::size_t i = 0; i < tr.points.size(); ++i) {
                auto it = loose_labels.find(
                    {tr.points[i].ship_id, std::llround(tr.points[i].t * 1e6)});
                if (it != loose_labels.end() && it->second != 0) {
                    tr.labels[i] = 1;
                    labeled = true;
                }
            }
            if (!labeled) tr.labels.clear();
            out.push_back(std::move(tr));
        }
    }
    return out;
}

void write_tracks_csv(const std::string& path, const std::vector<Track>& tracks,
                      const ColumnMap& columns) {
    auto os = open_out(path);
    const char d = columns.delimiter;
    os << columns.ship_id << d << columns.t << d << columns.lat << d << columns.lon << d
       << columns.sog << d << columns.cog << '\n';
    os.precision(17);
    for (const Track& tr : tracks)
        for (const AisPoint& p : tr.points)
            os << p.ship_id << d << p.t << d << p.lat << d << p.lon << d << p.sog << d << p.cog
               << '\n';
}

void write_rejects_jsonl(const std::string& path, const std::vector<RejectedRow>& rejects) {
    auto os = open_out(path);
    for (const RejectedRow& r : rejects) {
        json row{{"line", r.line_no}, {"reason", r.reason}, {"raw", r.raw}};
        os << row.dump() << '\n';
    }
}

namespace {

json fit_to_json(const GpdFit& fit) {
    return json{{"u", fit.u},           {"xi", fit.xi},
                {"sigma", fit.sigma},   {"n", fit.n},
                {"n_exceed", fit.n_exceed}, {"z_q", fit.z_q},
                {"q", fit.q},           {"fallback", fit.fallback}};
}

GpdFit fit_from_json(const json& j) {
    GpdFit fit;
    fit.u = j.at("u").get<double>();
    fit.xi = j.at("xi").get<double>();
    fit.sigma = j.at("sigma").get<double>();
    fit.n = j.at("n").get<std::size_t>();
    fit.n_exceed = j.at("n_exceed").get<std::size_t>();
    fit.z_q = j.at("z_q").get<double>();
    fit.q = j.at("q").get<double>();
    fit.fallback = j.at("fallback").get<bool>();
    return fit;
}

} // namespace

void write_report_jsonl(const std::string& path, const AnomalyReport& report) {
    auto os = open_out(path);
    json summary{{"summary", json{{"gamma", report.gamma}, {"fit", fit_to_json(report.fit)},
                                  {"points", report.points.size()}}}};
    os << summary.dump() << '\n';
    for (const PointScore& p : report.points) {
        json row{{"ship_id", p.ship_id}, {"t", p.t},   {"E", p.E},
                 {"P", p.P},             {"RS", p.RS}, {"label", p.label ? 1 : 0}};
        os << row.dump() << '\n';
    }
}

AnomalyReport read_report_jsonl(const std::string& path) {
    auto is = open_in(path);
    AnomalyReport report;
    std::string line;
    bool have_summary = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const json row = json::parse(line);
        if (!have_summary) {
            const json& s = row.at("summary");
            report.gamma = s.at("gamma").get<double>();
            report.fit = fit_from_json(s.at("fit"));
            have_summary = true;
            continue;
        }
        PointScore p;
        p.ship_id = row.at("ship_id").get<std::string>();
        p.t = row.at("t").get<double>();
        p.E = row.at("E").get<double>();
        p.P = row.at("P").get<double>();
        p.RS = row.at("RS").get<double>();
        p.label = row.at("label").get<int>() != 0;
        report.points.push_back(std::move(p));
    }
    if (!have_summary) throw DataError(path + ": report has no summary line");
    return report;
}

std::string graph_to_json(const TemporalGraph& graph) {
    json nodes = json::array();
    for (const NodeId& n : graph.nodes)
        nodes.push_back(json{{"ship_id", n.ship_id}, {"track_id", n.track_id}, {"t", n.t}});
    json edges = json::array();
    for (const auto& [u, v] : graph.edges) edges.push_back(json::array({u, v}));
    json x = json::array();
    for (int i = 0; i < graph.X.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < graph.X.cols(); ++j) row.push_back(graph.X(i, j));
        x.push_back(std::move(row));
    }
    json out{{"id", graph.id},
             {"window_start", graph.window_start},
             {"window_len", graph.window_len},
             {"nodes", std::move(nodes)},
             {"edges", std::move(edges)},
             {"features", std::move(x)}};
    return out.dump();
}

} // namespace tgad

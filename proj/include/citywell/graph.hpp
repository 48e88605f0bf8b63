#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "citywell/corpus.hpp"
#include "citywell/error.hpp"

namespace citywell {

// Undirected simple graph over author names for one day of activity.
class DailyGraph {
public:
    int add_node(const std::string& name) {
        auto it = ids_.find(name);
        if (it != ids_.end()) return it->second;
        int id = static_cast<int>(names_.size());
        ids_.emplace(name, id);
        names_.push_back(name);
        adjacency_.emplace_back();
        return id;
    }

    // returns false when the edge already existed or would be a self-loop
    bool add_edge(const std::string& a, const std::string& b) {
        if (a == b) return false;
        int ia = add_node(a);
        int ib = add_node(b);
        auto& na = adjacency_[static_cast<size_t>(ia)];
        if (std::find(na.begin(), na.end(), ib) != na.end()) return false;
        na.push_back(ib);
        adjacency_[static_cast<size_t>(ib)].push_back(ia);
        ++edge_count_;
        return true;
    }

    int node_count() const { return static_cast<int>(names_.size()); }
    int edge_count() const { return edge_count_; }
    const std::vector<int>& neighbors(int id) const { return adjacency_[static_cast<size_t>(id)]; }
    const std::string& name(int id) const { return names_[static_cast<size_t>(id)]; }

    int missing_parents = 0;  // comments whose parent id was not in the corpus

private:
    std::unordered_map<std::string, int> ids_;
    std::vector<std::string> names_;
    std::vector<std::vector<int>> adjacency_;
    int edge_count_ = 0;
};

struct GraphMetrics {
    double node_count = 0;
    double edge_count = 0;
    double mean_degree = 0;
    double density = 0;
    double cc_count = 0;
    double mean_eccentricity = 0;
    double mean_cc_size = 0;
    double mean_shortest_path = 0;
    double diameter = 0;
};

// One bucket of daily records becomes one graph: every non-sentinel author
// active that day is a node, and each comment links its author to the parent
// record's author. Parents resolved outside the day still enter as nodes
// because the edge needs both endpoints.
inline DailyGraph build_daily_graph(const CorpusIndex& index, const std::string& community, Day day,
                                    const std::set<std::string>& sentinel_authors) {
    DailyGraph g;
    auto sentinel = [&](const std::string& a) { return sentinel_authors.count(a) > 0; };
    const auto& buckets = index.days(community);
    auto it = buckets.find(day);
    if (it == buckets.end()) return g;
    for (uint32_t ri : it->second) {
        const Record& rec = index.record(ri);
        if (!sentinel(rec.author)) g.add_node(rec.author);
        if (rec.kind != RecordKind::comment) continue;
        int64_t pi = index.find_id(rec.parent_id);
        if (pi < 0) {
            ++g.missing_parents;
            continue;
        }
        const Record& parent = index.record(static_cast<size_t>(pi));
        if (sentinel(rec.author) || sentinel(parent.author)) continue;
        g.add_edge(rec.author, parent.author);
    }
    return g;
}

// All summary metrics from one BFS per node. Distances are within connected
// components; the single-node conventions (density, eccentricity, diameter,
// mean path all 0) keep every metric defined.
inline GraphMetrics graph_metrics(const DailyGraph& g) {
    const int n = g.node_count();
    if (n < 1) throw InputError("graph metrics need at least one node");
    GraphMetrics m;
    m.node_count = n;
    m.edge_count = g.edge_count();
    m.mean_degree = 2.0 * g.edge_count() / static_cast<double>(n);
    m.density = n > 1 ? 2.0 * g.edge_count() / (static_cast<double>(n) * (n - 1)) : 0.0;

    std::vector<int> component(static_cast<size_t>(n), -1);
    int n_components = 0;
    std::vector<int> component_size;
    for (int start = 0; start < n; ++start) {
        if (component[static_cast<size_t>(start)] >= 0) continue;
        int c = n_components++;
        component_size.push_back(0);
        std::deque<int> queue{start};
        component[static_cast<size_t>(start)] = c;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            ++component_size[static_cast<size_t>(c)];
            for (int v : g.neighbors(u)) {
                if (component[static_cast<size_t>(v)] < 0) {
                    component[static_cast<size_t>(v)] = c;
                    queue.push_back(v);
                }
            }
        }
    }
    m.cc_count = n_components;
    m.mean_cc_size = static_cast<double>(n) / n_components;

    double ecc_sum = 0.0;
    double dist_sum = 0.0;
    int64_t pair_count = 0;
    double diameter = 0.0;
    std::vector<int> dist(static_cast<size_t>(n));
    for (int start = 0; start < n; ++start) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[static_cast<size_t>(start)] = 0;
        std::deque<int> queue{start};
        int ecc = 0;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            int du = dist[static_cast<size_t>(u)];
            ecc = std::max(ecc, du);
            if (u != start) {
                dist_sum += du;
                ++pair_count;
            }
            for (int v : g.neighbors(u)) {
                if (dist[static_cast<size_t>(v)] < 0) {
                    dist[static_cast<size_t>(v)] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        ecc_sum += ecc;
        diameter = std::max(diameter, static_cast<double>(ecc));
    }
    m.mean_eccentricity = ecc_sum / n;
    m.mean_shortest_path = pair_count > 0 ? dist_sum / static_cast<double>(pair_count) : 0.0;
    m.diameter = diameter;
    return m;
}

inline GraphMetrics average_graph_metrics(const std::vector<GraphMetrics>& days) {
    if (days.empty()) throw InputError("no active days to average graph metrics over");
    GraphMetrics m;
    for (const auto& d : days) {
        m.node_count += d.node_count;
        m.edge_count += d.edge_count;
        m.mean_degree += d.mean_degree;
        m.density += d.density;
        m.cc_count += d.cc_count;
        m.mean_eccentricity += d.mean_eccentricity;
        m.mean_cc_size += d.mean_cc_size;
        m.mean_shortest_path += d.mean_shortest_path;
        m.diameter += d.diameter;
    }
    double n = static_cast<double>(days.size());
    m.node_count /= n;
    m.edge_count /= n;
    m.mean_degree /= n;
    m.density /= n;
    m.cc_count /= n;
    m.mean_eccentricity /= n;
    m.mean_cc_size /= n;
    m.mean_shortest_path /= n;
    m.diameter /= n;
    return m;
}

// Daily graphs over a window, averaged over days that produced a node.
inline GraphMetrics community_graph_metrics(const CorpusIndex& index, const std::string& community,
                                            DateRange window,
                                            const std::set<std::string>& sentinel_authors) {
    std::vector<GraphMetrics> per_day;
    const auto& buckets = index.days(community);
    for (auto it = buckets.lower_bound(window.first);
         it != buckets.end() && it->first <= window.last; ++it) {
        DailyGraph g = build_daily_graph(index, community, it->first, sentinel_authors);
        if (g.node_count() >= 1) per_day.push_back(graph_metrics(g));
    }
    return average_graph_metrics(per_day);
}

}  // namespace citywell

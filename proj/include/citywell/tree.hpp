#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "citywell/corpus.hpp"
#include "citywell/error.hpp"

namespace citywell {

// Reply tree for one submission. Node 0 is always the root.
struct CommentTree {
    struct Node {
        std::string id;
        int64_t created_at = 0;
        int parent = -1;
        std::vector<int> children;
    };
    std::vector<Node> nodes;
    int orphan_count = 0;  // comments re-rooted because their parent is absent

    int size() const { return static_cast<int>(nodes.size()); }
};

struct TreeMetrics {
    double tree_size = 0;
    double direct_reply_count = 0;
    double leaf_node_count = 0;
    double max_level_width = 0;
    double min_response_time_seconds = 0;
};

// Comments attach to their parent once it is present; a comment whose parent
// never shows up (deleted upstream, truncated archive, or a pointer cycle)
// becomes a direct child of the root and is counted as an orphan. Attachment
// order is (created_at, id), so the shape is deterministic.
inline CommentTree build_tree(const Record& submission, std::vector<const Record*> comments) {
    CommentTree tree;
    CommentTree::Node root;
    root.id = submission.id;
    root.created_at = submission.created_at;
    tree.nodes.push_back(std::move(root));

    std::sort(comments.begin(), comments.end(), [](const Record* a, const Record* b) {
        if (a->created_at != b->created_at) return a->created_at < b->created_at;
        return a->id < b->id;
    });

    std::unordered_map<std::string, int> placed{{submission.id, 0}};
    std::vector<bool> done(comments.size(), false);
    size_t remaining = comments.size();
    auto attach = [&](const Record* c, int parent) {
        int node_id = tree.size();
        CommentTree::Node n;
        n.id = c->id;
        n.created_at = c->created_at;
        n.parent = parent;
        tree.nodes.push_back(std::move(n));
        tree.nodes[static_cast<size_t>(parent)].children.push_back(node_id);
        placed.emplace(c->id, node_id);
    };

    while (remaining > 0) {
        bool progressed = false;
        for (size_t i = 0; i < comments.size(); ++i) {
            if (done[i]) continue;
            auto it = placed.find(comments[i]->parent_id);
            if (it == placed.end()) continue;
            attach(comments[i], it->second);
            done[i] = true;
            --remaining;
            progressed = true;
        }
        if (progressed) continue;
        // stalled: earliest unplaced comment is re-rooted, then retry
        for (size_t i = 0; i < comments.size(); ++i) {
            if (done[i]) continue;
            attach(comments[i], 0);
            done[i] = true;
            --remaining;
            ++tree.orphan_count;
            break;
        }
    }
    return tree;
}

inline TreeMetrics tree_metrics(const CommentTree& tree) {
    TreeMetrics m;
    const int n = tree.size();
    m.tree_size = n;
    m.direct_reply_count = static_cast<double>(tree.nodes[0].children.size());
    if (n == 1) {
        m.leaf_node_count = 1;  // a bare post is its own leaf
        return m;
    }
    std::vector<int> depth(static_cast<size_t>(n), 0);
    std::vector<int> width;
    int leaves = 0;
    int64_t earliest = 0;
    bool first = true;
    for (int i = 1; i < n; ++i) {
        const auto& node = tree.nodes[static_cast<size_t>(i)];
        depth[static_cast<size_t>(i)] = depth[static_cast<size_t>(node.parent)] + 1;
        int d = depth[static_cast<size_t>(i)];
        if (d > static_cast<int>(width.size())) width.resize(static_cast<size_t>(d), 0);
        ++width[static_cast<size_t>(d - 1)];
        if (node.children.empty()) ++leaves;
        if (first || node.created_at < earliest) {
            earliest = node.created_at;
            first = false;
        }
    }
    m.leaf_node_count = leaves;
    m.max_level_width = *std::max_element(width.begin(), width.end());
    m.min_response_time_seconds =
        static_cast<double>(std::max<int64_t>(0, earliest - tree.nodes[0].created_at));
    return m;
}

// Per-metric mean over posts; response time only over posts that drew any
// comment at all.
inline TreeMetrics average_tree_metrics(const std::vector<TreeMetrics>& posts) {
    if (posts.empty()) throw InputError("no posts to average tree metrics over");
    TreeMetrics m;
    int commented = 0;
    for (const auto& p : posts) {
        m.tree_size += p.tree_size;
        m.direct_reply_count += p.direct_reply_count;
        m.leaf_node_count += p.leaf_node_count;
        m.max_level_width += p.max_level_width;
        if (p.tree_size > 1) {
            m.min_response_time_seconds += p.min_response_time_seconds;
            ++commented;
        }
    }
    double n = static_cast<double>(posts.size());
    m.tree_size /= n;
    m.direct_reply_count /= n;
    m.leaf_node_count /= n;
    m.max_level_width /= n;
    m.min_response_time_seconds =
        commented > 0 ? m.min_response_time_seconds / commented : 0.0;
    return m;
}

// Builds one tree per submission created inside the window; comments join
// their thread through link_id wherever they were created.
inline TreeMetrics community_tree_metrics(const CorpusIndex& index, const std::string& community,
                                          DateRange window) {
    std::unordered_map<std::string, std::vector<const Record*>> thread_comments;
    std::vector<uint32_t> submissions;
    const auto& buckets = index.days(community);
    for (const auto& [day, records] : buckets) {
        for (uint32_t ri : records) {
            const Record& rec = index.record(ri);
            if (rec.kind == RecordKind::submission) {
                if (day >= window.first && day <= window.last) submissions.push_back(ri);
            } else if (!rec.link_id.empty()) {
                thread_comments[rec.link_id].push_back(&rec);
            }
        }
    }
    std::vector<TreeMetrics> per_post;
    per_post.reserve(submissions.size());
    for (uint32_t ri : submissions) {
        const Record& sub = index.record(ri);
        auto it = thread_comments.find(sub.id);
        std::vector<const Record*> comments;
        if (it != thread_comments.end()) comments = it->second;
        per_post.push_back(tree_metrics(build_tree(sub, std::move(comments))));
    }
    return average_tree_metrics(per_post);
}

}  // namespace citywell

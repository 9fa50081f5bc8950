#include "subgcache/retrieval.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "subgcache/errors.hpp"

namespace subgcache {

RetrievalStrategy retrieval_strategy_from_string(const std::string& name) {
    if (name == "g-retriever" || name == "node-edge-topk") return RetrievalStrategy::NodeEdgeTopK;
    if (name == "grag" || name == "ego-topk") return RetrievalStrategy::EgoTopK;
    throw DomainError("unknown retrieval strategy: " + name);
}

std::string to_string(RetrievalStrategy s) {
    return s == RetrievalStrategy::NodeEdgeTopK ? "node-edge-topk" : "ego-topk";
}

void RetrievalConfig::validate() const {
    if (k < 1) throw DomainError("retrieval k must be >= 1");
    if (ego_hops < 1) throw DomainError("ego hops must be >= 1");
    if (edge_cost < 0) throw DomainError("edge cost must be >= 0");
}

namespace {

// Undirected adjacency view over a directed edge list, neighbors sorted by
// (node id, edge index) for deterministic traversal.
struct Adjacency {
    std::vector<NodeId> ids;  // ascending
    std::unordered_map<NodeId, uint32_t> index_of;
    std::vector<std::vector<std::pair<NodeId, uint32_t>>> nbrs;

    explicit Adjacency(const TextualGraph& g) {
        ids.reserve(g.nodes.size());
        for (const auto& [id, _] : g.nodes) {
            index_of.emplace(id, static_cast<uint32_t>(ids.size()));
            ids.push_back(id);
        }
        nbrs.resize(ids.size());
        for (uint32_t ei = 0; ei < g.edges.size(); ++ei) {
            const Edge& e = g.edges[ei];
            nbrs[index_of.at(e.src)].push_back({e.dst, ei});
            nbrs[index_of.at(e.dst)].push_back({e.src, ei});
        }
        for (auto& v : nbrs) std::sort(v.begin(), v.end());
    }
};

// BFS shortest path between two nodes; returns edge indices along the path,
// empty if unreachable. First-discovery parents with sorted neighbor order
// make the path unique.
std::vector<uint32_t> shortest_path(const Adjacency& adj, NodeId from, NodeId to) {
    if (from == to) return {};
    std::vector<int64_t> parent_edge(adj.ids.size(), -1);
    std::vector<int64_t> parent_node(adj.ids.size(), -1);
    std::vector<bool> seen(adj.ids.size(), false);
    std::deque<uint32_t> queue;
    uint32_t s = adj.index_of.at(from), t = adj.index_of.at(to);
    seen[s] = true;
    queue.push_back(s);
    while (!queue.empty()) {
        uint32_t u = queue.front();
        queue.pop_front();
        if (u == t) break;
        for (const auto& [nid, ei] : adj.nbrs[u]) {
            uint32_t v = adj.index_of.at(nid);
            if (seen[v]) continue;
            seen[v] = true;
            parent_edge[v] = ei;
            parent_node[v] = u;
            queue.push_back(v);
        }
    }
    if (!seen[t]) return {};
    std::vector<uint32_t> path;
    for (uint32_t cur = t; cur != s; cur = static_cast<uint32_t>(parent_node[cur])) {
        path.push_back(static_cast<uint32_t>(parent_edge[cur]));
    }
    std::reverse(path.begin(), path.end());
    return path;
}

// Indices of the k largest scores, ties toward the smaller index.
std::vector<uint32_t> top_k_indices(const std::vector<double>& scores, uint32_t k) {
    std::vector<uint32_t> order(scores.size());
    for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](uint32_t a, uint32_t b) { return scores[a] > scores[b]; });
    if (order.size() > k) order.resize(k);
    return order;
}

Subgraph retrieve_node_edge_topk(const RetrievalConfig& cfg, const TextualGraph& g,
                                 const EmbeddingVec& q_emb, const TextEncoder& enc) {
    std::vector<NodeId> node_ids;
    std::vector<double> node_scores;
    node_ids.reserve(g.nodes.size());
    for (const auto& [id, attr] : g.nodes) {
        node_ids.push_back(id);
        node_scores.push_back(cosine_similarity(q_emb, enc.embed(attr)));
    }
    std::vector<double> edge_scores(g.edges.size());
    for (uint32_t ei = 0; ei < g.edges.size(); ++ei) {
        edge_scores[ei] = cosine_similarity(q_emb, enc.embed(g.edges[ei].attr));
    }

    Subgraph s;
    s.parent = &g;
    std::vector<uint32_t> top_nodes = top_k_indices(node_scores, cfg.k);
    for (uint32_t i : top_nodes) s.node_ids.insert(node_ids[i]);
    std::set<NodeId> seeds = s.node_ids;  // scored selection, before closure fills

    // Top-k edges by similarity; an edge is retained when its score clears
    // the edge cost, or when both endpoints were already selected as nodes.
    for (uint32_t ei : top_k_indices(edge_scores, cfg.k)) {
        const Edge& e = g.edges[ei];
        bool covered = seeds.count(e.src) && seeds.count(e.dst);
        if (edge_scores[ei] >= cfg.edge_cost || covered) {
            s.edge_indices.insert(ei);
            s.node_ids.insert(e.src);
            s.node_ids.insert(e.dst);
        }
    }

    // Connect the scored seed nodes pairwise when a shortest path is cheap
    // enough: path length * edge cost <= similarity gain of the endpoints.
    Adjacency adj(g);
    auto score_of = [&](NodeId id) {
        size_t i = std::lower_bound(node_ids.begin(), node_ids.end(), id) - node_ids.begin();
        return std::max(0.0, node_scores[i]);
    };
    for (auto it = seeds.begin(); it != seeds.end(); ++it) {
        for (auto jt = std::next(it); jt != seeds.end(); ++jt) {
            std::vector<uint32_t> path = shortest_path(adj, *it, *jt);
            if (path.empty()) continue;  // unreachable (or same node)
            double gain = score_of(*it) + score_of(*jt);
            if (static_cast<double>(path.size()) * cfg.edge_cost > gain) continue;
            for (uint32_t ei : path) {
                s.edge_indices.insert(ei);
                s.node_ids.insert(g.edges[ei].src);
                s.node_ids.insert(g.edges[ei].dst);
            }
        }
    }
    return s;
}

Subgraph retrieve_ego_topk(const RetrievalConfig& cfg, const TextualGraph& g,
                           const EmbeddingVec& q_emb, const TextEncoder& enc) {
    std::vector<NodeId> node_ids;
    std::vector<double> node_scores;
    for (const auto& [id, attr] : g.nodes) {
        node_ids.push_back(id);
        node_scores.push_back(cosine_similarity(q_emb, enc.embed(attr)));
    }
    std::vector<uint32_t> centers = top_k_indices(node_scores, cfg.ego_entity_cap);

    Adjacency adj(g);
    struct EgoNet {
        NodeId center;
        Subgraph sub;
        double score;
    };
    std::vector<EgoNet> egos;
    for (uint32_t ci : centers) {
        NodeId center = node_ids[ci];
        // nodes within `ego_hops`, induced edges
        std::set<NodeId> members{center};
        std::deque<std::pair<NodeId, uint32_t>> queue{{center, 0}};
        std::set<NodeId> visited{center};
        while (!queue.empty()) {
            auto [u, depth] = queue.front();
            queue.pop_front();
            if (depth == cfg.ego_hops) continue;
            for (const auto& [nid, ei] : adj.nbrs[adj.index_of.at(u)]) {
                (void)ei;
                if (visited.insert(nid).second) {
                    members.insert(nid);
                    queue.push_back({nid, depth + 1});
                }
            }
        }
        EgoNet net;
        net.center = center;
        net.sub.parent = &g;
        net.sub.node_ids = members;
        for (uint32_t ei = 0; ei < g.edges.size(); ++ei) {
            if (members.count(g.edges[ei].src) && members.count(g.edges[ei].dst)) {
                net.sub.edge_indices.insert(ei);
            }
        }
        // pooled feature: mean of node and edge attribute embeddings
        std::vector<double> pooled(enc.dim(), 0.0);
        size_t count = 0;
        for (NodeId id : net.sub.node_ids) {
            EmbeddingVec e = enc.embed(g.nodes.at(id));
            for (size_t d = 0; d < pooled.size(); ++d) pooled[d] += e[d];
            ++count;
        }
        for (uint32_t ei : net.sub.edge_indices) {
            EmbeddingVec e = enc.embed(g.edges[ei].attr);
            for (size_t d = 0; d < pooled.size(); ++d) pooled[d] += e[d];
            ++count;
        }
        EmbeddingVec pooled_f(enc.dim());
        for (size_t d = 0; d < pooled.size(); ++d) {
            pooled_f[d] = static_cast<float>(pooled[d] / static_cast<double>(count));
        }
        net.score = cosine_similarity(q_emb, pooled_f);
        egos.push_back(std::move(net));
    }

    std::stable_sort(egos.begin(), egos.end(), [](const EgoNet& a, const EgoNet& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.center < b.center;
    });
    if (egos.size() > cfg.k) egos.resize(cfg.k);

    std::vector<Subgraph> parts;
    parts.reserve(egos.size());
    for (EgoNet& e : egos) parts.push_back(std::move(e.sub));
    return merge_subgraphs(parts);
}

}  // namespace

Subgraph retrieve(const RetrievalConfig& cfg, const TextualGraph& g, const QueryRecord& q,
                  const TextEncoder& enc) {
    cfg.validate();
    if (g.nodes.empty()) throw DomainError("retrieve: graph has no nodes");
    EmbeddingVec q_emb = enc.embed(q.question);
    Subgraph s = cfg.strategy == RetrievalStrategy::NodeEdgeTopK
                     ? retrieve_node_edge_topk(cfg, g, q_emb, enc)
                     : retrieve_ego_topk(cfg, g, q_emb, enc);
    s.validate();
    return s;
}

}  // namespace subgcache

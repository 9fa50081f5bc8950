#pragma once

#include <cstdint>
#include <string>

#include "subgcache/encoders.hpp"
#include "subgcache/graph_store.hpp"

namespace subgcache {

// node-edge-topk mirrors G-Retriever's top-k node/edge selection with a
// cost-gated path connection step; ego-topk mirrors GRAG's scored k-hop ego
// networks.
enum class RetrievalStrategy { NodeEdgeTopK, EgoTopK };

RetrievalStrategy retrieval_strategy_from_string(const std::string& name);
std::string to_string(RetrievalStrategy s);

struct RetrievalConfig {
    RetrievalStrategy strategy = RetrievalStrategy::NodeEdgeTopK;
    uint32_t k = 3;
    double edge_cost = 0.5;
    uint32_t ego_hops = 2;
    uint32_t ego_entity_cap = 10;

    void validate() const;
};

// Maps a query to its retrieved subgraph. Deterministic: similarity ties
// break by ascending node id / edge index, path search expands neighbors in
// ascending order. The result always satisfies the subgraph closure
// invariant, and for node-edge-topk the retrieved node set grows
// monotonically with k.
Subgraph retrieve(const RetrievalConfig& cfg, const TextualGraph& g, const QueryRecord& q,
                  const TextEncoder& enc);

}  // namespace subgcache

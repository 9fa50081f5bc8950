#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "subgcache/errors.hpp"
#include "subgcache/retrieval.hpp"
#include "subgcache/rng.hpp"
#include "support/paths.hpp"

using namespace subgcache;

namespace {

TextualGraph scene_graph() {
    return load_graph_csv(testsupport::data_path("scene_graph/nodes.csv"),
                          testsupport::data_path("scene_graph/edges.csv"));
}

QueryRecord query(const std::string& text) { return {0, text, ""}; }

TextualGraph random_graph(SplitMix64& rng, size_t n_nodes, size_t n_edges) {
    static const char* words[] = {"red", "blue", "table", "chair", "lamp", "window",
                                  "left", "right", "above", "below", "cat", "dog"};
    TextualGraph g;
    for (NodeId i = 0; i < n_nodes; ++i) {
        g.nodes[i] = std::string("name: ") + words[rng.next() % 12] + " " +
                     words[rng.next() % 12];
    }
    for (size_t e = 0; e < n_edges; ++e) {
        NodeId a = static_cast<NodeId>(rng.next() % n_nodes);
        NodeId b = static_cast<NodeId>(rng.next() % n_nodes);
        g.edges.push_back({a, words[rng.next() % 12], b});
    }
    return g;
}

}  // namespace

TEST_CASE("exact attribute match with k=1 retrieves exactly that node") {
    TextualGraph g = scene_graph();
    TextEncoder enc;
    RetrievalConfig cfg;
    cfg.k = 1;
    Subgraph s = retrieve(cfg, g, query(g.nodes.at(2)), enc);
    CHECK(s.node_ids == std::set<NodeId>{2});
    CHECK(s.edge_indices.empty());
}

TEST_CASE("saturating k returns the full graph") {
    TextualGraph g = scene_graph();
    TextEncoder enc;
    RetrievalConfig cfg;
    cfg.k = 1000;
    Subgraph s = retrieve(cfg, g, query("anything at all"), enc);
    CHECK(s == full_subgraph(g));
}

TEST_CASE("cords query ranks node 2 into the default top-k") {
    TextualGraph g = scene_graph();
    TextEncoder enc;
    RetrievalConfig cfg;  // defaults: node-edge-topk, k=3, edge cost 0.5
    Subgraph s = retrieve(cfg, g, query("What is the color of the cords?"), enc);
    CHECK(s.node_ids.count(2) == 1);
    s.validate();
}

TEST_CASE("retrieval is deterministic") {
    TextualGraph g = scene_graph();
    TextEncoder enc;
    for (RetrievalStrategy strat : {RetrievalStrategy::NodeEdgeTopK, RetrievalStrategy::EgoTopK}) {
        RetrievalConfig cfg;
        cfg.strategy = strat;
        Subgraph a = retrieve(cfg, g, query("Where is the man with the camera?"), enc);
        Subgraph b = retrieve(cfg, g, query("Where is the man with the camera?"), enc);
        CHECK(a == b);
    }
}

TEST_CASE("closure invariant holds on random graphs and queries") {
    SplitMix64 rng(31);
    TextEncoder enc;
    static const char* queries[] = {"where is the red table", "blue dog above the lamp",
                                    "cat below window", "chair to the right"};
    for (int iter = 0; iter < 30; ++iter) {
        TextualGraph g = random_graph(rng, 8 + rng.next() % 20, 12 + rng.next() % 40);
        for (RetrievalStrategy strat :
             {RetrievalStrategy::NodeEdgeTopK, RetrievalStrategy::EgoTopK}) {
            RetrievalConfig cfg;
            cfg.strategy = strat;
            cfg.k = 1 + rng.next() % 5;
            Subgraph s = retrieve(cfg, g, query(queries[iter % 4]), enc);
            CHECK_NOTHROW(s.validate());
            CHECK_FALSE(s.empty());
        }
    }
}

TEST_CASE("node set grows monotonically with k for node-edge-topk") {
    SplitMix64 rng(32);
    TextEncoder enc;
    for (int iter = 0; iter < 15; ++iter) {
        TextualGraph g = random_graph(rng, 10 + rng.next() % 15, 20 + rng.next() % 30);
        QueryRecord q = query("red chair above the blue table");
        std::set<NodeId> prev;
        for (uint32_t k = 1; k <= 8; ++k) {
            RetrievalConfig cfg;
            cfg.k = k;
            Subgraph s = retrieve(cfg, g, q, enc);
            for (NodeId id : prev) CHECK(s.node_ids.count(id) == 1);
            prev = s.node_ids;
        }
    }
}

TEST_CASE("ego-topk unions the best-scoring ego networks") {
    // star around node 0 plus a far pair; query matches the star's center
    TextualGraph g;
    g.nodes[0] = "name: sun";
    g.nodes[1] = "name: planet one";
    g.nodes[2] = "name: planet two";
    g.nodes[3] = "name: rock";
    g.nodes[4] = "name: dust";
    g.edges.push_back({0, "orbits", 1});
    g.edges.push_back({0, "orbits", 2});
    g.edges.push_back({3, "near", 4});

    TextEncoder enc;
    RetrievalConfig cfg;
    cfg.strategy = RetrievalStrategy::EgoTopK;
    cfg.k = 2;  // the two best egos both sit around the sun
    cfg.ego_hops = 1;
    Subgraph s = retrieve(cfg, g, query("sun orbits planet"), enc);
    CHECK(s.node_ids.count(0) == 1);
    CHECK(s.node_ids.count(1) == 1);
    CHECK(s.node_ids.count(2) == 1);
    CHECK(s.node_ids.count(3) == 0);
    s.validate();
}

TEST_CASE("empty graph and invalid knobs are domain errors") {
    TextualGraph g;
    TextEncoder enc;
    RetrievalConfig cfg;
    CHECK_THROWS_AS(retrieve(cfg, g, query("hm"), enc), DomainError);
    cfg.k = 0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    RetrievalConfig cfg2;
    cfg2.edge_cost = -1;
    CHECK_THROWS_AS(cfg2.validate(), DomainError);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "subgcache/encoders.hpp"
#include "subgcache/errors.hpp"
#include "subgcache/rng.hpp"
#include "support/paths.hpp"

using namespace subgcache;

namespace {

TextualGraph scene_graph() {
    return load_graph_csv(testsupport::data_path("scene_graph/nodes.csv"),
                          testsupport::data_path("scene_graph/edges.csv"));
}

double norm_of(const EmbeddingVec& v) {
    double n = 0;
    for (float x : v) n += static_cast<double>(x) * x;
    return std::sqrt(n);
}

// Random relabeling of node ids; edge indices keep their order.
TextualGraph relabel(const TextualGraph& g, SplitMix64& rng) {
    std::vector<NodeId> old_ids;
    for (const auto& [id, _] : g.nodes) old_ids.push_back(id);
    std::vector<NodeId> new_ids(old_ids.size());
    for (size_t i = 0; i < new_ids.size(); ++i) new_ids[i] = static_cast<NodeId>(1000 + 7 * i);
    for (size_t i = new_ids.size(); i > 1; --i) {
        std::swap(new_ids[i - 1], new_ids[rng.next() % i]);
    }
    std::map<NodeId, NodeId> remap;
    for (size_t i = 0; i < old_ids.size(); ++i) remap[old_ids[i]] = new_ids[i];

    TextualGraph out;
    out.directed = g.directed;
    for (const auto& [id, attr] : g.nodes) out.nodes[remap[id]] = attr;
    for (const Edge& e : g.edges) out.edges.push_back({remap[e.src], e.attr, remap[e.dst]});
    return out;
}

}  // namespace

TEST_CASE("text embeddings are deterministic and unit norm") {
    TextEncoder enc;
    EmbeddingVec a = enc.embed("blue");
    CHECK(a == enc.embed("blue"));
    CHECK(norm_of(a) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0).epsilon(1e-9));

    EmbeddingVec empty = enc.embed("");
    CHECK(norm_of(empty) == 0.0);
    // no alphanumeric tokens behaves like empty text
    CHECK(norm_of(enc.embed("?!&  --")) == 0.0);
}

TEST_CASE("shared tokens pull texts together") {
    TextEncoder enc;
    EmbeddingVec bc = enc.embed("blue cords");
    double to_blue = cosine_similarity(bc, enc.embed("blue"));
    double to_window = cosine_similarity(bc, enc.embed("window"));
    CHECK(to_blue > to_window);

    // case-insensitive tokenization
    CHECK(enc.embed("BLUE Cords") == bc);
}

TEST_CASE("different salts give different embeddings") {
    TextEncoder a({64, 1, 1}), b({64, 1, 2});
    CHECK(a.embed("blue") != b.embed("blue"));
}

TEST_CASE("encode_subgraph is deterministic, unit norm, and rejects empties") {
    TextualGraph g = scene_graph();
    TextEncoder enc;
    GnnEncoder gnn;
    Subgraph s = full_subgraph(g);
    EmbeddingVec e1 = gnn.encode(enc, s);
    CHECK(e1 == gnn.encode(enc, s));
    CHECK(norm_of(e1) == doctest::Approx(1.0).epsilon(1e-6));

    Subgraph empty;
    empty.parent = &g;
    CHECK_THROWS_AS(gnn.encode(enc, empty), DomainError);
}

TEST_CASE("isolated node equals the composed layer map of its text feature") {
    TextualGraph g = scene_graph();
    TextEncoder enc;
    GnnEncoder gnn;

    Subgraph s;
    s.parent = &g;
    s.node_ids = {2};

    EmbeddingVec feat = enc.embed(g.nodes.at(2));
    std::vector<double> h(feat.begin(), feat.end());
    for (uint32_t l = 0; l < gnn.config().layers; ++l) h = gnn.apply_layer(l, h);
    double norm = 0;
    for (double v : h) norm += v * v;
    norm = std::sqrt(norm);

    EmbeddingVec got = gnn.encode(enc, s);
    for (size_t k = 0; k < h.size(); ++k) {
        CHECK(got[k] == doctest::Approx(h[k] / norm).epsilon(1e-7));
    }
}

TEST_CASE("permutation invariance under node relabeling") {
    TextualGraph g = scene_graph();
    TextEncoder enc;
    GnnEncoder gnn;
    EmbeddingVec ref = gnn.encode(enc, full_subgraph(g));

    SplitMix64 rng(4242);
    for (int iter = 0; iter < 25; ++iter) {
        TextualGraph h = relabel(g, rng);
        EmbeddingVec got = gnn.encode(enc, full_subgraph(h));
        for (size_t k = 0; k < ref.size(); ++k) {
            CHECK(std::abs(ref[k] - got[k]) <= 1e-6);
        }
    }
}

TEST_CASE("edge-list reordering does not change the embedding") {
    TextualGraph g = scene_graph();
    TextualGraph g2 = g;
    std::reverse(g2.edges.begin(), g2.edges.end());
    TextEncoder enc;
    GnnEncoder gnn;
    EmbeddingVec a = gnn.encode(enc, full_subgraph(g));
    EmbeddingVec b = gnn.encode(enc, full_subgraph(g2));
    for (size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-6);
}

TEST_CASE("text and structure perturbations move the embedding") {
    TextualGraph g = scene_graph();
    TextEncoder enc;
    GnnEncoder gnn;
    EmbeddingVec ref = gnn.encode(enc, full_subgraph(g));

    TextualGraph changed = g;
    changed.nodes[2] = "name: cords; attribute: green";
    CHECK(gnn.encode(enc, full_subgraph(changed)) != ref);

    TextualGraph no_edges = g;
    no_edges.edges.clear();
    CHECK(gnn.encode(enc, full_subgraph(no_edges)) != ref);
}

TEST_CASE("unit-norm embeddings keep pairwise distances in [0, 2]") {
    TextualGraph g = scene_graph();
    TextEncoder enc;
    GnnEncoder gnn;
    SplitMix64 rng(7);
    std::vector<EmbeddingVec> embs;
    for (int i = 0; i < 12; ++i) {
        Subgraph s;
        s.parent = &g;
        for (const auto& [id, _] : g.nodes) {
            if (rng.next() % 3 == 0) s.node_ids.insert(id);
        }
        if (s.node_ids.empty()) s.node_ids.insert(1);
        embs.push_back(gnn.encode(enc, s));
    }
    for (const auto& a : embs) {
        for (const auto& b : embs) {
            double d = euclidean_distance(a, b);
            CHECK(d >= 0.0);
            CHECK(d <= 2.0 + 1e-9);
        }
    }
}

TEST_CASE("dim mismatches are domain errors") {
    TextEncoder small({32, 1, 1});
    GnnEncoder gnn;  // dim 64
    TextualGraph g = scene_graph();
    CHECK_THROWS_AS(gnn.encode(small, full_subgraph(g)), DomainError);
    CHECK_THROWS_AS(cosine_similarity(EmbeddingVec(3), EmbeddingVec(4)), DomainError);
}

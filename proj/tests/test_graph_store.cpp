#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "subgcache/errors.hpp"
#include "subgcache/graph_store.hpp"
#include "subgcache/rng.hpp"
#include "support/paths.hpp"

using namespace subgcache;

namespace {

TextualGraph parse_strings(const std::string& nodes, const std::string& edges,
                           bool undirected = false) {
    std::istringstream nf(nodes), ef(edges);
    return parse_graph_csv(nf, ef, undirected);
}

TextualGraph scene_graph() {
    return load_graph_csv(testsupport::data_path("scene_graph/nodes.csv"),
                          testsupport::data_path("scene_graph/edges.csv"));
}

Subgraph make_sub(const TextualGraph& g, std::initializer_list<NodeId> nodes,
                  std::initializer_list<uint32_t> edges) {
    Subgraph s;
    s.parent = &g;
    s.node_ids = nodes;
    s.edge_indices = edges;
    s.validate();
    return s;
}

}  // namespace

TEST_CASE("parses the scene graph listing with quoted, comma-bearing fields") {
    TextualGraph g = scene_graph();
    CHECK(g.nodes.size() == 22);
    CHECK(g.edges.size() == 8);
    CHECK(g.nodes.at(0) == "name: eye glasses; attribute: black; (x,y,w,h): (330, 125, 25, 7)");
    CHECK(g.nodes.at(2) == "name: cords; attribute: blue; (x,y,w,h): (0, 182, 110, 109)");
    CHECK(g.edges[0] == Edge{0, "to the right of", 21});
    CHECK(g.edges[7] == Edge{1, "to the left of", 19});
}

TEST_CASE("single node and empty edge file is a valid degenerate graph") {
    TextualGraph g = parse_strings("node id,node attr\n7,alone\n", "src,edge attr,dst\n");
    CHECK(g.nodes.size() == 1);
    CHECK(g.edges.empty());
    CHECK(g.nodes.at(7) == "alone");
}

TEST_CASE("malformed rows fail with the offending line number") {
    CHECK_THROWS_WITH_AS(parse_strings("node id,node attr\n1,a,b,c\n", "src,edge attr,dst\n"),
                         doctest::Contains("nodes:2"), ParseError);
    CHECK_THROWS_WITH_AS(
        parse_strings("node id,node attr\n1,a\n", "src,edge attr,dst\n1,rel\n"),
        doctest::Contains("edges:2"), ParseError);
    CHECK_THROWS_AS(parse_strings("wrong,header\n", "src,edge attr,dst\n"), ParseError);
    CHECK_THROWS_AS(parse_strings("node id,node attr\n", "bad header\n"), ParseError);
    CHECK_THROWS_AS(parse_strings("node id,node attr\nx,a\n", "src,edge attr,dst\n"), ParseError);
}

TEST_CASE("dangling endpoints and duplicate rows are integrity errors") {
    CHECK_THROWS_WITH_AS(
        parse_strings("node id,node attr\n1,a\n", "src,edge attr,dst\n1,rel,9\n"),
        doctest::Contains("9"), IntegrityError);
    CHECK_THROWS_AS(parse_strings("node id,node attr\n1,a\n1,b\n", "src,edge attr,dst\n"),
                    IntegrityError);
    CHECK_THROWS_AS(
        parse_strings("node id,node attr\n1,a\n2,b\n",
                      "src,edge attr,dst\n1,rel,2\n1,rel,2\n"),
        IntegrityError);
}

TEST_CASE("parallel edges with different text are distinct") {
    TextualGraph g = parse_strings("node id,node attr\n1,a\n2,b\n",
                                   "src,edge attr,dst\n1,rel,2\n1,other,2\n2,rel,1\n");
    CHECK(g.edges.size() == 3);
}

TEST_CASE("undirected ingest appends missing reversals after file rows") {
    TextualGraph g = parse_strings("node id,node attr\n1,a\n2,b\n3,c\n",
                                   "src,edge attr,dst\n1,rel,2\n2,rel,1\n2,x,3\n", true);
    REQUIRE(g.edges.size() == 4);  // 1->2 and 2->1 exist; only 3->2 is added
    CHECK(g.edges[3] == Edge{3, "x", 2});
    CHECK_FALSE(g.directed);
}

TEST_CASE("merge identity, idempotence and forced union") {
    TextualGraph g = parse_strings("node id,node attr\n1,A\n2,B\n3,C\n",
                                   "src,edge attr,dst\n1,ab,2\n2,bc,3\n");
    Subgraph ab = make_sub(g, {1, 2}, {0});
    Subgraph bc = make_sub(g, {2, 3}, {1});

    CHECK(merge_subgraphs({ab}) == ab);
    CHECK(merge_subgraphs({ab, ab}) == ab);
    Subgraph both = merge_subgraphs({ab, bc});
    CHECK(both.node_ids == std::set<NodeId>{1, 2, 3});
    CHECK(both.edge_indices == std::set<uint32_t>{0, 1});
}

TEST_CASE("merge rejects empty input and mixed parents") {
    TextualGraph g1 = parse_strings("node id,node attr\n1,a\n", "src,edge attr,dst\n");
    TextualGraph g2 = parse_strings("node id,node attr\n1,a\n", "src,edge attr,dst\n");
    CHECK_THROWS_AS(merge_subgraphs({}), DomainError);
    CHECK_THROWS_AS(merge_subgraphs({full_subgraph(g1), full_subgraph(g2)}), DomainError);
}

TEST_CASE("merge is commutative, associative, idempotent over random families") {
    TextualGraph g = scene_graph();
    Subgraph whole = full_subgraph(g);
    SplitMix64 rng(99);

    auto random_member = [&]() {
        Subgraph s;
        s.parent = &g;
        for (uint32_t ei = 0; ei < g.edges.size(); ++ei) {
            if (rng.next() % 3 == 0) {
                s.edge_indices.insert(ei);
                s.node_ids.insert(g.edges[ei].src);
                s.node_ids.insert(g.edges[ei].dst);
            }
        }
        for (const auto& [id, _] : g.nodes) {
            if (rng.next() % 4 == 0) s.node_ids.insert(id);
        }
        if (s.node_ids.empty()) s.node_ids.insert(0);
        s.validate();
        return s;
    };

    for (int iter = 0; iter < 200; ++iter) {
        std::vector<Subgraph> fam;
        size_t n = 1 + rng.next() % 5;
        for (size_t i = 0; i < n; ++i) fam.push_back(random_member());

        Subgraph merged = merge_subgraphs(fam);
        merged.validate();

        // member-superset
        for (const Subgraph& mem : fam) {
            for (NodeId id : mem.node_ids) CHECK(merged.node_ids.count(id));
            for (uint32_t ei : mem.edge_indices) CHECK(merged.edge_indices.count(ei));
        }

        // permuted and duplicated member lists give the same result
        std::vector<Subgraph> shuffled = fam;
        for (size_t i = shuffled.size(); i > 1; --i) {
            std::swap(shuffled[i - 1], shuffled[rng.next() % i]);
        }
        shuffled.push_back(shuffled[rng.next() % shuffled.size()]);
        CHECK(merge_subgraphs(shuffled) == merged);

        // associativity: merge(merge(prefix), rest) == merge(all)
        if (fam.size() > 1) {
            Subgraph left = merge_subgraphs({fam.begin(), fam.begin() + 1});
            std::vector<Subgraph> rest(fam.begin() + 1, fam.end());
            rest.insert(rest.begin(), left);
            CHECK(merge_subgraphs(rest) == merged);
        }
    }
}

TEST_CASE("serialization is canonical and round-trips the scene graph") {
    TextualGraph g = scene_graph();
    std::string text = serialize_subgraph(full_subgraph(g));

    // parse(serialize(parse(file))) == parse(file)
    std::string nodes_part = text.substr(0, text.find("src,edge attr,dst"));
    std::string edges_part = text.substr(text.find("src,edge attr,dst"));
    TextualGraph again = parse_strings(nodes_part, edges_part);
    CHECK(again == g);

    // serialization is a pure function of content, not construction order
    Subgraph a = make_sub(g, {0, 21, 4}, {0, 1});
    Subgraph b = make_sub(g, {4, 0, 21}, {1, 0});
    CHECK(serialize_subgraph(a) == serialize_subgraph(b));
}

TEST_CASE("empty and single-node serializations") {
    TextualGraph g = parse_strings("node id,node attr\n5,\"hello, world\"\n",
                                   "src,edge attr,dst\n");
    Subgraph empty;
    empty.parent = &g;
    CHECK(serialize_subgraph(empty) == "node id,node attr\nsrc,edge attr,dst\n");
    Subgraph one = make_sub(g, {5}, {});
    CHECK(serialize_subgraph(one) == "node id,node attr\n5,\"hello, world\"\nsrc,edge attr,dst\n");
}

TEST_CASE("queries jsonl loads and validates") {
    std::istringstream in(
        "{\"id\": 1, \"question\": \"What?\", \"answer\": \"blue\"}\n"
        "\n"
        "{\"id\": 2, \"question\": \"Where?\", \"answer\": \"left\"}\n");
    auto qs = parse_queries_jsonl(in, "queries");
    REQUIRE(qs.size() == 2);
    CHECK(qs[0].id == 1);
    CHECK(qs[1].question == "Where?");

    std::istringstream bad("{\"id\": 1, \"question\": \"\", \"answer\": \"x\"}\n");
    CHECK_THROWS_AS(parse_queries_jsonl(bad, "queries"), ParseError);
    std::istringstream bad2("{\"id\": 1}\n");
    CHECK_THROWS_AS(parse_queries_jsonl(bad2, "queries"), ParseError);
}

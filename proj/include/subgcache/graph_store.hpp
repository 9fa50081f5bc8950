#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace subgcache {

using NodeId = uint32_t;

inline constexpr std::string_view kNodeCsvHeader = "node id,node attr";
inline constexpr std::string_view kEdgeCsvHeader = "src,edge attr,dst";

struct Edge {
    NodeId src;
    std::string attr;
    NodeId dst;

    friend bool operator==(const Edge&, const Edge&) = default;
};

// The external knowledge source: nodes and edges with free-text attributes.
// Immutable after ingest; shareable across threads.
struct TextualGraph {
    std::map<NodeId, std::string> nodes;  // id -> attribute text
    std::vector<Edge> edges;              // edge identity is the index here
    bool directed = true;

    bool has_node(NodeId id) const { return nodes.count(id) != 0; }
    friend bool operator==(const TextualGraph&, const TextualGraph&) = default;
};

// A node/edge subset of one TextualGraph. Every included edge has both
// endpoints included (closure invariant).
struct Subgraph {
    const TextualGraph* parent = nullptr;
    std::set<NodeId> node_ids;
    std::set<uint32_t> edge_indices;

    bool empty() const { return node_ids.empty(); }
    friend bool operator==(const Subgraph&, const Subgraph&) = default;

    // Throws IntegrityError if the closure invariant or containment fails.
    void validate() const;
};

struct QueryRecord {
    int64_t id = 0;
    std::string question;
    std::string gold_answer;
};

// Parses the two-file CSV graph format. Node header must be exactly
// `node id,node attr`, edge header `src,edge attr,dst`. Quoted fields may
// contain commas, semicolons and doubled quotes. Edge order in the file is
// preserved as the edge index. When `undirected` is set, a reversed copy of
// each edge is appended after all file rows (skipping reversals that already
// exist as file rows).
TextualGraph parse_graph_csv(std::istream& node_file, std::istream& edge_file,
                             bool undirected = false);
TextualGraph load_graph_csv(const std::string& node_path, const std::string& edge_path,
                            bool undirected = false);

// Queries come as JSON lines with fields `id`, `question`, `answer`.
std::vector<QueryRecord> load_queries_jsonl(const std::string& path);
std::vector<QueryRecord> parse_queries_jsonl(std::istream& in, const std::string& name);

// Whole-graph view, used by serialization round-trips and the prompt builder.
Subgraph full_subgraph(const TextualGraph& g);

// Union of nodes and edges across members. All members must share a parent
// and the list must be nonempty.
Subgraph merge_subgraphs(const std::vector<Subgraph>& members);

// Canonical CSV text: node header, node rows ascending by id, edge header,
// edge rows ascending by edge index. Two equal subgraphs serialize
// identically regardless of how they were built.
std::string serialize_subgraph(const Subgraph& s);

// The same serialization as individual data rows (headers excluded), for
// consumers that trim row by row.
struct SerializedRows {
    std::vector<std::string> node_rows;
    std::vector<std::string> edge_rows;
};
SerializedRows serialize_subgraph_rows(const Subgraph& s);

// CSV field quoting used by serialize_subgraph (exposed for tests/tools).
std::string csv_quote(const std::string& field);

}  // namespace subgcache

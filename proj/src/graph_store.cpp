#include "subgcache/graph_store.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "subgcache/errors.hpp"

namespace subgcache {
namespace {

// Minimal RFC-4180 style reader: comma separator, double-quote quoting with
// "" escapes, tolerant of CRLF line endings.
struct CsvReader {
    std::istream& in;
    std::string name;
    size_t line_no = 0;

    bool next_row(std::vector<std::string>& fields) {
        std::string line;
        if (!std::getline(in, line)) return false;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();

        fields.clear();
        std::string cur;
        bool in_quotes = false;
        size_t i = 0;
        while (true) {
            if (i == line.size()) {
                if (in_quotes) {
                    // quoted field spanning a newline
                    std::string more;
                    if (!std::getline(in, more)) {
                        throw ParseError(name, line_no, "unterminated quoted field");
                    }
                    ++line_no;
                    if (!more.empty() && more.back() == '\r') more.pop_back();
                    line += '\n';
                    line += more;
                    continue;
                }
                break;
            }
            char c = line[i];
            if (in_quotes) {
                if (c == '"') {
                    if (i + 1 < line.size() && line[i + 1] == '"') {
                        cur += '"';
                        ++i;
                    } else {
                        in_quotes = false;
                    }
                } else {
                    cur += c;
                }
            } else if (c == '"') {
                if (!cur.empty()) throw ParseError(name, line_no, "quote inside unquoted field");
                in_quotes = true;
            } else if (c == ',') {
                fields.push_back(std::move(cur));
                cur.clear();
            } else {
                cur += c;
            }
            ++i;
        }
        fields.push_back(std::move(cur));
        return true;
    }
};

NodeId parse_node_id(const std::string& s, const std::string& file, size_t line) {
    uint32_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError(file, line, "invalid node id '" + s + "'");
    }
    return v;
}

}  // namespace

void Subgraph::validate() const {
    if (!parent) throw IntegrityError("subgraph has no parent graph");
    for (NodeId id : node_ids) {
        if (!parent->has_node(id)) {
            throw IntegrityError("subgraph node " + std::to_string(id) + " not in parent graph");
        }
    }
    for (uint32_t ei : edge_indices) {
        if (ei >= parent->edges.size()) {
            throw IntegrityError("subgraph edge index " + std::to_string(ei) + " out of range");
        }
        const Edge& e = parent->edges[ei];
        if (!node_ids.count(e.src) || !node_ids.count(e.dst)) {
            throw IntegrityError("subgraph edge " + std::to_string(ei) +
                                 " violates closure: endpoint missing");
        }
    }
}

TextualGraph parse_graph_csv(std::istream& node_file, std::istream& edge_file, bool undirected) {
    TextualGraph g;
    g.directed = !undirected;

    CsvReader nodes{node_file, "nodes"};
    std::vector<std::string> row;
    if (!nodes.next_row(row) || row.size() != 2 || row[0] != "node id" || row[1] != "node attr") {
        throw ParseError(nodes.name, nodes.line_no ? nodes.line_no : 1,
                         "expected header 'node id,node attr'");
    }
    while (nodes.next_row(row)) {
        if (row.size() == 1 && row[0].empty()) continue;  // trailing blank line
        if (row.size() != 2) {
            throw ParseError(nodes.name, nodes.line_no,
                             "expected 2 fields, got " + std::to_string(row.size()));
        }
        NodeId id = parse_node_id(row[0], nodes.name, nodes.line_no);
        if (!g.nodes.emplace(id, row[1]).second) {
            throw IntegrityError("nodes:" + std::to_string(nodes.line_no) +
                                 ": duplicate node id " + std::to_string(id));
        }
    }

    CsvReader edges{edge_file, "edges"};
    if (!edges.next_row(row) || row.size() != 3 || row[0] != "src" || row[1] != "edge attr" ||
        row[2] != "dst") {
        throw ParseError(edges.name, edges.line_no ? edges.line_no : 1,
                         "expected header 'src,edge attr,dst'");
    }
    std::unordered_set<std::string> seen;
    auto triple_key = [](const Edge& e) {
        return std::to_string(e.src) + '\x1f' + e.attr + '\x1f' + std::to_string(e.dst);
    };
    while (edges.next_row(row)) {
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != 3) {
            throw ParseError(edges.name, edges.line_no,
                             "expected 3 fields, got " + std::to_string(row.size()));
        }
        Edge e{parse_node_id(row[0], edges.name, edges.line_no), row[1],
               parse_node_id(row[2], edges.name, edges.line_no)};
        for (NodeId end : {e.src, e.dst}) {
            if (!g.has_node(end)) {
                throw IntegrityError("edges:" + std::to_string(edges.line_no) +
                                     ": edge endpoint " + std::to_string(end) +
                                     " is not a known node");
            }
        }
        if (!seen.insert(triple_key(e)).second) {
            throw IntegrityError("edges:" + std::to_string(edges.line_no) +
                                 ": duplicate edge (" + std::to_string(e.src) + "," + e.attr +
                                 "," + std::to_string(e.dst) + ")");
        }
        g.edges.push_back(std::move(e));
    }

    if (undirected) {
        // Reversed copies appended after all file rows, in file order.
        size_t n_file_edges = g.edges.size();
        for (size_t i = 0; i < n_file_edges; ++i) {
            Edge rev{g.edges[i].dst, g.edges[i].attr, g.edges[i].src};
            if (seen.insert(triple_key(rev)).second) g.edges.push_back(std::move(rev));
        }
    }
    return g;
}

TextualGraph load_graph_csv(const std::string& node_path, const std::string& edge_path,
                            bool undirected) {
    std::ifstream nf(node_path), ef(edge_path);
    if (!nf) throw Error("cannot open node file: " + node_path);
    if (!ef) throw Error("cannot open edge file: " + edge_path);
    return parse_graph_csv(nf, ef, undirected);
}

std::vector<QueryRecord> parse_queries_jsonl(std::istream& in, const std::string& name) {
    std::vector<QueryRecord> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(name, line_no, std::string("bad JSON: ") + e.what());
        }
        if (!j.contains("id") || !j.contains("question") || !j.contains("answer")) {
            throw ParseError(name, line_no, "query needs fields id, question, answer");
        }
        QueryRecord q;
        q.id = j["id"].get<int64_t>();
        q.question = j["question"].get<std::string>();
        q.gold_answer = j["answer"].get<std::string>();
        if (q.question.empty()) throw ParseError(name, line_no, "empty question");
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<QueryRecord> load_queries_jsonl(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open queries file: " + path);
    return parse_queries_jsonl(f, path);
}

Subgraph full_subgraph(const TextualGraph& g) {
    Subgraph s;
    s.parent = &g;
    for (const auto& [id, attr] : g.nodes) s.node_ids.insert(id);
    for (uint32_t i = 0; i < g.edges.size(); ++i) s.edge_indices.insert(i);
    return s;
}

Subgraph merge_subgraphs(const std::vector<Subgraph>& members) {
    if (members.empty()) throw DomainError("merge_subgraphs: empty member list");
    Subgraph out;
    out.parent = members.front().parent;
    for (const Subgraph& m : members) {
        if (m.parent != out.parent) {
            throw DomainError("merge_subgraphs: members come from different parent graphs");
        }
        out.node_ids.insert(m.node_ids.begin(), m.node_ids.end());
        out.edge_indices.insert(m.edge_indices.begin(), m.edge_indices.end());
    }
    return out;
}

std::string csv_quote(const std::string& field) {
    bool need = field.find_first_of(",\"\n") != std::string::npos;
    if (!need) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

SerializedRows serialize_subgraph_rows(const Subgraph& s) {
    SerializedRows rows;
    rows.node_rows.reserve(s.node_ids.size());
    for (NodeId id : s.node_ids) {
        rows.node_rows.push_back(std::to_string(id) + ',' + csv_quote(s.parent->nodes.at(id)));
    }
    rows.edge_rows.reserve(s.edge_indices.size());
    for (uint32_t ei : s.edge_indices) {
        const Edge& e = s.parent->edges[ei];
        rows.edge_rows.push_back(std::to_string(e.src) + ',' + csv_quote(e.attr) + ',' +
                                 std::to_string(e.dst));
    }
    return rows;
}

std::string serialize_subgraph(const Subgraph& s) {
    SerializedRows rows = serialize_subgraph_rows(s);
    std::ostringstream out;
    out << kNodeCsvHeader << '\n';
    for (const std::string& r : rows.node_rows) out << r << '\n';
    out << kEdgeCsvHeader << '\n';
    for (const std::string& r : rows.edge_rows) out << r << '\n';
    return out.str();
}

}  // namespace subgcache

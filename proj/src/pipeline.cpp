#include "subgcache/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>

#include <nlohmann/json.hpp>

#include "subgcache/errors.hpp"
#include "subgcache/kernels.hpp"
#include "subgcache/rng.hpp"

namespace subgcache {
namespace {

using Clock = std::chrono::steady_clock;
using json = nlohmann::ordered_json;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

uint64_t file_digest(const std::string& path, uint64_t h) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path);
    char buf[4096];
    while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
        h = fnv1a64_bytes(buf, static_cast<size_t>(f.gcount()), h);
    }
    return h;
}

// Dominant-term operation count for encoding one subgraph.
uint64_t encode_ops_of(const Subgraph& s, const GnnEncoderConfig& cfg) {
    uint64_t v = s.node_ids.size(), e = s.edge_indices.size();
    uint64_t d = cfg.dim;
    return static_cast<uint64_t>(cfg.layers) * (v * cfg.heads * d * d + 2 * e * d);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    f << content;
}

}  // namespace

RunMode run_mode_from_string(const std::string& name) {
    if (name == "baseline") return RunMode::Baseline;
    if (name == "subgcache") return RunMode::SubgCache;
    throw DomainError("unknown mode: " + name);
}

std::string to_string(RunMode m) { return m == RunMode::Baseline ? "baseline" : "subgcache"; }

std::string normalize_answer(const std::string& text) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) {
            if (pending_space && !out.empty()) out += ' ';
            pending_space = false;
            out += static_cast<char>(std::tolower(c));
        } else {
            pending_space = true;
        }
    }
    return out;
}

bool score_answer(const std::string& generated, const std::string& gold) {
    std::string g = normalize_answer(generated);
    std::string a = normalize_answer(gold);
    return g.find(a) != std::string::npos;
}

namespace {

struct PreparedQuery {
    const QueryRecord* record;
    Subgraph retrieved;
    PromptParts own_prompt;
    std::vector<TokenId> own_prefix_tokens;  // BOS + own prefix bytes
    std::vector<TokenId> question_tokens;
    std::vector<TokenId> answer_tokens;
    std::optional<EmbeddingVec> own_soft;
};

QueryMetricsRow to_row(const QueryOutcome& o, const QueryRecord& rec) {
    QueryMetricsRow r;
    r.id = rec.id;
    r.cluster_id = o.cluster_id;
    r.fallback = o.fallback;
    r.generated = o.gen.text;
    r.correct = score_answer(o.gen.text, rec.gold_answer);
    r.n_generated = static_cast<uint32_t>(o.gen.token_ids.size());
    r.rt_ms = o.rt_ms;
    r.ttft_ms = o.ttft_ms;
    r.pftt_ms = o.pftt_ms;
    r.rt_proxy = o.rt_proxy;
    r.ttft_proxy = o.ttft_proxy;
    r.pftt_proxy = o.pftt_proxy;
    r.prefill_tokens = o.prefill_tokens;
    r.context_tokens = o.context_tokens;
    return r;
}

}  // namespace

BatchReport run(const RunConfig& config) {
    kernels::force_backend(config.kernel_backend);

    TextualGraph graph =
        load_graph_csv(config.graph_nodes_path, config.graph_edges_path, config.undirected);
    std::vector<QueryRecord> queries = load_queries_jsonl(config.queries_path);
    if (config.batch_size > 0 && queries.size() > config.batch_size) {
        queries.resize(config.batch_size);
    }
    if (queries.empty()) throw DomainError("no queries to run");

    uint64_t digest = file_digest(config.graph_nodes_path, 0xcbf29ce484222325ULL);
    digest = file_digest(config.graph_edges_path, digest);
    digest = file_digest(config.queries_path, digest);
    digest = fnv1a64(std::to_string(queries.size()), digest);

    const bool soft_on = config.soft_prefix_enabled();
    // The text encoder keeps its fixed default seed/salt: retrieval rankings
    // are part of dataset behavior, not of the per-run randomness.
    TextEncoderConfig enc_cfg;
    enc_cfg.dim = config.lm.model_dim;
    TextEncoder text_enc(enc_cfg);
    GnnEncoderConfig gnn_cfg;
    gnn_cfg.dim = config.lm.model_dim;
    gnn_cfg.seed = splitmix64_once(config.seed ^ 0x62);
    GnnEncoder gnn(gnn_cfg);
    ToyLmConfig lm_cfg = config.lm;
    lm_cfg.seed = config.seed;
    ToyLm lm(lm_cfg);

    PromptTemplate tmpl;
    PromptBudget budget{lm_cfg.max_seq_len, config.question_budget, lm_cfg.max_new_tokens,
                        soft_on};
    if (budget.prefix_budget() <= 1) {
        throw DomainError("max_seq too small for the question budget and generation cap");
    }

    BatchReport report;
    report.mode = to_string(config.mode);
    report.dataset_digest = digest;
    report.lm_seed = lm_cfg.seed;
    report.config = config;

    Clock::time_point t0 = Clock::now();
    std::vector<PreparedQuery> prepared(queries.size());
    for (size_t i = 0; i < queries.size(); ++i) {
        PreparedQuery& p = prepared[i];
        p.record = &queries[i];
        p.retrieved = retrieve(config.retrieval, graph, queries[i], text_enc);
    }
    report.cluster_processing.retrieval_ms = ms_since(t0);

    if (!config.dump_retrieval_dir.empty()) {
        std::filesystem::create_directories(config.dump_retrieval_dir);
        for (size_t i = 0; i < prepared.size(); ++i) {
            write_file(config.dump_retrieval_dir + "/query_" + std::to_string(queries[i].id) +
                           ".csv",
                       serialize_subgraph(prepared[i].retrieved));
        }
    }

    for (size_t i = 0; i < prepared.size(); ++i) {
        PreparedQuery& p = prepared[i];
        p.own_prompt = build_prompt(tmpl, p.retrieved, p.record->question, budget);
        p.own_prefix_tokens = Tokenizer::tokenize(p.own_prompt.prefix_text);
        p.question_tokens = Tokenizer::encode_bytes(p.own_prompt.question_text);
        if (config.answer_lookup) {
            p.answer_tokens = Tokenizer::encode_bytes(p.record->gold_answer);
        }
    }

    EngineOptions eopts;
    eopts.max_new_tokens = lm_cfg.max_new_tokens;
    eopts.parallel_queries = config.parallel_queries;
    eopts.batch_start = t0;

    std::vector<QueryMetricsRow> rows(prepared.size());

    if (config.mode == RunMode::Baseline) {
        Clock::time_point te = Clock::now();
        if (soft_on) {
            for (PreparedQuery& p : prepared) {
                p.own_soft = gnn.encode(text_enc, p.retrieved);
                report.cluster_processing.encode_ops += encode_ops_of(p.retrieved, gnn_cfg);
            }
        }
        report.cluster_processing.encode_ms = ms_since(te);
        for (size_t i = 0; i < prepared.size(); ++i) {
            PreparedQuery& p = prepared[i];
            QueryOutcome o = serve_standalone(lm, p.own_prefix_tokens, p.question_tokens,
                                              p.answer_tokens, p.own_soft, eopts);
            o.query_index = i;
            o.query_id = p.record->id;
            rows[i] = to_row(o, *p.record);
            report.aggregate.total_prefill_tokens += o.prefill_tokens;
            report.aggregate.total_llm_flop_proxy += o.pftt_proxy + o.gen.decode_flop_proxy;
        }
        report.aggregate.n_clusters = static_cast<uint32_t>(prepared.size());
    } else {
        // 1) encode retrieved subgraphs
        Clock::time_point te = Clock::now();
        std::vector<EmbeddingVec> embeddings(prepared.size());
        auto encode_at = [&](size_t i) { embeddings[i] = gnn.encode(text_enc, prepared[i].retrieved); };
        if (config.parallel_queries) {
            std::vector<std::future<void>> futs;
            futs.reserve(prepared.size());
            for (size_t i = 0; i < prepared.size(); ++i) {
                futs.push_back(std::async(std::launch::async, encode_at, i));
            }
            for (auto& f : futs) f.get();
        } else {
            for (size_t i = 0; i < prepared.size(); ++i) encode_at(i);
        }
        for (const PreparedQuery& p : prepared) {
            report.cluster_processing.encode_ops += encode_ops_of(p.retrieved, gnn_cfg);
        }
        report.cluster_processing.encode_ms = ms_since(te);

        // 2) agglomerate
        Clock::time_point tc = Clock::now();
        ClusterConfig ccfg = config.cluster;
        if (ccfg.cluster_count > prepared.size()) {
            throw DomainError("cluster count exceeds batch size");
        }
        ClusterAssignment assignment = agglomerate(embeddings, ccfg);
        report.cluster_processing.cluster_ms = ms_since(tc);
        report.cluster_processing.cluster_ops = assignment.op_count;
        if (!config.merge_trace_path.empty()) {
            write_file(config.merge_trace_path, merge_trace_json(assignment));
        }

        // 3) representative subgraphs + jobs
        Clock::time_point tm = Clock::now();
        uint32_t n_clusters = *std::max_element(assignment.labels.begin(),
                                                assignment.labels.end()) + 1;
        std::vector<ClusterJob> jobs(n_clusters);
        for (uint32_t ci = 0; ci < n_clusters; ++ci) jobs[ci].cluster_id = ci;
        for (size_t i = 0; i < prepared.size(); ++i) {
            uint32_t ci = assignment.labels[i];
            ClusterMember m;
            m.query_index = i;
            m.query_id = prepared[i].record->id;
            m.question_tokens = prepared[i].question_tokens;
            m.answer_tokens = prepared[i].answer_tokens;
            m.standalone_prefix_tokens = prepared[i].own_prefix_tokens;
            if (soft_on) m.standalone_soft = embeddings[i];
            jobs[ci].members.push_back(std::move(m));
        }
        for (uint32_t ci = 0; ci < n_clusters; ++ci) {
            std::vector<Subgraph> parts;
            for (const ClusterMember& m : jobs[ci].members) {
                parts.push_back(prepared[m.query_index].retrieved);
                report.cluster_processing.merge_ops +=
                    parts.back().node_ids.size() + parts.back().edge_indices.size();
            }
            jobs[ci].representative = merge_subgraphs(parts);
            PromptParts rep_prompt = build_prompt(tmpl, jobs[ci].representative, "", budget);
            jobs[ci].prefix_tokens = Tokenizer::tokenize(rep_prompt.prefix_text);
            if (soft_on) {
                jobs[ci].soft_prefix = gnn.encode(text_enc, jobs[ci].representative);
                report.cluster_processing.encode_ops +=
                    encode_ops_of(jobs[ci].representative, gnn_cfg);
            }
        }
        report.cluster_processing.merge_ms = ms_since(tm);

        // 4) cluster-wise cache reuse
        BatchRunResult res = run_batch(jobs, lm, eopts);
        report.ledger = std::move(res.ledger);
        for (const QueryOutcome& o : res.outcomes) {
            rows[o.query_index] = to_row(o, *prepared[o.query_index].record);
            report.aggregate.total_prefill_tokens += o.prefill_tokens;
            report.aggregate.total_llm_flop_proxy += o.pftt_proxy + o.gen.decode_flop_proxy;
        }
        for (const ClusterLedgerEntry& e : report.ledger.entries) {
            report.aggregate.total_prefill_tokens += e.prefix_tokens;
            report.aggregate.total_llm_flop_proxy += e.prefix_flop_proxy;
        }
        report.aggregate.n_clusters = n_clusters;
    }

    report.queries = std::move(rows);
    Aggregate& agg = report.aggregate;
    agg.m = static_cast<uint32_t>(report.queries.size());
    for (const QueryMetricsRow& r : report.queries) {
        if (r.correct) agg.acc_percent += 1.0;
        if (r.fallback) ++agg.n_fallbacks;
        agg.mean_rt_ms += r.rt_ms;
        agg.mean_ttft_ms += r.ttft_ms;
        agg.mean_pftt_ms += r.pftt_ms;
        agg.mean_rt_proxy += static_cast<double>(r.rt_proxy);
        agg.mean_ttft_proxy += static_cast<double>(r.ttft_proxy);
        agg.mean_pftt_proxy += static_cast<double>(r.pftt_proxy);
    }
    double inv = 1.0 / agg.m;
    agg.acc_percent *= 100.0 * inv;
    agg.mean_rt_ms *= inv;
    agg.mean_ttft_ms *= inv;
    agg.mean_pftt_ms *= inv;
    agg.mean_rt_proxy *= inv;
    agg.mean_ttft_proxy *= inv;
    agg.mean_pftt_proxy *= inv;

    if (!config.report_path.empty()) write_file(config.report_path, report.to_json());
    if (!config.ledger_path.empty()) write_file(config.ledger_path, report.ledger.to_json());
    return report;
}

// ---------------------------------------------------------------------------
// report JSON

namespace {

json config_to_json(const RunConfig& c) {
    json j;
    j["graph_nodes"] = c.graph_nodes_path;
    j["graph_edges"] = c.graph_edges_path;
    j["queries"] = c.queries_path;
    j["undirected"] = c.undirected;
    j["mode"] = to_string(c.mode);
    j["batch_size"] = c.batch_size;
    j["retrieval"] = {{"strategy", to_string(c.retrieval.strategy)},
                      {"k", c.retrieval.k},
                      {"edge_cost", c.retrieval.edge_cost},
                      {"ego_hops", c.retrieval.ego_hops},
                      {"ego_entity_cap", c.retrieval.ego_entity_cap}};
    j["cluster"] = {{"linkage", to_string(c.cluster.linkage)},
                    {"count", c.cluster.cluster_count}};
    j["lm"] = {{"layers", c.lm.layers},       {"heads", c.lm.heads},
               {"model_dim", c.lm.model_dim}, {"ffn_hidden", c.lm.ffn_hidden},
               {"max_seq", c.lm.max_seq_len}, {"max_new", c.lm.max_new_tokens}};
    // effective seeds, all reproducible from `seed` and compiled defaults
    TextEncoderConfig enc_defaults;
    j["effective_seeds"] = {{"lm", c.seed},
                            {"gnn", splitmix64_once(c.seed ^ 0x62)},
                            {"text_encoder", enc_defaults.seed},
                            {"hash_salt", enc_defaults.hash_salt}};
    j["question_budget"] = c.question_budget;
    j["seed"] = c.seed;
    j["soft_prefix"] = c.soft_prefix == SoftPrefixMode::Auto
                           ? "auto"
                           : (c.soft_prefix == SoftPrefixMode::On ? "on" : "off");
    j["answer_lookup"] = c.answer_lookup;
    j["parallel_queries"] = c.parallel_queries;
    j["kernel_backend"] = c.kernel_backend;
    return j;
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    c.graph_nodes_path = j.at("graph_nodes");
    c.graph_edges_path = j.at("graph_edges");
    c.queries_path = j.at("queries");
    c.undirected = j.at("undirected");
    c.mode = run_mode_from_string(j.at("mode"));
    c.batch_size = j.at("batch_size");
    const json& r = j.at("retrieval");
    c.retrieval.strategy = retrieval_strategy_from_string(r.at("strategy"));
    c.retrieval.k = r.at("k");
    c.retrieval.edge_cost = r.at("edge_cost");
    c.retrieval.ego_hops = r.at("ego_hops");
    c.retrieval.ego_entity_cap = r.at("ego_entity_cap");
    c.cluster.linkage = linkage_from_string(j.at("cluster").at("linkage"));
    c.cluster.cluster_count = j.at("cluster").at("count");
    const json& l = j.at("lm");
    c.lm.layers = l.at("layers");
    c.lm.heads = l.at("heads");
    c.lm.model_dim = l.at("model_dim");
    c.lm.ffn_hidden = l.at("ffn_hidden");
    c.lm.max_seq_len = l.at("max_seq");
    c.lm.max_new_tokens = l.at("max_new");
    c.question_budget = j.at("question_budget");
    c.seed = j.at("seed");
    std::string soft = j.at("soft_prefix");
    c.soft_prefix = soft == "auto" ? SoftPrefixMode::Auto
                                   : (soft == "on" ? SoftPrefixMode::On : SoftPrefixMode::Off);
    c.answer_lookup = j.at("answer_lookup");
    c.parallel_queries = j.at("parallel_queries");
    c.kernel_backend = j.at("kernel_backend");
    return c;
}

}  // namespace

std::string BatchReport::to_json() const {
    json j;
    j["schema"] = "subgcache-report-v1";
    j["mode"] = mode;
    j["dataset_digest"] = dataset_digest;
    j["lm_seed"] = lm_seed;
    j["config"] = config_to_json(config);
    j["aggregate"] = {{"m", aggregate.m},
                      {"n_clusters", aggregate.n_clusters},
                      {"n_fallbacks", aggregate.n_fallbacks},
                      {"acc_percent", aggregate.acc_percent},
                      {"mean_rt_ms", aggregate.mean_rt_ms},
                      {"mean_ttft_ms", aggregate.mean_ttft_ms},
                      {"mean_pftt_ms", aggregate.mean_pftt_ms},
                      {"mean_rt_proxy", aggregate.mean_rt_proxy},
                      {"mean_ttft_proxy", aggregate.mean_ttft_proxy},
                      {"mean_pftt_proxy", aggregate.mean_pftt_proxy},
                      {"total_prefill_tokens", aggregate.total_prefill_tokens},
                      {"total_llm_flop_proxy", aggregate.total_llm_flop_proxy}};
    j["cluster_processing"] = {{"retrieval_ms", cluster_processing.retrieval_ms},
                               {"encode_ms", cluster_processing.encode_ms},
                               {"cluster_ms", cluster_processing.cluster_ms},
                               {"merge_ms", cluster_processing.merge_ms},
                               {"encode_ops", cluster_processing.encode_ops},
                               {"cluster_ops", cluster_processing.cluster_ops},
                               {"merge_ops", cluster_processing.merge_ops}};
    json rows = json::array();
    for (const QueryMetricsRow& r : queries) {
        rows.push_back({{"id", r.id},
                        {"cluster", r.cluster_id},
                        {"fallback", r.fallback},
                        {"correct", r.correct},
                        {"generated", r.generated},
                        {"n_generated", r.n_generated},
                        {"rt_ms", r.rt_ms},
                        {"ttft_ms", r.ttft_ms},
                        {"pftt_ms", r.pftt_ms},
                        {"rt_proxy", r.rt_proxy},
                        {"ttft_proxy", r.ttft_proxy},
                        {"pftt_proxy", r.pftt_proxy},
                        {"prefill_tokens", r.prefill_tokens},
                        {"context_tokens", r.context_tokens}});
    }
    j["queries"] = std::move(rows);
    json ledger_rows = json::array();
    for (const ClusterLedgerEntry& e : ledger.entries) {
        ledger_rows.push_back({{"cluster_id", e.cluster_id},
                               {"seal_ms", e.seal_ms},
                               {"release_ms", e.release_ms},
                               {"resident_kv_bytes", e.resident_kv_bytes},
                               {"prefix_tokens", e.prefix_tokens},
                               {"prefix_flop_proxy", e.prefix_flop_proxy},
                               {"prefix_digest", e.prefix_digest},
                               {"hits", e.hits},
                               {"fallbacks", e.fallbacks}});
    }
    j["ledger"] = std::move(ledger_rows);
    // generations are raw model bytes; replace anything that is not UTF-8
    return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace);
}

BatchReport BatchReport::from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.at("schema") != "subgcache-report-v1") throw ParseError("report", 1, "unknown schema");
    BatchReport r;
    r.mode = j.at("mode");
    r.dataset_digest = j.at("dataset_digest");
    r.lm_seed = j.at("lm_seed");
    r.config = config_from_json(j.at("config"));
    const json& a = j.at("aggregate");
    r.aggregate.m = a.at("m");
    r.aggregate.n_clusters = a.at("n_clusters");
    r.aggregate.n_fallbacks = a.at("n_fallbacks");
    r.aggregate.acc_percent = a.at("acc_percent");
    r.aggregate.mean_rt_ms = a.at("mean_rt_ms");
    r.aggregate.mean_ttft_ms = a.at("mean_ttft_ms");
    r.aggregate.mean_pftt_ms = a.at("mean_pftt_ms");
    r.aggregate.mean_rt_proxy = a.at("mean_rt_proxy");
    r.aggregate.mean_ttft_proxy = a.at("mean_ttft_proxy");
    r.aggregate.mean_pftt_proxy = a.at("mean_pftt_proxy");
    r.aggregate.total_prefill_tokens = a.at("total_prefill_tokens");
    r.aggregate.total_llm_flop_proxy = a.at("total_llm_flop_proxy");
    const json& cp = j.at("cluster_processing");
    r.cluster_processing.retrieval_ms = cp.at("retrieval_ms");
    r.cluster_processing.encode_ms = cp.at("encode_ms");
    r.cluster_processing.cluster_ms = cp.at("cluster_ms");
    r.cluster_processing.merge_ms = cp.at("merge_ms");
    r.cluster_processing.encode_ops = cp.at("encode_ops");
    r.cluster_processing.cluster_ops = cp.at("cluster_ops");
    r.cluster_processing.merge_ops = cp.at("merge_ops");
    for (const json& q : j.at("queries")) {
        QueryMetricsRow row;
        row.id = q.at("id");
        row.cluster_id = q.at("cluster");
        row.fallback = q.at("fallback");
        row.correct = q.at("correct");
        row.generated = q.at("generated");
        row.n_generated = q.at("n_generated");
        row.rt_ms = q.at("rt_ms");
        row.ttft_ms = q.at("ttft_ms");
        row.pftt_ms = q.at("pftt_ms");
        row.rt_proxy = q.at("rt_proxy");
        row.ttft_proxy = q.at("ttft_proxy");
        row.pftt_proxy = q.at("pftt_proxy");
        row.prefill_tokens = q.at("prefill_tokens");
        row.context_tokens = q.at("context_tokens");
        r.queries.push_back(std::move(row));
    }
    for (const json& e : j.at("ledger")) {
        ClusterLedgerEntry entry;
        entry.cluster_id = e.at("cluster_id");
        entry.seal_ms = e.at("seal_ms");
        entry.release_ms = e.at("release_ms");
        entry.resident_kv_bytes = e.at("resident_kv_bytes");
        entry.prefix_tokens = e.at("prefix_tokens");
        entry.prefix_flop_proxy = e.at("prefix_flop_proxy");
        entry.prefix_digest = e.at("prefix_digest");
        entry.hits = e.at("hits");
        entry.fallbacks = e.at("fallbacks");
        r.ledger.entries.push_back(entry);
    }
    return r;
}

BatchReport BatchReport::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open report: " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return from_json(text);
}

SpeedupTable compare_reports(const BatchReport& base, const BatchReport& treat) {
    if (base.dataset_digest != treat.dataset_digest) {
        throw DomainError("compare: reports were produced from different datasets");
    }
    if (base.lm_seed != treat.lm_seed) {
        throw DomainError("compare: reports use different LM seeds");
    }
    auto ratio = [](double b, double t) { return t > 0 ? b / t : 0.0; };
    SpeedupTable s;
    s.acc_delta_pp = treat.aggregate.acc_percent - base.aggregate.acc_percent;
    s.rt_wall = ratio(base.aggregate.mean_rt_ms, treat.aggregate.mean_rt_ms);
    s.ttft_wall = ratio(base.aggregate.mean_ttft_ms, treat.aggregate.mean_ttft_ms);
    s.pftt_wall = ratio(base.aggregate.mean_pftt_ms, treat.aggregate.mean_pftt_ms);
    s.rt_proxy = ratio(base.aggregate.mean_rt_proxy, treat.aggregate.mean_rt_proxy);
    s.ttft_proxy = ratio(base.aggregate.mean_ttft_proxy, treat.aggregate.mean_ttft_proxy);
    s.pftt_proxy = ratio(base.aggregate.mean_pftt_proxy, treat.aggregate.mean_pftt_proxy);
    return s;
}

std::string SpeedupTable::to_json() const {
    json j;
    j["acc_delta_pp"] = acc_delta_pp;
    j["wall"] = {{"rt", rt_wall}, {"ttft", ttft_wall}, {"pftt", pftt_wall}};
    j["proxy"] = {{"rt", rt_proxy}, {"ttft", ttft_proxy}, {"pftt", pftt_proxy}};
    return j.dump(2);
}

std::string SpeedupTable::to_text() const {
    char buf[256];
    std::string out;
    out += "metric     wall       proxy\n";
    std::snprintf(buf, sizeof(buf), "RT       %7.2fx   %7.2fx\n", rt_wall, rt_proxy);
    out += buf;
    std::snprintf(buf, sizeof(buf), "TTFT     %7.2fx   %7.2fx\n", ttft_wall, ttft_proxy);
    out += buf;
    std::snprintf(buf, sizeof(buf), "PFTT     %7.2fx   %7.2fx\n", pftt_wall, pftt_proxy);
    out += buf;
    std::snprintf(buf, sizeof(buf), "ACC  %+7.2f pp\n", acc_delta_pp);
    out += buf;
    return out;
}

}  // namespace subgcache

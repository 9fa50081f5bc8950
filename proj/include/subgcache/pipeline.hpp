#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "subgcache/cache_engine.hpp"
#include "subgcache/clustering.hpp"
#include "subgcache/cost_model.hpp"
#include "subgcache/encoders.hpp"
#include "subgcache/lm_core.hpp"
#include "subgcache/retrieval.hpp"

namespace subgcache {

enum class RunMode { Baseline, SubgCache };

RunMode run_mode_from_string(const std::string& name);
std::string to_string(RunMode m);

enum class SoftPrefixMode { Auto, On, Off };  // Auto: on for node-edge-topk only

struct RunConfig {
    std::string graph_nodes_path;
    std::string graph_edges_path;
    std::string queries_path;
    bool undirected = false;

    RunMode mode = RunMode::SubgCache;
    uint32_t batch_size = 0;  // 0 = all queries in the file

    RetrievalConfig retrieval;
    ClusterConfig cluster;
    ToyLmConfig lm;
    uint32_t question_budget = 128;
    uint64_t seed = 7;  // master seed; encoder seeds derive from it

    SoftPrefixMode soft_prefix = SoftPrefixMode::Auto;
    bool answer_lookup = true;  // copy-pointer answering mode
    bool parallel_queries = false;

    std::string report_path;
    std::string ledger_path;
    std::string dump_retrieval_dir;
    std::string merge_trace_path;
    std::string kernel_backend = "auto";

    bool soft_prefix_enabled() const {
        if (soft_prefix == SoftPrefixMode::On) return true;
        if (soft_prefix == SoftPrefixMode::Off) return false;
        return retrieval.strategy == RetrievalStrategy::NodeEdgeTopK;
    }
};

struct QueryMetricsRow {
    int64_t id = 0;
    uint32_t cluster_id = 0;
    bool fallback = false;
    bool correct = false;
    std::string generated;
    uint32_t n_generated = 0;
    double rt_ms = 0, ttft_ms = 0, pftt_ms = 0;
    uint64_t rt_proxy = 0, ttft_proxy = 0, pftt_proxy = 0;
    uint64_t prefill_tokens = 0;
    uint64_t context_tokens = 0;

    friend bool operator==(const QueryMetricsRow&, const QueryMetricsRow&) = default;
};

struct ClusterProcessing {
    double retrieval_ms = 0;  // reported alongside, shared by both modes
    double encode_ms = 0;
    double cluster_ms = 0;
    double merge_ms = 0;
    uint64_t encode_ops = 0;
    uint64_t cluster_ops = 0;
    uint64_t merge_ops = 0;

    double total_ms() const { return encode_ms + cluster_ms + merge_ms; }
    uint64_t total_ops() const { return encode_ops + cluster_ops + merge_ops; }
    friend bool operator==(const ClusterProcessing&, const ClusterProcessing&) = default;
};

struct Aggregate {
    uint32_t m = 0;
    uint32_t n_clusters = 0;
    uint32_t n_fallbacks = 0;
    double acc_percent = 0;
    double mean_rt_ms = 0, mean_ttft_ms = 0, mean_pftt_ms = 0;
    double mean_rt_proxy = 0, mean_ttft_proxy = 0, mean_pftt_proxy = 0;
    uint64_t total_prefill_tokens = 0;  // representative prefills + per-query tokens
    uint64_t total_llm_flop_proxy = 0;  // prefill + extend + decode work

    friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

struct BatchReport {
    std::string mode;
    uint64_t dataset_digest = 0;
    uint64_t lm_seed = 0;
    RunConfig config;
    std::vector<QueryMetricsRow> queries;
    Aggregate aggregate;
    ClusterProcessing cluster_processing;
    CacheLedger ledger;

    std::string to_json() const;
    static BatchReport from_json(const std::string& text);
    static BatchReport load(const std::string& path);
};

// Case-insensitive containment of the normalized gold answer in the
// normalized generation; punctuation stripped, whitespace collapsed.
bool score_answer(const std::string& generated, const std::string& gold);
std::string normalize_answer(const std::string& text);

// The machine-independent latency surrogate (see cost_model.hpp).
inline uint64_t cost_model(uint64_t prefix_cached, uint64_t new_tokens, const LmShape& shape) {
    return flop_proxy(prefix_cached, new_tokens, shape);
}

// End-to-end run. Baseline: per query retrieve -> prompt -> full prefill ->
// decode. SubgCache: retrieve all -> encode -> agglomerate -> merge per
// cluster -> cluster-wise cache reuse. Writes report/ledger/dump files when
// the config names them.
BatchReport run(const RunConfig& config);

struct SpeedupTable {
    double acc_delta_pp = 0;  // treatment minus baseline, percentage points
    double rt_wall = 0, ttft_wall = 0, pftt_wall = 0;      // baseline / treatment
    double rt_proxy = 0, ttft_proxy = 0, pftt_proxy = 0;
    std::string to_json() const;
    std::string to_text() const;
};

// Ratios are baseline / treatment, so > 1 means the treatment is faster.
// Refuses reports with mismatched dataset digest or LM seed.
SpeedupTable compare_reports(const BatchReport& base, const BatchReport& treat);

}  // namespace subgcache

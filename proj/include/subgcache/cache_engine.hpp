#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "subgcache/encoders.hpp"
#include "subgcache/graph_store.hpp"
#include "subgcache/lm_core.hpp"

namespace subgcache {

struct PromptTemplate {
    std::string header = "Use the following graph to answer the question.\n\n";
    std::string question_prefix = "\nQuestion: ";
    std::string answer_marker = "\nAnswer:";
};

struct PromptBudget {
    uint32_t max_seq_len = 1024;
    uint32_t question_budget = 128;  // tokens reserved for the question part
    uint32_t max_new_tokens = 32;
    bool soft_token = false;  // one extra position when a soft prefix is used

    // Token budget left for the prompt prefix (incl. BOS).
    uint32_t prefix_budget() const {
        uint32_t reserved = question_budget + max_new_tokens + (soft_token ? 1 : 0);
        return reserved >= max_seq_len ? 0 : max_seq_len - reserved;
    }
};

struct PromptParts {
    std::string prefix_text;    // header + serialized subgraph, truncated to budget
    std::string question_text;  // question wrapper, truncated to the question budget
    uint32_t dropped_edge_rows = 0;
    uint32_t dropped_node_rows = 0;
};

// The prefix is a pure function of the subgraph: same subgraph and budget
// give byte-identical prefixes no matter which query asks. Oversized
// prefixes drop edge rows from the end of the serialized block, then node
// rows, keeping headers and low-id content stable.
PromptParts build_prompt(const PromptTemplate& tmpl, const Subgraph& s,
                         const std::string& question, const PromptBudget& budget);

struct ClusterMember {
    size_t query_index = 0;
    int64_t query_id = 0;
    std::vector<TokenId> question_tokens;  // continuation bytes, no BOS
    std::vector<TokenId> answer_tokens;    // copy-pointer target; empty = no lookup
    // standalone path used when the shared prefix + question cannot fit
    std::vector<TokenId> standalone_prefix_tokens;  // BOS + own prompt prefix
    std::optional<EmbeddingVec> standalone_soft;
};

struct ClusterJob {
    uint32_t cluster_id = 0;
    Subgraph representative;
    std::vector<TokenId> prefix_tokens;  // BOS + prefix bytes, no soft slot
    std::optional<EmbeddingVec> soft_prefix;
    std::vector<ClusterMember> members;
};

struct QueryOutcome {
    size_t query_index = 0;
    int64_t query_id = 0;
    uint32_t cluster_id = 0;
    bool fallback = false;
    GenerationResult gen;
    double rt_ms = 0, ttft_ms = 0, pftt_ms = 0;
    uint64_t rt_proxy = 0, ttft_proxy = 0, pftt_proxy = 0;
    uint64_t prefill_tokens = 0;  // tokens this query itself pushed through prefill/extend
    uint64_t context_tokens = 0;  // prompt length seen by this query, incl. shared prefix
};

struct ClusterLedgerEntry {
    uint32_t cluster_id = 0;
    double seal_ms = 0, release_ms = 0;  // offsets from batch start
    size_t resident_kv_bytes = 0;
    size_t prefix_tokens = 0;
    uint64_t prefix_flop_proxy = 0;
    uint64_t prefix_digest = 0;
    uint32_t hits = 0;
    uint32_t fallbacks = 0;
};

struct CacheLedger {
    std::vector<ClusterLedgerEntry> entries;
    std::string to_json() const;
};

struct EngineOptions {
    uint32_t max_new_tokens = 32;
    bool parallel_queries = false;
    float pointer_bonus = 100.0f;
    std::chrono::steady_clock::time_point batch_start = std::chrono::steady_clock::now();
};

// One cluster: prefill the representative prompt once, seal it, serve every
// member off the shared prefix (optionally in parallel), then release. A
// member whose question cannot fit in the remaining context is served on the
// standalone path instead and marked as a fallback.
std::vector<QueryOutcome> process_cluster(const ClusterJob& job, const ToyLm& lm,
                                          const EngineOptions& opts, ClusterLedgerEntry& ledger);

// Serves one query without any shared cache: full prompt prefill + decode.
// Used by baseline mode and by fallbacks, so both take the identical path.
QueryOutcome serve_standalone(const ToyLm& lm, std::span<const TokenId> prompt_tokens,
                              std::span<const TokenId> question_tokens,
                              std::span<const TokenId> answer_tokens,
                              const std::optional<EmbeddingVec>& soft,
                              const EngineOptions& opts);

struct BatchRunResult {
    std::vector<QueryOutcome> outcomes;  // sorted by query_index
    CacheLedger ledger;
};

// Processes jobs in ascending cluster id; at most one sealed prefix is
// resident at a time.
BatchRunResult run_batch(std::vector<ClusterJob>& jobs, const ToyLm& lm,
                         const EngineOptions& opts);

}  // namespace subgcache

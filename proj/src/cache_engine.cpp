#include "subgcache/cache_engine.hpp"

#include <algorithm>
#include <future>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "subgcache/errors.hpp"

namespace subgcache {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point base, Clock::time_point t) {
    return std::chrono::duration<double, std::milli>(t - base).count();
}

double ms_between_ns(int64_t a_ns, int64_t b_ns) {
    return static_cast<double>(b_ns - a_ns) / 1e6;
}

int64_t now_ns() { return Clock::now().time_since_epoch().count(); }

}  // namespace

PromptParts build_prompt(const PromptTemplate& tmpl, const Subgraph& s,
                         const std::string& question, const PromptBudget& budget) {
    PromptParts parts;

    // Question side first: fixed wrapper, tail-truncate the question text.
    std::string q = question;
    size_t wrapper = tmpl.question_prefix.size() + tmpl.answer_marker.size();
    if (budget.question_budget <= wrapper) {
        throw DomainError("question budget smaller than the question template");
    }
    size_t q_room = budget.question_budget - wrapper;
    if (q.size() > q_room) q.resize(q_room);
    parts.question_text = tmpl.question_prefix + q + tmpl.answer_marker;

    // Prefix side: header + serialized block, rows dropped from the end of
    // the edge block first, then the node block.
    size_t budget_bytes = budget.prefix_budget() == 0 ? 0 : budget.prefix_budget() - 1;  // BOS
    SerializedRows rows = serialize_subgraph_rows(s);

    auto total_bytes = [&](size_t keep_nodes, size_t keep_edges) {
        size_t bytes = tmpl.header.size() + kNodeCsvHeader.size() + kEdgeCsvHeader.size() + 2;
        for (size_t i = 0; i < keep_nodes; ++i) bytes += rows.node_rows[i].size() + 1;
        for (size_t i = 0; i < keep_edges; ++i) bytes += rows.edge_rows[i].size() + 1;
        return bytes;
    };

    size_t keep_edges = rows.edge_rows.size(), keep_nodes = rows.node_rows.size();
    while (keep_edges > 0 && total_bytes(keep_nodes, keep_edges) > budget_bytes) --keep_edges;
    while (keep_nodes > 0 && total_bytes(keep_nodes, keep_edges) > budget_bytes) --keep_nodes;
    if (total_bytes(keep_nodes, keep_edges) > budget_bytes) {
        throw CapacityError("prompt headers alone exceed the prefix budget");
    }
    parts.dropped_edge_rows = static_cast<uint32_t>(rows.edge_rows.size() - keep_edges);
    parts.dropped_node_rows = static_cast<uint32_t>(rows.node_rows.size() - keep_nodes);

    std::ostringstream out;
    out << tmpl.header << kNodeCsvHeader << '\n';
    for (size_t i = 0; i < keep_nodes; ++i) out << rows.node_rows[i] << '\n';
    out << kEdgeCsvHeader << '\n';
    for (size_t i = 0; i < keep_edges; ++i) out << rows.edge_rows[i] << '\n';
    parts.prefix_text = out.str();
    return parts;
}

namespace {

// Decode bookkeeping shared by the cached and standalone paths.
QueryOutcome finish_outcome(const ToyLm& lm, KVCache& cache, const ClusterMember& member,
                            const EngineOptions& opts, int64_t t_dequeue_ns, int64_t t_work_ns,
                            uint64_t pftt_proxy, uint64_t extra_ttft_proxy, uint64_t own_tokens,
                            bool fallback, uint32_t cluster_id) {
    DecodeOptions dopts;
    if (!member.answer_tokens.empty()) {
        dopts.hint = CopyPointerHint{member.answer_tokens, cache.prefix_token_count(),
                                     opts.pointer_bonus};
        if (!cache.sealed()) {
            // standalone path: the prompt prefix is everything before the question
            dopts.hint->search_limit = cache.token_count() - member.question_tokens.size();
        }
    }
    QueryOutcome out;
    out.query_index = member.query_index;
    out.query_id = member.query_id;
    out.cluster_id = cluster_id;
    out.fallback = fallback;
    out.context_tokens = cache.token_count();
    out.gen = lm.greedy_decode(cache, opts.max_new_tokens, dopts);

    int64_t first_ns = out.gen.timestamps_ns.empty() ? now_ns() : out.gen.timestamps_ns.front();
    int64_t last_ns = out.gen.timestamps_ns.empty() ? first_ns : out.gen.timestamps_ns.back();
    out.pftt_ms = ms_between_ns(t_work_ns, first_ns);
    out.ttft_ms = ms_between_ns(t_dequeue_ns, first_ns);
    out.rt_ms = ms_between_ns(t_dequeue_ns, last_ns);

    out.pftt_proxy = pftt_proxy;
    out.ttft_proxy = pftt_proxy + extra_ttft_proxy;
    out.rt_proxy = out.ttft_proxy + out.gen.decode_flop_proxy;
    out.prefill_tokens = own_tokens;
    return out;
}

}  // namespace

QueryOutcome serve_standalone(const ToyLm& lm, std::span<const TokenId> prompt_tokens,
                              std::span<const TokenId> question_tokens,
                              std::span<const TokenId> answer_tokens,
                              const std::optional<EmbeddingVec>& soft,
                              const EngineOptions& opts) {
    int64_t t_dequeue = now_ns();
    std::vector<TokenId> full(prompt_tokens.begin(), prompt_tokens.end());
    full.insert(full.end(), question_tokens.begin(), question_tokens.end());

    // Last-resort trim so an out-of-budget query still completes instead of
    // aborting the batch; generation room is preserved.
    size_t allowed = lm.config().max_seq_len;
    allowed -= std::min<size_t>(allowed, lm.config().max_new_tokens + (soft ? 1 : 0));
    if (full.size() > allowed) full.resize(allowed);
    size_t prefix_kept = std::min(prompt_tokens.size(), full.size());

    ClusterMember m;
    m.question_tokens.assign(full.begin() + static_cast<long>(prefix_kept), full.end());
    m.answer_tokens.assign(answer_tokens.begin(), answer_tokens.end());
    int64_t t_work = now_ns();
    KVCache cache =
        soft ? lm.prefill(full, std::span<const float>(soft->data(), soft->size()))
             : lm.prefill(full);
    uint64_t total = full.size() + (soft ? 1 : 0);
    uint64_t proxy = flop_proxy(0, total, lm.config().shape());
    return finish_outcome(lm, cache, m, opts, t_dequeue, t_work, proxy, 0, total, false, 0);
}

std::vector<QueryOutcome> process_cluster(const ClusterJob& job, const ToyLm& lm,
                                          const EngineOptions& opts, ClusterLedgerEntry& ledger) {
    if (job.members.empty()) throw DomainError("cluster job has no members");
    const uint32_t max_seq = lm.config().max_seq_len;
    const LmShape shape = lm.config().shape();

    // Dequeue of the first member starts the clock before the shared prefill:
    // the representative's cost is paid inside that member's TTFT window and
    // amortizes across the cluster in the aggregate.
    int64_t t_first_dequeue = now_ns();

    KVCache shared =
        job.soft_prefix
            ? lm.prefill(job.prefix_tokens,
                         std::span<const float>(job.soft_prefix->data(), job.soft_prefix->size()))
            : lm.prefill(job.prefix_tokens);
    shared.seal();

    size_t prefix_len = shared.token_count();
    uint64_t prefix_proxy = flop_proxy(0, prefix_len, shape);
    ledger.cluster_id = job.cluster_id;
    ledger.seal_ms = ms_since(opts.batch_start, Clock::now());
    ledger.resident_kv_bytes = shared.resident_kv_bytes();
    ledger.prefix_tokens = prefix_len;
    ledger.prefix_flop_proxy = prefix_proxy;
    ledger.prefix_digest = shared.prefix_digest();

    auto serve_member = [&](size_t mi) -> QueryOutcome {
        const ClusterMember& member = job.members[mi];
        int64_t t_dequeue = mi == 0 ? t_first_dequeue : now_ns();

        if (prefix_len + member.question_tokens.size() + opts.max_new_tokens > max_seq) {
            // Cannot fit on the shared prefix: standalone full-prompt path.
            QueryOutcome out = serve_standalone(
                lm, member.standalone_prefix_tokens, member.question_tokens,
                member.answer_tokens, member.standalone_soft, opts);
            out.query_index = member.query_index;
            out.query_id = member.query_id;
            out.cluster_id = job.cluster_id;
            out.fallback = true;
            return out;
        }

        KVCache cache = shared.fork();
        int64_t t_work = now_ns();
        lm.extend(cache, member.question_tokens);
        uint64_t extend_proxy = flop_proxy(prefix_len, member.question_tokens.size(), shape);
        QueryOutcome out = finish_outcome(lm, cache, member, opts, t_dequeue, t_work,
                                          extend_proxy, mi == 0 ? prefix_proxy : 0,
                                          member.question_tokens.size(), false, job.cluster_id);
        cache.release_suffix();
        return out;
    };

    std::vector<QueryOutcome> outcomes(job.members.size());
    if (opts.parallel_queries && job.members.size() > 1) {
        std::vector<std::future<QueryOutcome>> futs;
        futs.reserve(job.members.size());
        for (size_t mi = 0; mi < job.members.size(); ++mi) {
            futs.push_back(std::async(std::launch::async, serve_member, mi));
        }
        for (size_t mi = 0; mi < job.members.size(); ++mi) outcomes[mi] = futs[mi].get();
    } else {
        for (size_t mi = 0; mi < job.members.size(); ++mi) outcomes[mi] = serve_member(mi);
    }

    for (const QueryOutcome& o : outcomes) {
        if (o.fallback) ++ledger.fallbacks;
        else ++ledger.hits;
    }
    if (shared.prefix_digest() != ledger.prefix_digest) {
        throw std::logic_error("sealed prefix KV bytes changed while serving members");
    }
    ledger.release_ms = ms_since(opts.batch_start, Clock::now());  // prefix dropped here
    return outcomes;
}

BatchRunResult run_batch(std::vector<ClusterJob>& jobs, const ToyLm& lm,
                         const EngineOptions& opts) {
    std::sort(jobs.begin(), jobs.end(),
              [](const ClusterJob& a, const ClusterJob& b) { return a.cluster_id < b.cluster_id; });
    BatchRunResult res;
    for (ClusterJob& job : jobs) {
        ClusterLedgerEntry entry;
        std::vector<QueryOutcome> outs = process_cluster(job, lm, opts, entry);
        res.ledger.entries.push_back(entry);
        for (QueryOutcome& o : outs) res.outcomes.push_back(std::move(o));
    }
    std::sort(res.outcomes.begin(), res.outcomes.end(),
              [](const QueryOutcome& a, const QueryOutcome& b) {
                  return a.query_index < b.query_index;
              });
    return res;
}

std::string CacheLedger::to_json() const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const ClusterLedgerEntry& e : entries) {
        nlohmann::ordered_json j;
        j["cluster_id"] = e.cluster_id;
        j["seal_ms"] = e.seal_ms;
        j["release_ms"] = e.release_ms;
        j["resident_kv_bytes"] = e.resident_kv_bytes;
        j["prefix_tokens"] = e.prefix_tokens;
        j["prefix_flop_proxy"] = e.prefix_flop_proxy;
        j["prefix_digest"] = e.prefix_digest;
        j["hits"] = e.hits;
        j["fallbacks"] = e.fallbacks;
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

}  // namespace subgcache

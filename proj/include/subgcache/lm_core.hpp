#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subgcache/cost_model.hpp"
#include "subgcache/tokenizer.hpp"

namespace subgcache {

struct ToyLmConfig {
    uint32_t layers = 4;
    uint32_t heads = 4;
    uint32_t model_dim = 64;
    uint32_t ffn_hidden = 256;
    uint32_t max_seq_len = 1024;
    uint32_t max_new_tokens = 32;
    uint64_t seed = 3;

    uint32_t head_dim() const { return model_dim / heads; }
    LmShape shape() const { return {layers, heads, head_dim(), ffn_hidden}; }
};

class ToyLm;

// Per-layer key/value tensors split into a shared immutable prefix segment
// and a private suffix. Sealing freezes everything written so far into the
// prefix; forks share that segment by reference, each with its own suffix,
// so many decodes can run concurrently against one sealed prefix.
class KVCache {
public:
    KVCache() = default;

    size_t token_count() const { return prefix_token_count() + suffix_.tokens.size(); }
    size_t prefix_token_count() const { return prefix_ ? prefix_->tokens.size() : 0; }
    size_t max_tokens() const { return max_seq_; }
    bool sealed() const { return prefix_ != nullptr; }

    // Logits at the final position, updated by every prefill/extend.
    const std::vector<float>& last_logits() const { return last_logits_; }

    // Full context token ids (prefix then suffix).
    std::vector<TokenId> context_tokens() const;

    // Freezes the current content as the shared prefix segment.
    void seal();

    // New handle sharing this cache's sealed prefix; private empty suffix.
    // The fork starts with the sealed-state logits and a zero flop counter.
    KVCache fork() const;

    // Drops suffix tokens so that token_count() == n. Shrinking into the
    // sealed prefix is a programming error (throws std::logic_error).
    void truncate_to(size_t n);

    void release_suffix() { truncate_to(prefix_token_count()); }

    // FNV digest over the sealed prefix K/V bytes; 0 when unsealed.
    uint64_t prefix_digest() const;

    size_t resident_kv_bytes() const;

    // Token-FLOP proxy spent through this handle (resets on fork).
    uint64_t flop_spent() const { return flop_spent_; }

private:
    friend class ToyLm;

    struct Segment {
        std::vector<std::vector<float>> k, v;  // [layer][token*dim]
        std::vector<TokenId> tokens;
    };

    KVCache(uint32_t layers, uint32_t dim, uint32_t max_seq)
        : layers_(layers), dim_(dim), max_seq_(max_seq) {
        suffix_.k.resize(layers);
        suffix_.v.resize(layers);
    }

    uint32_t layers_ = 0;
    uint32_t dim_ = 0;
    uint32_t max_seq_ = 0;
    std::shared_ptr<const Segment> prefix_;
    Segment suffix_;
    std::vector<float> last_logits_;
    uint64_t flop_spent_ = 0;
};

// Greedy token selection; ties keep the lowest token id. An optional bias
// adds `bonus` to one target token before comparing.
TokenId greedy_argmax(std::span<const float> logits, TokenId bias_target = -1, float bonus = 0.0f);

struct CopyPointerHint {
    // Bias decoding toward emitting `answer_tokens` (then EOS) when that
    // sequence occurs verbatim in the context before `search_limit`.
    std::vector<TokenId> answer_tokens;
    size_t search_limit = SIZE_MAX;
    float logit_bonus = 100.0f;
};

struct DecodeOptions {
    std::optional<CopyPointerHint> hint;
};

struct GenerationResult {
    std::vector<TokenId> token_ids;
    std::string text;
    std::vector<int64_t> timestamps_ns;  // strictly increasing, steady clock
    uint64_t prefill_flop_proxy = 0;     // spent on this handle before decoding
    uint64_t decode_flop_proxy = 0;      // spent by decode-time extends
};

// Deterministic decoder-only transformer with frozen seeded weights, rotary
// positions and a two-segment KV cache. Forward passes are sequential per
// token with a fixed reduction order, so results are bit-identical across
// runs and thread counts.
class ToyLm {
public:
    explicit ToyLm(ToyLmConfig cfg = {});

    const ToyLmConfig& config() const { return cfg_; }

    KVCache new_cache() const { return KVCache(cfg_.layers, cfg_.model_dim, cfg_.max_seq_len); }

    // Runs the full sequence through the model into a fresh cache. An
    // optional soft prefix vector (length model_dim) is injected as the
    // embedding of position 0 under the GRAPH-SOFT-SLOT token. Returns the
    // populated cache; last-position logits live in cache.last_logits().
    KVCache prefill(std::span<const TokenId> tokens, std::span<const float> soft_prefix = {}) const;

    // Appends tokens to an existing cache; new K/V land in the private
    // suffix, the sealed prefix is only read. Zero tokens is a no-op.
    // Returns cache.last_logits().
    const std::vector<float>& extend(KVCache& cache, std::span<const TokenId> tokens) const;

    // Greedy argmax decoding, at most max_new tokens, stopping at EOS.
    // Argmax ties break toward the lowest token id.
    GenerationResult greedy_decode(KVCache& cache, size_t max_new,
                                   const DecodeOptions& opts = {}) const;

    // Test hook: logits at every position of a fresh prefill.
    std::vector<std::vector<float>> prefill_collect_logits(std::span<const TokenId> tokens) const;

    uint64_t prefill_proxy_total() const { return prefill_proxy_total_.load(); }
    uint64_t extend_proxy_total() const { return extend_proxy_total_.load(); }

private:
    void forward(KVCache& cache, const float* embeddings, std::span<const TokenId> tokens,
                 std::vector<std::vector<float>>* all_logits) const;
    void embed_tokens(std::span<const TokenId> tokens, float* out) const;

    ToyLmConfig cfg_;
    std::vector<float> tok_embedding_;  // vocab x dim
    std::vector<float> head_;           // vocab x dim
    struct LayerWeights {
        std::vector<float> wqkv;  // 3*dim x dim
        std::vector<float> wo;    // dim x dim
        std::vector<float> w1;    // ffn x dim
        std::vector<float> w2;    // dim x ffn
    };
    std::vector<LayerWeights> layers_;
    std::vector<float> rope_cos_, rope_sin_;  // max_seq x head_dim/2

    mutable std::atomic<uint64_t> prefill_proxy_total_{0};
    mutable std::atomic<uint64_t> extend_proxy_total_{0};
};

}  // namespace subgcache

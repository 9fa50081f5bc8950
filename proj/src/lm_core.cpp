#include "subgcache/lm_core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "subgcache/errors.hpp"
#include "subgcache/kernels.hpp"
#include "subgcache/rng.hpp"

namespace subgcache {
namespace {

constexpr float kRmsEps = 1e-5f;
constexpr float kRopeBase = 10000.0f;

void fill_uniform(std::vector<float>& w, uint64_t seed, size_t fan_in) {
    float scale = std::sqrt(3.0f / static_cast<float>(fan_in));
    SplitMix64 rng(splitmix64_once(seed));
    for (float& v : w) v = rng.uniform(-scale, scale);
}

// x normalized by its RMS into out (fixed reduction order via kernels.dot).
void rmsnorm(const float* x, float* out, size_t n) {
    const auto& K = kernels::active();
    float ms = K.dot(x, x, n) / static_cast<float>(n);
    float inv = 1.0f / std::sqrt(ms + kRmsEps);
    for (size_t i = 0; i < n; ++i) out[i] = x[i] * inv;
}

int64_t monotonic_ns() {
    return std::chrono::steady_clock::now().time_since_epoch().count();
}

}  // namespace

TokenId greedy_argmax(std::span<const float> logits, TokenId bias_target, float bonus) {
    TokenId best = 0;
    float best_val = logits[0] + (bias_target == 0 ? bonus : 0.0f);
    for (TokenId v = 1; v < static_cast<TokenId>(logits.size()); ++v) {
        float val = logits[v] + (v == bias_target ? bonus : 0.0f);
        if (val > best_val) {
            best_val = val;
            best = v;
        }
    }
    return best;
}

std::vector<TokenId> KVCache::context_tokens() const {
    std::vector<TokenId> out;
    out.reserve(token_count());
    if (prefix_) out.insert(out.end(), prefix_->tokens.begin(), prefix_->tokens.end());
    out.insert(out.end(), suffix_.tokens.begin(), suffix_.tokens.end());
    return out;
}

void KVCache::seal() {
    auto merged = std::make_shared<Segment>();
    merged->k.resize(layers_);
    merged->v.resize(layers_);
    if (prefix_) {
        merged->tokens = prefix_->tokens;
        for (uint32_t l = 0; l < layers_; ++l) {
            merged->k[l] = prefix_->k[l];
            merged->v[l] = prefix_->v[l];
        }
    }
    merged->tokens.insert(merged->tokens.end(), suffix_.tokens.begin(), suffix_.tokens.end());
    for (uint32_t l = 0; l < layers_; ++l) {
        merged->k[l].insert(merged->k[l].end(), suffix_.k[l].begin(), suffix_.k[l].end());
        merged->v[l].insert(merged->v[l].end(), suffix_.v[l].begin(), suffix_.v[l].end());
        suffix_.k[l].clear();
        suffix_.v[l].clear();
    }
    suffix_.tokens.clear();
    prefix_ = std::move(merged);
}

KVCache KVCache::fork() const {
    KVCache out(layers_, dim_, max_seq_);
    out.prefix_ = prefix_;
    out.last_logits_ = last_logits_;
    if (!suffix_.tokens.empty()) {
        out.suffix_ = suffix_;  // deep copy of the private segment
    }
    return out;
}

void KVCache::truncate_to(size_t n) {
    size_t p = prefix_token_count();
    if (n < p) {
        throw std::logic_error("KVCache: cannot truncate into the sealed prefix segment");
    }
    size_t keep = n - p;
    if (keep > suffix_.tokens.size()) {
        throw DomainError("KVCache: truncate_to beyond current token count");
    }
    suffix_.tokens.resize(keep);
    for (uint32_t l = 0; l < layers_; ++l) {
        suffix_.k[l].resize(keep * dim_);
        suffix_.v[l].resize(keep * dim_);
    }
}

uint64_t KVCache::prefix_digest() const {
    if (!prefix_) return 0;
    uint64_t h = 0xcbf29ce484222325ULL;
    for (uint32_t l = 0; l < layers_; ++l) {
        h = fnv1a64_bytes(prefix_->k[l].data(), prefix_->k[l].size() * sizeof(float), h);
        h = fnv1a64_bytes(prefix_->v[l].data(), prefix_->v[l].size() * sizeof(float), h);
    }
    return h;
}

size_t KVCache::resident_kv_bytes() const {
    return token_count() * static_cast<size_t>(layers_) * 2 * dim_ * sizeof(float);
}

ToyLm::ToyLm(ToyLmConfig cfg) : cfg_(cfg) {
    if (cfg_.model_dim == 0 || cfg_.heads == 0 || cfg_.layers == 0) {
        throw DomainError("lm config needs layers, heads, dim >= 1");
    }
    if (cfg_.model_dim % cfg_.heads != 0) {
        throw DomainError("model_dim must be divisible by heads");
    }
    uint32_t d = cfg_.model_dim;

    tok_embedding_.resize(static_cast<size_t>(Tokenizer::kVocabSize) * d);
    head_.resize(static_cast<size_t>(Tokenizer::kVocabSize) * d);
    fill_uniform(tok_embedding_, cfg_.seed ^ 0x10ad1ULL, d);
    fill_uniform(head_, cfg_.seed ^ 0x8eadULL, d);

    layers_.resize(cfg_.layers);
    for (uint32_t l = 0; l < cfg_.layers; ++l) {
        LayerWeights& w = layers_[l];
        w.wqkv.resize(3ull * d * d);
        w.wo.resize(static_cast<size_t>(d) * d);
        w.w1.resize(static_cast<size_t>(cfg_.ffn_hidden) * d);
        w.w2.resize(static_cast<size_t>(d) * cfg_.ffn_hidden);
        fill_uniform(w.wqkv, cfg_.seed ^ (0x9a11ULL + l * 4), d);
        fill_uniform(w.wo, cfg_.seed ^ (0x9a12ULL + l * 4), d);
        fill_uniform(w.w1, cfg_.seed ^ (0x9a13ULL + l * 4), d);
        fill_uniform(w.w2, cfg_.seed ^ (0x9a14ULL + l * 4), cfg_.ffn_hidden);
    }

    uint32_t half = cfg_.head_dim() / 2;
    rope_cos_.resize(static_cast<size_t>(cfg_.max_seq_len) * half);
    rope_sin_.resize(static_cast<size_t>(cfg_.max_seq_len) * half);
    for (uint32_t p = 0; p < cfg_.max_seq_len; ++p) {
        for (uint32_t i = 0; i < half; ++i) {
            float freq = std::pow(kRopeBase, -2.0f * static_cast<float>(i) /
                                                  static_cast<float>(cfg_.head_dim()));
            float angle = static_cast<float>(p) * freq;
            rope_cos_[static_cast<size_t>(p) * half + i] = std::cos(angle);
            rope_sin_[static_cast<size_t>(p) * half + i] = std::sin(angle);
        }
    }
}

void ToyLm::embed_tokens(std::span<const TokenId> tokens, float* out) const {
    uint32_t d = cfg_.model_dim;
    for (size_t t = 0; t < tokens.size(); ++t) {
        TokenId id = tokens[t];
        if (id < 0 || id >= Tokenizer::kVocabSize) {
            throw DomainError("token id out of vocab: " + std::to_string(id));
        }
        std::memcpy(out + t * d, tok_embedding_.data() + static_cast<size_t>(id) * d,
                    d * sizeof(float));
    }
}

// Processes `tokens.size()` new embeddings against the cache, appending K/V
// to the suffix segment. Attention for each new token covers every token
// already in the cache plus itself; rotary rotation uses absolute positions,
// so a split computation matches an unsplit one exactly.
void ToyLm::forward(KVCache& cache, const float* embeddings, std::span<const TokenId> tokens,
                    std::vector<std::vector<float>>* all_logits) const {
    const auto& K = kernels::active();
    const uint32_t d = cfg_.model_dim;
    const uint32_t hd = cfg_.head_dim();
    const uint32_t half = hd / 2;
    const float inv_sqrt_hd = 1.0f / std::sqrt(static_cast<float>(hd));
    const size_t n_new = tokens.size();
    if (n_new == 0) return;

    if (cache.layers_ != cfg_.layers || cache.dim_ != d) {
        throw DomainError("KV cache does not belong to this model");
    }
    if (cache.token_count() + n_new > cfg_.max_seq_len) {
        throw CapacityError("sequence length " + std::to_string(cache.token_count() + n_new) +
                            " exceeds max " + std::to_string(cfg_.max_seq_len));
    }

    // Per-call scratch; nothing is shared across threads.
    std::vector<float> x(n_new * d);
    std::vector<float> xn(d), qkv(3ull * d), attn(d), proj(d);
    std::vector<float> ffn_h(cfg_.ffn_hidden);
    std::vector<float> scores(cfg_.max_seq_len);
    std::memcpy(x.data(), embeddings, n_new * d * sizeof(float));

    const size_t prefix_n = cache.prefix_token_count();
    const size_t base = cache.token_count();

    for (uint32_t l = 0; l < cfg_.layers; ++l) {
        cache.suffix_.k[l].reserve(cache.suffix_.k[l].size() + n_new * d);
        cache.suffix_.v[l].reserve(cache.suffix_.v[l].size() + n_new * d);
    }

    for (size_t t = 0; t < n_new; ++t) {
        const size_t pos = base + t;
        float* xt = x.data() + t * d;
        const float* cos_p = rope_cos_.data() + pos * half;
        const float* sin_p = rope_sin_.data() + pos * half;

        for (uint32_t l = 0; l < cfg_.layers; ++l) {
            const LayerWeights& w = layers_[l];
            rmsnorm(xt, xn.data(), d);
            K.matvec(w.wqkv.data(), xn.data(), qkv.data(), 3ull * d, d);
            float* q = qkv.data();
            float* k = qkv.data() + d;
            const float* v = qkv.data() + 2ull * d;

            // rotary rotation of q and k, per head, pairs (i, i+half)
            for (uint32_t h = 0; h < cfg_.heads; ++h) {
                float* qh = q + h * hd;
                float* kh = k + h * hd;
                for (uint32_t i = 0; i < half; ++i) {
                    float c = cos_p[i], s = sin_p[i];
                    float q0 = qh[i], q1 = qh[i + half];
                    qh[i] = q0 * c - q1 * s;
                    qh[i + half] = q1 * c + q0 * s;
                    float k0 = kh[i], k1 = kh[i + half];
                    kh[i] = k0 * c - k1 * s;
                    kh[i + half] = k1 * c + k0 * s;
                }
            }

            auto& sk = cache.suffix_.k[l];
            auto& sv = cache.suffix_.v[l];
            sk.insert(sk.end(), k, k + d);
            sv.insert(sv.end(), v, v + d);

            const float* pk = prefix_n ? cache.prefix_->k[l].data() : nullptr;
            const float* pv = prefix_n ? cache.prefix_->v[l].data() : nullptr;
            const size_t n_ctx = pos + 1;
            const size_t n_suffix = n_ctx - prefix_n;

            for (uint32_t h = 0; h < cfg_.heads; ++h) {
                float* qh = q + h * hd;
                K.scale(qh, inv_sqrt_hd, hd);
                for (size_t j = 0; j < prefix_n; ++j) {
                    scores[j] = K.dot(qh, pk + j * d + h * hd, hd);
                }
                for (size_t j = 0; j < n_suffix; ++j) {
                    scores[prefix_n + j] = K.dot(qh, sk.data() + j * d + h * hd, hd);
                }

                float mx = K.reduce_max(scores.data(), n_ctx);
                for (size_t j = 0; j < n_ctx; ++j) scores[j] -= mx;
                float sum = K.exp_inplace(scores.data(), n_ctx);
                K.scale(scores.data(), 1.0f / sum, n_ctx);

                float* out_h = attn.data() + h * hd;
                std::memset(out_h, 0, hd * sizeof(float));
                for (size_t j = 0; j < prefix_n; ++j) {
                    K.axpy(out_h, scores[j], pv + j * d + h * hd, hd);
                }
                for (size_t j = 0; j < n_suffix; ++j) {
                    K.axpy(out_h, scores[prefix_n + j], sv.data() + j * d + h * hd, hd);
                }
            }

            K.matvec(w.wo.data(), attn.data(), proj.data(), d, d);
            K.add(xt, proj.data(), d);

            rmsnorm(xt, xn.data(), d);
            K.matvec(w.w1.data(), xn.data(), ffn_h.data(), cfg_.ffn_hidden, d);
            K.tanh_inplace(ffn_h.data(), cfg_.ffn_hidden);
            K.matvec(w.w2.data(), ffn_h.data(), proj.data(), d, cfg_.ffn_hidden);
            K.add(xt, proj.data(), d);
        }

        cache.suffix_.tokens.push_back(tokens[t]);

        const bool want_logits = (t + 1 == n_new) || all_logits;
        if (want_logits) {
            rmsnorm(xt, xn.data(), d);
            std::vector<float> logits(Tokenizer::kVocabSize);
            K.matvec(head_.data(), xn.data(), logits.data(), Tokenizer::kVocabSize, d);
            if (all_logits) all_logits->push_back(logits);
            if (t + 1 == n_new) cache.last_logits_ = std::move(logits);
        }
    }
}

KVCache ToyLm::prefill(std::span<const TokenId> tokens, std::span<const float> soft_prefix) const {
    KVCache cache = new_cache();
    size_t total = tokens.size() + (soft_prefix.empty() ? 0 : 1);
    if (total > cfg_.max_seq_len) {
        throw CapacityError("prompt of " + std::to_string(total) + " tokens exceeds max " +
                            std::to_string(cfg_.max_seq_len));
    }
    if (total == 0) return cache;

    uint32_t d = cfg_.model_dim;
    std::vector<float> embs(total * d);
    std::vector<TokenId> ids;
    ids.reserve(total);
    if (!soft_prefix.empty()) {
        if (soft_prefix.size() != d) {
            throw DomainError("soft prefix length must equal model_dim");
        }
        std::memcpy(embs.data(), soft_prefix.data(), d * sizeof(float));
        ids.push_back(Tokenizer::kGraphSoftSlot);
    }
    embed_tokens(tokens, embs.data() + ids.size() * d);
    ids.insert(ids.end(), tokens.begin(), tokens.end());

    forward(cache, embs.data(), ids, nullptr);
    uint64_t proxy = flop_proxy(0, total, cfg_.shape());
    cache.flop_spent_ += proxy;
    prefill_proxy_total_.fetch_add(proxy, std::memory_order_relaxed);
    return cache;
}

const std::vector<float>& ToyLm::extend(KVCache& cache, std::span<const TokenId> tokens) const {
    if (tokens.empty()) return cache.last_logits_;
    uint32_t d = cfg_.model_dim;
    std::vector<float> embs(tokens.size() * d);
    embed_tokens(tokens, embs.data());
    uint64_t proxy = flop_proxy(cache.token_count(), tokens.size(), cfg_.shape());
    forward(cache, embs.data(), tokens, nullptr);
    cache.flop_spent_ += proxy;
    extend_proxy_total_.fetch_add(proxy, std::memory_order_relaxed);
    return cache.last_logits_;
}

std::vector<std::vector<float>> ToyLm::prefill_collect_logits(
    std::span<const TokenId> tokens) const {
    KVCache cache = new_cache();
    if (tokens.size() > cfg_.max_seq_len) throw CapacityError("prompt exceeds max sequence length");
    std::vector<float> embs(tokens.size() * cfg_.model_dim);
    embed_tokens(tokens, embs.data());
    std::vector<std::vector<float>> all;
    forward(cache, embs.data(), tokens, &all);
    return all;
}

GenerationResult ToyLm::greedy_decode(KVCache& cache, size_t max_new,
                                      const DecodeOptions& opts) const {
    if (cache.token_count() == 0) throw DomainError("greedy_decode: cache is empty");
    GenerationResult res;
    res.prefill_flop_proxy = cache.flop_spent_;
    if (max_new == 0) return res;

    // Resolve the copy pointer: does the hinted answer occur in the context
    // window before search_limit?
    bool hint_found = false;
    std::span<const TokenId> answer;
    if (opts.hint && !opts.hint->answer_tokens.empty()) {
        answer = opts.hint->answer_tokens;
        std::vector<TokenId> ctx = cache.context_tokens();
        size_t limit = std::min(opts.hint->search_limit, ctx.size());
        if (answer.size() <= limit) {
            for (size_t start = 0; start + answer.size() <= limit; ++start) {
                if (std::equal(answer.begin(), answer.end(), ctx.begin() + start)) {
                    hint_found = true;
                    break;
                }
            }
        }
    }
    float bonus = opts.hint ? opts.hint->logit_bonus : 0.0f;

    int64_t last_ts = 0;
    for (size_t t = 0; t < max_new; ++t) {
        const std::vector<float>& logits = cache.last_logits();
        TokenId bias_target = -1;
        if (hint_found) {
            bias_target = t < answer.size() ? answer[t] : Tokenizer::kEos;
        }
        TokenId best = greedy_argmax(logits, bias_target, bonus);

        int64_t ts = monotonic_ns();
        if (ts <= last_ts) ts = last_ts + 1;
        last_ts = ts;
        res.timestamps_ns.push_back(ts);
        res.token_ids.push_back(best);

        if (best == Tokenizer::kEos) break;
        if (t + 1 == max_new) break;
        if (cache.token_count() + 1 > cfg_.max_seq_len) break;  // out of context

        TokenId next[1] = {best};
        uint64_t proxy = flop_proxy(cache.token_count(), 1, cfg_.shape());
        extend(cache, next);
        res.decode_flop_proxy += proxy;
    }
    res.text = Tokenizer::detokenize(res.token_ids);
    return res;
}

}  // namespace subgcache

#include "subgcache/encoders.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "subgcache/errors.hpp"
#include "subgcache/rng.hpp"

namespace subgcache {
namespace {

void check_same_dim(const EmbeddingVec& a, const EmbeddingVec& b) {
    if (a.size() != b.size()) {
        throw DomainError("embedding dim mismatch: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
    }
}

bool is_token_char(unsigned char c) {
    // Bytes >= 0x80 (UTF-8 continuations/starts) count as word characters so
    // non-ASCII words stay intact.
    return std::isalnum(c) || c >= 0x80;
}

}  // namespace

double cosine_similarity(const EmbeddingVec& a, const EmbeddingVec& b) {
    check_same_dim(a, b);
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0 || nb == 0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double euclidean_distance(const EmbeddingVec& a, const EmbeddingVec& b) {
    check_same_dim(a, b);
    double acc = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = static_cast<double>(a[i]) - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

TextEncoder::TextEncoder(TextEncoderConfig cfg) : cfg_(cfg) {
    if (cfg_.dim == 0) throw DomainError("text encoder dim must be >= 1");
    projection_.resize(static_cast<size_t>(cfg_.dim) * kBuckets);
    SplitMix64 rng(splitmix64_once(cfg_.seed ^ 0x7e87a11dULL));
    for (float& w : projection_) w = rng.uniform(-1.0f, 1.0f);
}

EmbeddingVec TextEncoder::embed(std::string_view text) const {
    std::vector<double> acc(cfg_.dim, 0.0);
    bool any_token = false;

    size_t i = 0;
    std::string token;
    while (i <= text.size()) {
        if (i < text.size() && is_token_char(static_cast<unsigned char>(text[i]))) {
            token += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
            ++i;
            continue;
        }
        if (!token.empty()) {
            any_token = true;
            uint64_t h = splitmix64_once(fnv1a64(token) ^ cfg_.hash_salt);
            uint32_t bucket = static_cast<uint32_t>(h % kBuckets);
            double sign = (h >> 32) & 1 ? 1.0 : -1.0;
            const float* col = projection_.data() + bucket;  // column stride kBuckets
            for (uint32_t d = 0; d < cfg_.dim; ++d) {
                acc[d] += sign * col[static_cast<size_t>(d) * kBuckets];
            }
            token.clear();
        }
        ++i;
    }

    EmbeddingVec out(cfg_.dim, 0.0f);
    if (!any_token) return out;  // zero vector for empty/token-free text

    double norm = 0;
    for (double v : acc) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0) {
        for (uint32_t d = 0; d < cfg_.dim; ++d) out[d] = static_cast<float>(acc[d] / norm);
    }
    return out;
}

GnnEncoder::GnnEncoder(GnnEncoderConfig cfg) : cfg_(cfg) {
    if (cfg_.dim == 0 || cfg_.layers == 0 || cfg_.heads == 0) {
        throw DomainError("gnn encoder needs dim, layers, heads >= 1");
    }
    size_t d = cfg_.dim;
    weights_.resize(static_cast<size_t>(cfg_.layers) * cfg_.heads * d * d);
    float scale = std::sqrt(3.0f / static_cast<float>(d));
    SplitMix64 rng(splitmix64_once(cfg_.seed ^ 0x6e6eULL));
    for (float& w : weights_) w = rng.uniform(-scale, scale);
}

std::vector<double> GnnEncoder::apply_layer(uint32_t layer, const std::vector<double>& x) const {
    size_t d = cfg_.dim;
    std::vector<double> z(d, 0.0);
    for (uint32_t h = 0; h < cfg_.heads; ++h) {
        const float* w = layer_weights(layer, h);
        for (size_t r = 0; r < d; ++r) {
            double acc = 0;
            for (size_t c = 0; c < d; ++c) acc += static_cast<double>(w[r * d + c]) * x[c];
            z[r] += acc;
        }
    }
    double inv_heads = 1.0 / cfg_.heads;
    for (size_t r = 0; r < d; ++r) z[r] = std::tanh(z[r] * inv_heads);
    return z;
}

EmbeddingVec GnnEncoder::encode(const TextEncoder& text_enc, const Subgraph& s) const {
    if (s.empty()) throw DomainError("encode_subgraph: empty subgraph");
    if (text_enc.dim() != cfg_.dim) {
        throw DomainError("gnn dim does not match text encoder dim");
    }
    size_t d = cfg_.dim;

    // Dense local index over the subgraph's nodes, ascending by node id.
    std::vector<NodeId> ids(s.node_ids.begin(), s.node_ids.end());
    auto local = [&](NodeId id) {
        return static_cast<size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };

    size_t n = ids.size();
    std::vector<std::vector<double>> state(n);
    for (size_t v = 0; v < n; ++v) {
        EmbeddingVec f = text_enc.embed(s.parent->nodes.at(ids[v]));
        state[v].assign(f.begin(), f.end());
    }

    struct Msg {
        size_t src, dst;
        std::vector<double> gate;  // edge text feature
    };
    std::vector<Msg> msgs;
    msgs.reserve(s.edge_indices.size());
    for (uint32_t ei : s.edge_indices) {  // ascending edge index
        const Edge& e = s.parent->edges[ei];
        EmbeddingVec g = text_enc.embed(e.attr);
        msgs.push_back({local(e.src), local(e.dst), std::vector<double>(g.begin(), g.end())});
    }

    for (uint32_t layer = 0; layer < cfg_.layers; ++layer) {
        // agg[v] = mean of (own state + incoming gated neighbor states)
        std::vector<std::vector<double>> agg(n);
        std::vector<uint32_t> fanin(n, 1);
        for (size_t v = 0; v < n; ++v) agg[v] = state[v];
        for (const Msg& m : msgs) {
            for (size_t k = 0; k < d; ++k) agg[m.dst][k] += state[m.src][k] * m.gate[k];
            ++fanin[m.dst];
        }
        for (size_t v = 0; v < n; ++v) {
            double inv = 1.0 / fanin[v];
            for (size_t k = 0; k < d; ++k) agg[v][k] *= inv;
            state[v] = apply_layer(layer, agg[v]);
        }
    }

    std::vector<double> pooled(d, 0.0);
    for (size_t v = 0; v < n; ++v) {
        for (size_t k = 0; k < d; ++k) pooled[k] += state[v][k];
    }
    double inv_n = 1.0 / static_cast<double>(n);
    double norm = 0;
    for (size_t k = 0; k < d; ++k) {
        pooled[k] *= inv_n;
        norm += pooled[k] * pooled[k];
    }
    norm = std::sqrt(norm);
    EmbeddingVec out(d, 0.0f);
    if (norm > 0) {
        for (size_t k = 0; k < d; ++k) out[k] = static_cast<float>(pooled[k] / norm);
    }
    return out;
}

}  // namespace subgcache

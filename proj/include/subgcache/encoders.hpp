#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "subgcache/graph_store.hpp"

namespace subgcache {

using EmbeddingVec = std::vector<float>;

double cosine_similarity(const EmbeddingVec& a, const EmbeddingVec& b);
double euclidean_distance(const EmbeddingVec& a, const EmbeddingVec& b);

struct TextEncoderConfig {
    uint32_t dim = 64;
    uint64_t seed = 1;
    uint64_t hash_salt = 55;
};

// Deterministic text embedding: lowercased alphanumeric tokens are hashed
// into a fixed bucket space with a sign bit, and the resulting sparse bag is
// pushed through a seeded random projection down to `dim`, then
// L2-normalized. Same text and config always give the same vector; empty
// text (or text with no tokens) gives the zero vector.
class TextEncoder {
public:
    explicit TextEncoder(TextEncoderConfig cfg = {});

    EmbeddingVec embed(std::string_view text) const;

    uint32_t dim() const { return cfg_.dim; }
    const TextEncoderConfig& config() const { return cfg_; }

    static constexpr uint32_t kBuckets = 4096;

private:
    TextEncoderConfig cfg_;
    std::vector<float> projection_;  // dim x kBuckets, row-major
};

struct GnnEncoderConfig {
    uint32_t layers = 4;
    uint32_t heads = 4;  // independent channel groups, averaged
    uint32_t dim = 64;   // must match the text encoder dim
    uint64_t seed = 2;
};

// Frozen message-passing encoder that pools a subgraph into one embedding.
// Node states start from text features; each round mean-aggregates incoming
// messages (neighbor state modulated elementwise by the edge text feature),
// applies the layer's seeded linear maps and tanh; the final embedding is
// the L2-normalized mean over node states. Invariant to node relabeling and
// edge order up to float rounding.
class GnnEncoder {
public:
    explicit GnnEncoder(GnnEncoderConfig cfg = {});

    EmbeddingVec encode(const TextEncoder& text_enc, const Subgraph& s) const;

    // Layer map applied to a single state vector; exposed so the isolated
    // node case is directly checkable.
    std::vector<double> apply_layer(uint32_t layer, const std::vector<double>& x) const;

    const GnnEncoderConfig& config() const { return cfg_; }

private:
    GnnEncoderConfig cfg_;
    std::vector<float> weights_;  // [layers][heads][dim][dim]

    const float* layer_weights(uint32_t layer, uint32_t head) const {
        size_t d = cfg_.dim;
        return weights_.data() + ((static_cast<size_t>(layer) * cfg_.heads + head) * d * d);
    }
};

}  // namespace subgcache

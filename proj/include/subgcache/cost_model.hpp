#pragma once

#include <cstdint>

namespace subgcache {

struct LmShape {
    uint32_t layers = 4;
    uint32_t heads = 4;
    uint32_t head_dim = 16;
    uint32_t ffn_hidden = 256;

    uint32_t model_dim() const { return heads * head_dim; }
    // Per-token FFN term of the cost proxy (two dim x ffn_hidden projections).
    uint64_t ffn_constant() const {
        return 2ull * model_dim() * ffn_hidden;
    }
};

// Machine-independent latency surrogate for running `new_tokens` through the
// model with `prefix_cached` tokens already in the KV cache:
//   new*(prefix_cached+new)*heads*head_dim*layers  +  new*ffn_constant*layers
// Pure integer arithmetic, exactly reproducible everywhere.
inline uint64_t flop_proxy(uint64_t prefix_cached, uint64_t new_tokens, const LmShape& shape) {
    uint64_t attention = new_tokens * (prefix_cached + new_tokens) * shape.heads *
                         shape.head_dim * shape.layers;
    uint64_t ffn = new_tokens * shape.ffn_constant() * shape.layers;
    return attention + ffn;
}

}  // namespace subgcache

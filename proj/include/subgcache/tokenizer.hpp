#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace subgcache {

using TokenId = int32_t;

// Byte-level tokenizer: 256 byte values plus 4 specials. Encoding is
// stateless and decode(encode(x)) == x for any byte sequence.
struct Tokenizer {
    static constexpr TokenId kBos = 256;
    static constexpr TokenId kEos = 257;
    static constexpr TokenId kPad = 258;
    static constexpr TokenId kGraphSoftSlot = 259;
    static constexpr int32_t kVocabSize = 260;

    // BOS followed by the raw UTF-8 bytes.
    static std::vector<TokenId> tokenize(std::string_view text);

    // Raw bytes only; used when extending an existing context.
    static std::vector<TokenId> encode_bytes(std::string_view text);

    // Concatenated bytes of all byte tokens; specials are dropped.
    static std::string detokenize(const std::vector<TokenId>& tokens);
};

}  // namespace subgcache

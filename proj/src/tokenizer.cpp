#include "subgcache/tokenizer.hpp"

namespace subgcache {

std::vector<TokenId> Tokenizer::tokenize(std::string_view text) {
    std::vector<TokenId> out;
    out.reserve(text.size() + 1);
    out.push_back(kBos);
    for (unsigned char c : text) out.push_back(static_cast<TokenId>(c));
    return out;
}

std::vector<TokenId> Tokenizer::encode_bytes(std::string_view text) {
    std::vector<TokenId> out;
    out.reserve(text.size());
    for (unsigned char c : text) out.push_back(static_cast<TokenId>(c));
    return out;
}

std::string Tokenizer::detokenize(const std::vector<TokenId>& tokens) {
    std::string out;
    out.reserve(tokens.size());
    for (TokenId t : tokens) {
        if (t >= 0 && t < 256) out += static_cast<char>(static_cast<unsigned char>(t));
    }
    return out;
}

}  // namespace subgcache

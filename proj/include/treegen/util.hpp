// util.hpp -- small shared helpers (hashing, tokenization, lexing).
#ifndef TREEGEN_UTIL_HPP
#define TREEGEN_UTIL_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace treegen {

// FNV-1a 64-bit. Used for grammar and file fingerprints; stable across runs.
inline uint64_t fnv1a(std::string_view data, uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string to_hex(uint64_t v);

// Whitespace tokenization; runs of spaces/tabs collapse.
std::vector<std::string> split_tokens(std::string_view text);

std::string join_tokens(const std::vector<std::string>& tokens);

// True for an optionally signed decimal integer literal.
bool lexes_as_int(std::string_view tok);

std::string lowercased(std::string_view s);

}  // namespace treegen

#endif

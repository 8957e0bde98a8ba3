#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "graphpb/errors.hpp"

namespace graphpb {

// Decodes the UTF-8 code point starting at byte `pos`. Returns the number of
// bytes consumed and writes the scalar value to `out`. Throws EncodingError
// on malformed input (bad lead byte, truncated or overlong sequence).
inline std::size_t utf8_decode(std::string_view s, std::size_t pos, char32_t& out) {
    auto bad = [&](const char* what) -> std::size_t {
        throw EncodingError(std::string("invalid UTF-8 (") + what + ") at byte " +
                            std::to_string(pos));
    };
    if (pos >= s.size()) return bad("end of input");
    const auto b0 = static_cast<std::uint8_t>(s[pos]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
        out = b0;
        return 1;
    } else if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1Fu;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0Fu;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07u;
    } else {
        return bad("lead byte");
    }
    if (pos + len > s.size()) return bad("truncated sequence");
    for (std::size_t i = 1; i < len; ++i) {
        const auto b = static_cast<std::uint8_t>(s[pos + i]);
        if ((b & 0xC0) != 0x80) return bad("continuation byte");
        cp = (cp << 6) | (b & 0x3Fu);
    }
    static constexpr char32_t kMinByLen[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMinByLen[len]) return bad("overlong sequence");
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return bad("scalar value");
    out = cp;
    return len;
}

// Number of Unicode scalar values in a UTF-8 string.
inline std::size_t utf8_length(std::string_view s) {
    std::size_t pos = 0, count = 0;
    char32_t cp;
    while (pos < s.size()) {
        pos += utf8_decode(s, pos, cp);
        ++count;
    }
    return count;
}

// Splits a UTF-8 string into one std::string per scalar value.
inline std::vector<std::string> utf8_chars(std::string_view s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    char32_t cp;
    while (pos < s.size()) {
        const std::size_t n = utf8_decode(s, pos, cp);
        out.emplace_back(s.substr(pos, n));
        pos += n;
    }
    return out;
}

}  // namespace graphpb

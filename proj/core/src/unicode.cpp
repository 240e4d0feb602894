#include "elig/unicode.hpp"

#include <algorithm>

#include "elig/errors.hpp"

namespace elig::utf8 {

namespace {

// Decodes one scalar value at `pos`; returns the sequence length or 0 if malformed.
std::size_t decode_one(std::string_view s, std::size_t pos, char32_t& out) noexcept {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
        out = b0;
        return 1;
    } else if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        return 0;
    }
    if (pos + len > s.size()) return 0;
    for (std::size_t i = 1; i < len; ++i) {
        const auto b = static_cast<unsigned char>(s[pos + i]);
        if ((b & 0xC0) != 0x80) return 0;
        cp = (cp << 6) | (b & 0x3F);
    }
    // overlong encodings, surrogates, out of range
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) return 0;
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
    out = cp;
    return len;
}

}  // namespace

bool is_valid(std::string_view text) noexcept {
    std::size_t pos = 0;
    char32_t cp = 0;
    while (pos < text.size()) {
        const auto n = decode_one(text, pos, cp);
        if (n == 0) return false;
        pos += n;
    }
    return true;
}

std::u32string decode(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    char32_t cp = 0;
    while (pos < text.size()) {
        const auto n = decode_one(text, pos, cp);
        if (n == 0) throw FormatError("invalid UTF-8 at byte " + std::to_string(pos));
        out.push_back(cp);
        pos += n;
    }
    return out;
}

std::string encode(char32_t cp) {
    std::string out;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
    return out;
}

std::string encode(std::u32string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char32_t cp : text) out += encode(cp);
    return out;
}

std::size_t length(std::string_view text) {
    std::size_t pos = 0;
    std::size_t count = 0;
    char32_t cp = 0;
    while (pos < text.size()) {
        const auto n = decode_one(text, pos, cp);
        if (n == 0) throw FormatError("invalid UTF-8 at byte " + std::to_string(pos));
        pos += n;
        ++count;
    }
    return count;
}

OffsetMap::OffsetMap(std::string_view text) : text_(text) {
    starts_.reserve(text.size() + 1);
    std::size_t pos = 0;
    char32_t cp = 0;
    while (pos < text.size()) {
        const auto n = decode_one(text, pos, cp);
        if (n == 0) throw FormatError("invalid UTF-8 at byte " + std::to_string(pos));
        starts_.push_back(pos);
        pos += n;
    }
    starts_.push_back(text.size());
}

std::size_t OffsetMap::codepoint_at_byte(std::size_t byte) const {
    auto it = std::upper_bound(starts_.begin(), starts_.end(), byte);
    return static_cast<std::size_t>(std::distance(starts_.begin(), it)) - 1;
}

std::string_view OffsetMap::slice(std::size_t begin_cp, std::size_t end_cp) const {
    const auto b = starts_.at(begin_cp);
    const auto e = starts_.at(end_cp);
    return text_.substr(b, e - b);
}

}  // namespace elig::utf8

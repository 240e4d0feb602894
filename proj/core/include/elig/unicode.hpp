#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Character offsets across the library count Unicode scalar values, while text
// is stored as UTF-8. These helpers translate between the two.
namespace elig::utf8 {

bool is_valid(std::string_view text) noexcept;

// Throws FormatError on malformed input.
std::u32string decode(std::string_view text);

std::string encode(std::u32string_view text);
std::string encode(char32_t cp);

// Number of scalar values; throws FormatError on malformed input.
std::size_t length(std::string_view text);

// Byte offset of every scalar value, plus a final entry equal to text.size().
class OffsetMap {
public:
    explicit OffsetMap(std::string_view text);

    std::size_t size() const noexcept { return starts_.size() - 1; }
    std::size_t byte_offset(std::size_t cp) const { return starts_.at(cp); }
    // Index of the scalar value containing the given byte.
    std::size_t codepoint_at_byte(std::size_t byte) const;
    std::string_view slice(std::size_t begin_cp, std::size_t end_cp) const;
    std::string_view text() const noexcept { return text_; }

private:
    std::string_view text_;
    std::vector<std::size_t> starts_;
};

}  // namespace elig::utf8

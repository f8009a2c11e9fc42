#ifndef EXTSUM_TEXT_HPP
#define EXTSUM_TEXT_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace extsum {

// All lengths in this project are measured in Unicode code points
// ("characters"), never bytes.

class Utf8Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::u32string DecodeUtf8(std::string_view s);
std::string EncodeUtf8(std::u32string_view s);
std::string EncodeUtf8(char32_t c);

// Number of code points in a UTF-8 string.
std::size_t CharLength(std::string_view s);

// Splits into single-character UTF-8 strings.
std::vector<std::string> SplitChars(std::string_view s);

// Splits on `sep`, keeping empty pieces.
std::vector<std::u32string> SplitOn(std::u32string_view s, char32_t sep);

// Removes whitespace and ASCII punctuation.
std::u32string StripPunctuation(std::u32string_view s);

}  // namespace extsum

#endif  // EXTSUM_TEXT_HPP
